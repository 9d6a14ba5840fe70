"""
Synthetic labeled datasets from per-class location hit probabilities.

Real malware corpora are not redistributable, so classifiers are exercised
on samples drawn from class profiles: bit ``i`` of a sample of class ``c``
is set independently with probability ``profile[c][i]``.

Default profiles combine two sources:

* observed hit frequencies from per-sample location matrices (bullet marks
  per column / rows) for trojans, bots and cleanware, where a column
  covers a single location;
* locations singled out as characteristic of a class are raised to
  ``NAMED_HIGH``; anything without an observation gets ``BACKGROUND``.
"""

import csv
import io
from dataclasses import dataclass

import numpy as np

from .dataset import Class, ClassSet, Dataset, N_FEATURES, OS, concat
from .errors import InvalidProfile
from .rng import SplitMix64, derive_seed

NAMED_HIGH = 0.8
BACKGROUND = 0.1

# location id -> (hits, rows) from per-sample matrices.  A column spanning
# several locations is used only when it is empty (then each one is 0).
_OBSERVED = {
    Class.TROJAN: (15, {1: 5, 2: 5, 3: 1, 4: 4, 5: 7, 6: 2, 9: 4, 10: 3, 11: 3, 13: 1,
                        14: 5, 15: 2, 17: 1, 18: 6, 19: 8, 20: 1, 21: 2, 22: 4, 23: 3},
                   range(1, 25)),
    Class.BOTNET: (16, {1: 3, 2: 3, 3: 1, 4: 3, 6: 1, 7: 2, 8: 3, 9: 1, 10: 1, 16: 1,
                        17: 9, 18: 13, 19: 5, 21: 1, 22: 1},
                   range(1, 25)),
    Class.CLEANWARE: (23, {1: 1, 37: 3, 38: 3, 39: 2, 40: 2, 41: 2, 42: 3, 44: 1, 45: 6,
                           46: 2, 47: 2},
                      list(range(1, 35)) + list(range(36, 48))),
}

_NAMED = {
    Class.CLEANWARE: range(37, 46),
    Class.WORM: (4, 8, 13, 17, 18, 20, 21),
    Class.BOTNET: (1, 2, 8, 13, 17, 18),
    Class.TROJAN: (1, 2, 4, 14, 17, 18, 19, 20),
}

DEFAULT_CLASSES = (Class.CLEANWARE, Class.WORM, Class.BOTNET, Class.TROJAN)

FIXTURE_SEED = 7
FIXTURE_N = 90


@dataclass(frozen=True)
class ClassProfile:
    label: Class
    hit_prob: tuple

    def __post_init__(self):
        validate_profile(self)

    def array(self):
        return np.asarray(self.hit_prob, dtype=np.float64)


def validate_profile(profile):
    p = np.asarray(profile.hit_prob, dtype=np.float64)
    if p.ndim != 1 or len(p) == 0:
        raise InvalidProfile(f"{profile.label.name}: hit_prob must be a non-empty vector")
    if not np.all(np.isfinite(p)) or (p < 0).any() or (p > 1).any():
        raise InvalidProfile(f"{profile.label.name}: probabilities must lie in [0, 1]")


def _profile(label):
    p = np.full(N_FEATURES, BACKGROUND)
    if label in _OBSERVED:
        rows, hits, covered = _OBSERVED[label]
        for loc in covered:
            p[loc - 1] = hits.get(loc, 0) / rows
    for loc in _NAMED[label]:
        p[loc - 1] = max(p[loc - 1], NAMED_HIGH)
    return ClassProfile(label, tuple(float(v) for v in p))


def default_profiles():
    """Cleanware, worm, botnet and trojan profiles over the 47 locations."""
    return [_profile(c) for c in DEFAULT_CLASSES]


def soften(profiles, toward=0.5, amount=0.5):
    """Move every probability ``amount`` of the way to ``toward``."""
    return [
        ClassProfile(p.label, tuple(float(v) for v in (1 - amount) * p.array() + amount * toward))
        for p in profiles
    ]


def generate(profiles, n_per_class, seed, class_set=ClassSet.FLAT5):
    """
    ``n_per_class`` samples per profile, classes in profile order.  Class
    ``k`` draws from the stream ``derive_seed(seed, k)``: one uniform per
    bit, row-major, bit set when the uniform is below the probability.
    """
    if n_per_class < 1:
        raise ValueError("n_per_class must be >= 1")
    parts = []
    for k, prof in enumerate(profiles):
        validate_profile(prof)
        p = prof.array()
        u = SplitMix64(derive_seed(seed, k)).uniform(n_per_class * len(p))
        X = u.reshape(n_per_class, len(p)) < p
        name = prof.label.name.lower()
        parts.append(
            Dataset(
                X,
                [int(prof.label)] * n_per_class,
                [f"synthetic-{name}-{i:05d}" for i in range(n_per_class)],
                [OS.UNKNOWN] * n_per_class,
                class_set,
            )
        )
    return concat(parts)


def fixture(name, n_per_class=FIXTURE_N, seed=FIXTURE_SEED, class_set=ClassSet.FLAT5):
    """The ``separable`` or ``hard`` (profiles halfway to 0.5) benchmark dataset."""
    profiles = default_profiles()
    if name == "hard":
        profiles = soften(profiles)
    elif name != "separable":
        raise ValueError(f"unknown fixture {name!r}")
    return generate(profiles, n_per_class, seed, class_set)


def save_profiles(profiles):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    width = len(profiles[0].hit_prob) if profiles else N_FEATURES
    w.writerow(["class"] + [f"P{i}" for i in range(1, width + 1)])
    for p in profiles:
        w.writerow([int(p.label)] + [repr(float(v)) for v in p.hit_prob])
    return buf.getvalue().encode("utf-8")


def load_profiles(data):
    """Profile CSV ``class,P1..Pn``; class cells are codes or class names."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    rows = [r for r in csv.reader(io.StringIO(data)) if r]
    if not rows or rows[0][0].strip().lower() != "class":
        raise InvalidProfile("profile CSV must start with a class,P1,... header")
    width = len(rows[0]) - 1
    out = []
    for lineno, row in enumerate(rows[1:], 2):
        if len(row) != width + 1:
            raise InvalidProfile(f"line {lineno}: expected {width + 1} columns")
        try:
            label = Class.parse(row[0])
            probs = tuple(float(v) for v in row[1:])
        except ValueError as exc:
            raise InvalidProfile(f"line {lineno}: {exc}") from None
        out.append(ClassProfile(label, probs))
    return out


def synthetic_report(bits, sample_id, sample_name=None, catalog=None):
    """
    A native sandbox report touching exactly the locations set in ``bits``
    (one write event under each), for exercising ``predict`` end to end.
    """
    from .catalog import builtin_catalog, example_path
    from .ingest import EventOp, SandboxEvent, SandboxReport
    from .paths import PathKind

    catalog = catalog or builtin_catalog()
    events = []
    for i, b in enumerate(bits, 1):
        if b and i in catalog.by_id:
            loc = catalog.by_id[i]
            op = EventOp.REG_SET_VALUE if loc.pattern.kind is PathKind.REGISTRY else EventOp.FILE_WRITE
            events.append(SandboxEvent(op, example_path(loc)))
    return SandboxReport(sample_id, sample_name or sample_id, OS.UNKNOWN, events)
