"""Labels, labeled samples and the dataset container with its CSV form."""

import csv
import enum
import io
from dataclasses import dataclass

import numpy as np

from .errors import MalformedDataset

N_FEATURES = 47


class Class(enum.IntEnum):
    CLEANWARE = 0
    MALWARE = 1
    WORM = -1
    BOTNET = -2
    TROJAN = -3

    @classmethod
    def parse(cls, value):
        """Accept a numeric code or a case-insensitive class name."""
        if isinstance(value, cls):
            return value
        text = str(value).strip()
        try:
            return cls(int(text))
        except ValueError:
            pass
        try:
            return cls[text.upper()]
        except KeyError:
            raise ValueError(f"unknown class {value!r}") from None


# Table order; also the argmax tie-break order.
CLASS_ORDER = (Class.CLEANWARE, Class.MALWARE, Class.WORM, Class.BOTNET, Class.TROJAN)


class OS(enum.Enum):
    WIN7 = "Win7"
    WIN8_1 = "Win8_1"
    WIN10 = "Win10"
    UNKNOWN = "Unknown"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value or "").strip().lower().replace(" ", "").replace(".", "_")
        for os_ in cls:
            if os_.value.lower() == key:
                return os_
        aliases = {"windows7": cls.WIN7, "win8": cls.WIN8_1, "windows8_1": cls.WIN8_1,
                   "windows10": cls.WIN10}
        return aliases.get(key, cls.UNKNOWN)


class ClassSet(enum.Enum):
    FLAT5 = "Flat5"
    BINARY_CLEAN_MAL = "BinaryCleanMal"
    FAMILY4 = "Family4"

    @property
    def classes(self):
        if self is ClassSet.FLAT5:
            return CLASS_ORDER
        if self is ClassSet.BINARY_CLEAN_MAL:
            return (Class.CLEANWARE, Class.MALWARE)
        return (Class.CLEANWARE, Class.WORM, Class.BOTNET, Class.TROJAN)

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "").replace("-", "")
        for cs in cls:
            if cs.value.lower() == key or cs.name.lower().replace("_", "") == key:
                return cs
        raise ValueError(f"unknown class set {value!r}")


@dataclass(frozen=True)
class LabeledSample:
    features: tuple
    label: Class
    os: OS = OS.UNKNOWN
    sample_name: str = ""


class Dataset:
    """
    Feature matrix ``X`` (n x d, bool), labels ``y`` (n, int codes) and
    per-sample metadata.  ``class_set`` fixes the legal labels and the
    class order models use.
    """

    def __init__(self, X, y, names=None, oses=None, class_set=ClassSet.FLAT5):
        X = np.asarray(X, dtype=bool)
        if X.ndim != 2:
            X = X.reshape(len(X), -1) if len(X) else np.zeros((0, N_FEATURES), bool)
        y = np.asarray(y, dtype=np.int64).reshape(-1)
        if len(X) != len(y):
            raise MalformedDataset(f"{len(X)} feature rows but {len(y)} labels")
        self.X = X
        self.y = y
        n = len(y)
        self.names = list(names) if names is not None else [f"s{i}" for i in range(n)]
        self.oses = [OS.parse(o) for o in oses] if oses is not None else [OS.UNKNOWN] * n
        self.class_set = ClassSet.parse(class_set)
        legal = {int(c) for c in self.class_set.classes}
        bad = sorted(set(self.y.tolist()) - legal)
        if bad:
            raise MalformedDataset(f"labels {bad} not legal in {self.class_set.value}")

    @classmethod
    def from_samples(cls, samples, class_set=ClassSet.FLAT5):
        samples = list(samples)
        width = len(samples[0].features) if samples else N_FEATURES
        X = np.array([s.features for s in samples], dtype=bool).reshape(len(samples), width)
        return cls(
            X,
            [int(s.label) for s in samples],
            [s.sample_name for s in samples],
            [s.os for s in samples],
            class_set,
        )

    def __len__(self):
        return len(self.y)

    @property
    def n_features(self):
        return self.X.shape[1]

    @property
    def classes(self):
        return self.class_set.classes

    @property
    def samples(self):
        return [
            LabeledSample(tuple(bool(b) for b in row), Class(int(lbl)), os_, name)
            for row, lbl, os_, name in zip(self.X, self.y, self.oses, self.names)
        ]

    def subset(self, idx):
        idx = np.asarray(idx, dtype=np.int64)
        return Dataset(
            self.X[idx],
            self.y[idx],
            [self.names[i] for i in idx],
            [self.oses[i] for i in idx],
            self.class_set,
        )

    def with_class_set(self, class_set):
        """
        Relabel for another class set.  Moving to BinaryCleanMal folds the
        families into Malware; Family4 rejects unrefined Malware labels.
        """
        class_set = ClassSet.parse(class_set)
        y = self.y.copy()
        if class_set is ClassSet.BINARY_CLEAN_MAL:
            y[y != int(Class.CLEANWARE)] = int(Class.MALWARE)
        return Dataset(self.X, y, self.names, self.oses, class_set)

    def class_index(self):
        """Labels as positions in ``self.classes``."""
        lookup = {int(c): i for i, c in enumerate(self.classes)}
        return np.array([lookup[int(v)] for v in self.y], dtype=np.int64)

    def __eq__(self, other):
        return (
            isinstance(other, Dataset)
            and self.class_set == other.class_set
            and self.X.shape == other.X.shape
            and bool(np.array_equal(self.X, other.X))
            and bool(np.array_equal(self.y, other.y))
            and self.names == other.names
            and self.oses == other.oses
        )

    def __repr__(self):
        return f"Dataset(n={len(self)}, d={self.n_features}, class_set={self.class_set.value})"


def concat(datasets):
    datasets = list(datasets)
    return Dataset(
        np.vstack([d.X for d in datasets]),
        np.concatenate([d.y for d in datasets]),
        [n for d in datasets for n in d.names],
        [o for d in datasets for o in d.oses],
        datasets[0].class_set,
    )


def header(width=N_FEATURES):
    return ["sample", "os", "label"] + [f"P{i}" for i in range(1, width + 1)]


def save_dataset(ds):
    """Serialize to CSV bytes: ``sample,os,label,P1..Pn`` with 0/1 cells."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header(ds.n_features))
    for row, lbl, os_, name in zip(ds.X, ds.y, ds.oses, ds.names):
        w.writerow([name, os_.value, int(lbl)] + [int(b) for b in row])
    return buf.getvalue().encode("utf-8")


def load_dataset(data, class_set=ClassSet.FLAT5):
    """Parse CSV bytes produced by :func:`save_dataset`."""
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedDataset(f"not UTF-8: {exc}") from exc
    rows = list(csv.reader(io.StringIO(data)))
    if not rows:
        raise MalformedDataset("empty file")
    head = rows[0]
    width = len(head) - 3
    if width < 1 or head != header(width):
        raise MalformedDataset("header must be sample,os,label,P1,...,Pn")
    names, oses, labels, feats = [], [], [], []
    legal = {int(c) for c in ClassSet.parse(class_set).classes}
    for lineno, row in enumerate(rows[1:], 2):
        if not row:
            continue
        if len(row) != len(head):
            raise MalformedDataset(f"line {lineno}: {len(row)} columns, expected {len(head)}")
        try:
            label = int(row[2])
        except ValueError:
            raise MalformedDataset(f"line {lineno}: bad label {row[2]!r}") from None
        if label not in legal:
            raise MalformedDataset(f"line {lineno}: unknown label code {label}")
        cells = row[3:]
        if any(c not in ("0", "1") for c in cells):
            raise MalformedDataset(f"line {lineno}: feature cells must be 0 or 1")
        names.append(row[0])
        oses.append(OS.parse(row[1]))
        labels.append(label)
        feats.append([c == "1" for c in cells])
    X = np.array(feats, dtype=bool).reshape(len(feats), width)
    return Dataset(X, labels, names, oses, class_set)
