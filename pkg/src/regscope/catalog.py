"""
The artifact-location catalog and the event -> location matcher.

A catalog is loaded from a manifest (``P<id><TAB><raw path>[<TAB><note>]``,
``#`` comments).  The bundled manifest lists the 47 standard locations.
Each event is attributed to the single most specific location whose
pattern is a prefix of it; a sample's feature vector ORs those hits.
"""

import hashlib
import os
import re
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from . import paths
from .errors import ManifestInvalid, PathError
from .paths import ArtifactPath, parse_path

N_LOCATIONS = 47
CATALOG_ENV = "REGSCOPE_CATALOG"

# Table placeholders that stand for "any single segment".
_PATTERN_WILDCARDS = {
    "software_name": paths.NAME,
    "keyname": paths.NAME,
    "% account id %": paths.SID,
    "[user name]": paths.USER,
    "victim_user": paths.USER,
}
WILDCARDS = frozenset({paths.USER, paths.SID, paths.NAME})

_ID_RE = re.compile(r"^P(\d+)$")


@dataclass(frozen=True)
class ArtifactLocation:
    id: int
    pattern: ArtifactPath
    note: str = ""

    @property
    def label(self):
        return f"P{self.id}"

    @property
    def raw(self):
        return self.pattern.raw


def pattern_from_raw(raw):
    """Parse a manifest path and turn table placeholders into wildcard segments."""
    p = parse_path(raw)
    segs = tuple(_PATTERN_WILDCARDS.get(s, s) for s in p.segments)
    return ArtifactPath(p.kind, p.root, segs, p.raw)


_CONCRETE = {paths.USER: "examiner", paths.SID: "S-1-5-21-1004-500", paths.NAME: "example"}


def example_path(location, leaf="value"):
    """A concrete path string that the location's pattern matches."""
    p = location.pattern
    root = "C:" if p.root == paths.SYSTEMDRIVE else p.root
    segs = [_CONCRETE.get(s, s) for s in p.segments]
    return "\\".join([root] + segs + ([leaf] if leaf else []))


def pattern_matches(pattern, path):
    """Wildcard-aware prefix test: pattern segments in WILDCARDS match any one segment."""
    if pattern.kind != path.kind or pattern.root != path.root:
        return False
    if len(pattern.segments) > len(path.segments):
        return False
    return all(
        ps in WILDCARDS or ps == s for ps, s in zip(pattern.segments, path.segments)
    )


class _Node:
    __slots__ = ("children", "wildcard", "location")

    def __init__(self):
        self.children = {}
        self.wildcard = None
        self.location = None


class LocationMatcher:
    """Segment trie over catalog patterns answering longest-prefix queries."""

    def __init__(self, locations):
        self._roots = {}
        for loc in sorted(locations, key=lambda l: l.id):
            p = loc.pattern
            node = self._roots.setdefault((p.kind, p.root), _Node())
            for seg in p.segments:
                if seg in WILDCARDS:
                    if node.wildcard is None:
                        node.wildcard = _Node()
                    node = node.wildcard
                else:
                    node = node.children.setdefault(seg, _Node())
            # Duplicates keep the lowest id.
            if node.location is None:
                node.location = loc.id

    def match(self, path):
        """Id of the longest matching pattern (lowest id on ties), or None."""
        node = self._roots.get((path.kind, path.root))
        if node is None:
            return None
        best = (-1, None)
        stack = [(node, 0)]
        segs = path.segments
        while stack:
            node, depth = stack.pop()
            if node.location is not None:
                if depth > best[0] or (depth == best[0] and node.location < best[1]):
                    best = (depth, node.location)
            if depth == len(segs):
                continue
            child = node.children.get(segs[depth])
            if child is not None:
                stack.append((child, depth + 1))
            if node.wildcard is not None:
                stack.append((node.wildcard, depth + 1))
        return best[1]


@dataclass(frozen=True)
class FeatureVector:
    """Fixed-width location hit vector; index i-1 holds location P i."""

    bits: tuple

    @classmethod
    def zeros(cls, width=N_LOCATIONS):
        return cls((False,) * width)

    @classmethod
    def from_ids(cls, ids, width=N_LOCATIONS):
        bits = [False] * width
        for i in ids:
            if 1 <= i <= width:
                bits[i - 1] = True
        return cls(tuple(bits))

    def __len__(self):
        return len(self.bits)

    def __getitem__(self, i):
        return self.bits[i]

    def set_ids(self):
        return [i + 1 for i, b in enumerate(self.bits) if b]

    def to_array(self):
        return np.array(self.bits, dtype=bool)


@dataclass
class Extraction:
    """Feature vector plus attribution detail for reporting."""

    vector: FeatureVector
    hits: dict = field(default_factory=dict)  # id -> first matching event path
    unmatched: int = 0


class Catalog:
    def __init__(self, locations, source_text="", width=N_LOCATIONS):
        self.locations = tuple(sorted(locations, key=lambda l: l.id))
        self.by_id = {l.id: l for l in self.locations}
        self.matcher = LocationMatcher(self.locations)
        self.width = width
        self.version = hashlib.sha256(source_text.encode("utf-8")).hexdigest()[:12]

    def __len__(self):
        return len(self.locations)

    def __iter__(self):
        return iter(self.locations)

    def __getitem__(self, i):
        return self.locations[i]

    @classmethod
    def from_manifest(cls, text, width=N_LOCATIONS):
        return cls(parse_manifest(text), source_text=text, width=width)

    @classmethod
    def builtin(cls):
        return cls.from_manifest(builtin_manifest_text())

    @classmethod
    def from_env(cls):
        """Catalog named by ``$REGSCOPE_CATALOG``, else the bundled one."""
        path = os.environ.get(CATALOG_ENV)
        if not path:
            return cls.builtin()
        with open(path, encoding="utf-8") as fh:
            return cls.from_manifest(fh.read())

    def match_event(self, path):
        return self.matcher.match(path)

    def duplicate_of(self, loc_id):
        """Lowest id whose pattern equals ``loc_id``'s pattern."""
        pat = self.by_id[loc_id].pattern
        return min(l.id for l in self.locations if l.pattern == pat)

    def extract(self, events):
        hits = {}
        unmatched = 0
        for ev in events:
            loc = self.matcher.match(ev)
            if loc is None:
                unmatched += 1
            elif loc not in hits:
                hits[loc] = ev
        return Extraction(FeatureVector.from_ids(hits, self.width), hits, unmatched)

    def build_feature_vector(self, events):
        return self.extract(events).vector


def parse_manifest(text):
    """
    Parse manifest text into locations.  Ids must be unique and cover
    1..max without gaps.
    """
    locations = []
    seen = set()
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        cols = line.rstrip("\r\n").split("\t")
        if len(cols) < 2:
            raise ManifestInvalid(f"line {lineno}: expected P<id><TAB><path>")
        m = _ID_RE.match(cols[0].strip())
        if not m:
            raise ManifestInvalid(f"line {lineno}: bad location id {cols[0]!r}")
        loc_id = int(m.group(1))
        if loc_id < 1:
            raise ManifestInvalid(f"line {lineno}: location ids start at P1")
        if loc_id in seen:
            raise ManifestInvalid(f"line {lineno}: duplicate id P{loc_id}")
        try:
            pattern = pattern_from_raw(cols[1])
        except PathError as exc:
            raise ManifestInvalid(f"line {lineno}: {exc}") from exc
        note = cols[2].strip() if len(cols) > 2 else ""
        seen.add(loc_id)
        locations.append(ArtifactLocation(loc_id, pattern, note))
    if not locations:
        raise ManifestInvalid("manifest lists no locations")
    missing = sorted(set(range(1, max(seen) + 1)) - seen)
    if missing:
        raise ManifestInvalid("missing ids: " + ", ".join(f"P{i}" for i in missing))
    return locations


def builtin_manifest_text():
    return resources.files("regscope").joinpath("data", "table3.tsv").read_text("utf-8")


_BUILTIN = None


def builtin_catalog():
    """The bundled 47-location catalog (cached; catalogs are immutable)."""
    global _BUILTIN
    if _BUILTIN is None:
        _BUILTIN = Catalog.builtin()
        if len(_BUILTIN) != N_LOCATIONS:
            raise ManifestInvalid(f"bundled manifest has {len(_BUILTIN)} locations")
    return _BUILTIN


def match_event(matcher, path):
    return matcher.match(path)


def build_feature_vector(events, catalog=None):
    return (catalog or builtin_catalog()).build_feature_vector(events)
