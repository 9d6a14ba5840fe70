"""
Canonical form for registry and filesystem path strings.

Sandbox logs and location lists spell the same place many ways
(``HKLM`` vs ``HKEY_LOCAL_MACHINE``, ``C:`` vs ``%SystemDrive%``, per-user
folders, SIDs, ``CurrentControlSet``).  :func:`parse_path` folds all of
these into an :class:`ArtifactPath` whose equality means "same artifact
location".
"""

import enum
import re
from dataclasses import dataclass, field, replace

from .errors import EmptyPath, UnknownRoot


class PathKind(enum.Enum):
    REGISTRY = "Registry"
    FILESYSTEM = "Filesystem"


HKLM = "HKEY_LOCAL_MACHINE"
HKCU = "HKEY_CURRENT_USER"
HKU = "HKEY_USERS"
HKCR = "HKEY_CLASSES_ROOT"
HKCC = "HKEY_CURRENT_CONFIG"
SYSTEMDRIVE = "%SYSTEMDRIVE%"

HIVES = (HKLM, HKCU, HKU, HKCR, HKCC)
ROOTS = frozenset(HIVES + (SYSTEMDRIVE,))

HIVE_ALIASES = {
    "HKLM": HKLM,
    "HKCU": HKCU,
    "HKCR": HKCR,
    "HKU": HKU,
    "HKCC": HKCC,
}
HIVE_ALIASES.update({h: h for h in HIVES})

# Kernel-namespace spellings seen in sandbox traces.
_KERNEL_PREFIXES = (
    (("registry", "machine"), HKLM),
    (("registry", "user"), HKU),
)

USER = "%USER%"
SID = "%SID%"
NAME = "%NAME%"
PLACEHOLDERS = frozenset({USER, SID, NAME})

# Environment placeholders expand onto the system drive.
_ENV_EXPANSIONS = {
    "%SYSTEMDRIVE%": (),
    "%SYSTEMROOT%": ("windows",),
    "%WINDIR%": ("windows",),
    "%PROGRAMFILES%": ("program files",),
    "%PROGRAMFILES(X86)%": ("program files (x86)",),
    "%PROGRAMDATA%": ("programdata",),
    "%ALLUSERSPROFILE%": ("programdata",),
    "%PUBLIC%": ("users", "public"),
    "%USERPROFILE%": ("users", USER),
    "%APPDATA%": ("users", USER, "appdata", "roaming"),
    "%LOCALAPPDATA%": ("users", USER, "appdata", "local"),
    "%TEMP%": ("users", USER, "appdata", "local", "temp"),
    "%TMP%": ("users", USER, "appdata", "local", "temp"),
}

# Rootless strings starting with one of these are taken as system-drive relative.
_IMPLICIT_DRIVE_DIRS = frozenset(
    {"documents and settings", "users", "windows", "program files", "programdata"}
)
_USER_PARENTS = frozenset({"users", "documents and settings"})
# Shared profile folders are not a user name.
_SHARED_PROFILES = frozenset({"public", "default", "all users", "default user"})

_DRIVE_RE = re.compile(r"^[A-Za-z]:$")
_SID_RE = re.compile(r"^s-1-\d+(-\d+)*(_classes)?$", re.IGNORECASE)
_SEP_RE = re.compile(r"[\\/]+")


@dataclass(frozen=True)
class ArtifactPath:
    """A location as (kind, root, segments); ``raw`` is kept for reporting only."""

    kind: PathKind
    root: str
    segments: tuple
    raw: str = field(default="", compare=False)

    def __str__(self):
        return "\\".join((self.root,) + self.segments)

    def __len__(self):
        return len(self.segments)


def _classify_root(token):
    t = token.strip().upper()
    bare = t.strip("%").strip()
    if bare in HIVE_ALIASES:
        return PathKind.REGISTRY, HIVE_ALIASES[bare]
    if t in _ENV_EXPANSIONS:
        return PathKind.FILESYSTEM, t
    if _DRIVE_RE.match(t):
        return PathKind.FILESYSTEM, t
    return None


def parse_path(raw):
    """
    Parse a registry or filesystem path string into normalized form.

    Backslash and forward slash are both separators; leading ``\\??\\`` and
    ``\\\\?\\`` device prefixes and trailing separators are dropped.

    Raises
    ------
    EmptyPath
        ``raw`` is empty or whitespace.
    UnknownRoot
        The first component is not a hive, drive letter or known placeholder.
    """
    if raw is None or not str(raw).strip():
        raise EmptyPath("empty path")
    text = str(raw).strip()
    parts = [p.strip() for p in _SEP_RE.split(text)]
    parts = [p for p in parts if p]
    if parts and parts[0] in ("??", "?", "."):
        parts = parts[1:]
    if not parts:
        raise EmptyPath(f"no path components in {raw!r}")

    lowered = tuple(p.lower() for p in parts)
    for prefix, hive in _KERNEL_PREFIXES:
        if lowered[: len(prefix)] == prefix:
            p = ArtifactPath(PathKind.REGISTRY, hive, tuple(parts[len(prefix):]), str(raw))
            return normalize(p)

    classified = _classify_root(parts[0])
    if classified is not None:
        kind, root = classified
        rest = parts[1:]
    elif lowered[0] in _IMPLICIT_DRIVE_DIRS:
        kind, root, rest = PathKind.FILESYSTEM, SYSTEMDRIVE, parts
    else:
        raise UnknownRoot(f"unrecognized root {parts[0]!r} in {raw!r}")
    return normalize(ArtifactPath(kind, root, tuple(rest), str(raw)))


def _fold(segment):
    s = segment.strip().lower()
    up = s.upper()
    return up if up in PLACEHOLDERS else s


def normalize(p):
    """
    Apply the rewrite rules in a fixed order: hive aliases, drive and
    environment roots onto ``%SYSTEMDRIVE%``, per-user folder to ``%USER%``,
    ``HKEY_USERS`` SID to ``%SID%``, case folding, and ``CurrentControlSet``
    to ``ControlSet001``.  Idempotent.
    """
    kind, root = p.kind, p.root.strip().upper()
    segments = [s for s in (_fold(x) for x in p.segments) if s]

    bare = root.strip("%").strip()
    if bare in HIVE_ALIASES:
        kind, root = PathKind.REGISTRY, HIVE_ALIASES[bare]
    elif root in _ENV_EXPANSIONS:
        segments = list(_ENV_EXPANSIONS[root]) + segments
        kind, root = PathKind.FILESYSTEM, SYSTEMDRIVE
    elif _DRIVE_RE.match(root):
        kind, root = PathKind.FILESYSTEM, SYSTEMDRIVE

    if kind is PathKind.FILESYSTEM:
        if (
            len(segments) >= 2
            and segments[0] in _USER_PARENTS
            and segments[1] not in _SHARED_PROFILES
        ):
            segments[1] = USER
    elif root == HKU and segments and _SID_RE.match(segments[0]):
        segments[0] = SID

    segments = ["controlset001" if s == "currentcontrolset" else s for s in segments]
    return replace(p, kind=kind, root=root, segments=tuple(segments))


def is_prefix_of(a, b):
    """True when ``a`` names ``b`` or one of its ancestors (whole segments only)."""
    return (
        a.kind == b.kind
        and a.root == b.root
        and len(a.segments) <= len(b.segments)
        and b.segments[: len(a.segments)] == a.segments
    )
