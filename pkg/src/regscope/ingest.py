"""
Sandbox report loading, feature extraction and reputation labels.

Two report shapes are read:

* native: a wrapper object ``{"sample_id", "sample_name", "os", "events": [...]}``,
  or the same as JSON Lines (a header line carrying ``sample_id`` followed by
  one ``{"op", "path", "ts"}`` object per line);
* Cuckoo-like: a behavior report whose ``behavior.summary`` lists touched
  registry keys and files by operation (``regkey_written``, ``file_created``...).
"""

import enum
import json
import urllib.parse
import urllib.request
from dataclasses import dataclass, field

from .catalog import builtin_catalog
from .dataset import OS, Class, LabeledSample
from .errors import MalformedReport, PathError
from .paths import parse_path

DEFAULT_THRESHOLD = 5


class EventOp(enum.Enum):
    REG_SET_VALUE = "RegSetValue"
    REG_CREATE_KEY = "RegCreateKey"
    REG_DELETE_KEY = "RegDeleteKey"
    FILE_WRITE = "FileWrite"
    FILE_CREATE = "FileCreate"
    FILE_DELETE = "FileDelete"
    OTHER = "Other"

    @classmethod
    def parse(cls, value):
        for op in cls:
            if op.value.lower() == str(value).strip().lower():
                return op
        return cls.OTHER


class ReportSource(enum.Enum):
    CUCKOO_LIKE = "CuckooLike"
    NATIVE = "Native"


@dataclass(frozen=True)
class SandboxEvent:
    op: EventOp
    path: str
    timestamp: int = None


@dataclass
class SandboxReport:
    sample_id: str
    sample_name: str = ""
    os: OS = OS.UNKNOWN
    events: list = field(default_factory=list)
    source: ReportSource = ReportSource.NATIVE


CUCKOO_SUMMARY_OPS = {
    "regkey_written": EventOp.REG_SET_VALUE,
    "regkey_created": EventOp.REG_CREATE_KEY,
    "regkey_deleted": EventOp.REG_DELETE_KEY,
    "file_written": EventOp.FILE_WRITE,
    "file_created": EventOp.FILE_CREATE,
    "file_recreated": EventOp.FILE_CREATE,
    "directory_created": EventOp.FILE_CREATE,
    "file_deleted": EventOp.FILE_DELETE,
    "directory_removed": EventOp.FILE_DELETE,
}


def _decode(data):
    if isinstance(data, str):
        return data
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise MalformedReport("report is not UTF-8", exc.start) from exc


def _byte_offset(text, char_pos):
    return len(text[:char_pos].encode("utf-8"))


def _loads(text, base=0):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedReport(f"invalid JSON: {exc.msg}", base + _byte_offset(text, exc.pos)) from None


def _event(obj, where):
    if not isinstance(obj, dict):
        raise MalformedReport(f"event must be an object at {where}")
    path = obj.get("path")
    if not isinstance(path, str) or not path.strip():
        raise MalformedReport(f"event without path at {where}")
    ts = obj.get("ts")
    if ts is not None and not isinstance(ts, int):
        raise MalformedReport(f"non-integer timestamp at {where}")
    return SandboxEvent(EventOp.parse(obj.get("op", "")), path, ts)


def _native_wrapper(doc):
    sample_id = doc.get("sample_id")
    if not isinstance(sample_id, str) or not sample_id:
        raise MalformedReport("missing sample_id")
    events = doc.get("events", [])
    if not isinstance(events, list):
        raise MalformedReport("events must be a list")
    return SandboxReport(
        sample_id=sample_id,
        sample_name=str(doc.get("sample_name") or sample_id),
        os=OS.parse(doc.get("os")),
        events=[_event(e, f"events[{i}]") for i, e in enumerate(events)],
        source=ReportSource.NATIVE,
    )


def _native_lines(text):
    header = {}
    events = []
    offset = 0
    for line in text.splitlines(keepends=True):
        stripped = line.strip()
        if stripped:
            obj = _loads(stripped, offset + _byte_offset(line, line.index(stripped[0])))
            if isinstance(obj, dict) and "sample_id" in obj:
                if "events" in obj:
                    events.extend(_native_wrapper(obj).events)
                header.update({k: v for k, v in obj.items() if k != "events"})
            else:
                events.append(_event(obj, f"byte {offset}"))
        offset += len(line.encode("utf-8"))
    if not header:
        raise MalformedReport("no header line with sample_id")
    report = _native_wrapper(header)
    report.events = events
    return report


def _guess_os(info):
    machine = info.get("machine") or {}
    if isinstance(machine, str):
        machine = {"name": machine}
    text = " ".join(str(machine.get(k, "")) for k in ("name", "label", "platform")).lower()
    for needle, os_ in (("8.1", OS.WIN8_1), ("81", OS.WIN8_1), ("10", OS.WIN10), ("7", OS.WIN7)):
        if needle in text:
            return os_
    return OS.UNKNOWN


def _cuckoo(doc):
    if not isinstance(doc, dict) or "behavior" not in doc:
        raise MalformedReport("Cuckoo-like report needs a behavior section")
    behavior = doc.get("behavior") or {}
    summary = behavior.get("summary") or {} if isinstance(behavior, dict) else None
    if not isinstance(summary, dict):
        raise MalformedReport("behavior.summary must be an object")
    info = doc.get("info") or {}
    target = (doc.get("target") or {}).get("file") or {}
    sample_id = str(
        target.get("sha256") or target.get("md5") or info.get("id") or target.get("name") or ""
    )
    if not sample_id:
        raise MalformedReport("cannot determine sample id (target.file.sha256 or info.id)")
    events = []
    for key in sorted(summary):
        op = CUCKOO_SUMMARY_OPS.get(key, EventOp.OTHER)
        values = summary[key]
        if not isinstance(values, list):
            continue
        for v in values:
            if isinstance(v, str) and v.strip():
                events.append(SandboxEvent(op, v))
    return SandboxReport(
        sample_id=sample_id,
        sample_name=str(target.get("name") or sample_id),
        os=_guess_os(info),
        events=events,
        source=ReportSource.CUCKOO_LIKE,
    )


def load_report(data, format_hint=None):
    """
    Parse a sandbox report from bytes (or str).

    ``format_hint`` is ``"native"``, ``"cuckoo"`` or None to auto-detect.
    Raises :class:`MalformedReport` carrying a byte offset for JSON errors.
    """
    text = _decode(data)
    hint = (format_hint or "").lower() or None
    if hint not in (None, "native", "cuckoo"):
        raise ValueError(f"unknown report format {format_hint!r}")
    if not text.strip():
        raise MalformedReport("empty report", 0)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        if hint == "cuckoo" or exc.msg != "Extra data":
            raise MalformedReport(f"invalid JSON: {exc.msg}", _byte_offset(text, exc.pos)) from None
        return _native_lines(text)
    if hint == "cuckoo" or (hint is None and isinstance(doc, dict) and "behavior" in doc):
        return _cuckoo(doc)
    if not isinstance(doc, dict):
        raise MalformedReport("report must be a JSON object")
    return _native_wrapper(doc)


@dataclass
class ExtractedSample:
    sample: LabeledSample
    hits: dict
    skipped: int
    unmatched: int


def extract_report(report, label, catalog=None):
    """Like :func:`report_to_sample` but keeps per-location attribution."""
    catalog = catalog or builtin_catalog()
    paths = []
    skipped = 0
    for ev in report.events:
        if ev.op is EventOp.OTHER:
            continue
        try:
            paths.append(parse_path(ev.path))
        except PathError:
            skipped += 1
    ex = catalog.extract(paths)
    sample = LabeledSample(ex.vector.bits, Class.parse(label), report.os, report.sample_name)
    return ExtractedSample(sample, ex.hits, skipped, ex.unmatched)


def report_to_sample(report, label, catalog=None):
    """Feature vector of a report's registry/file events, with label and metadata."""
    return extract_report(report, label, catalog).sample


@dataclass(frozen=True)
class ReputationVerdict:
    sample_id: str
    positives: int
    total: int

    def __post_init__(self):
        if self.total <= 0 or not 0 <= self.positives <= self.total:
            raise ValueError(f"bad verdict {self.positives}/{self.total}")


def label_from_reputation(verdict, threshold=DEFAULT_THRESHOLD):
    """Malware when at least ``threshold`` engines detect the sample."""
    if threshold < 1:
        raise ValueError("threshold must be >= 1")
    return Class.MALWARE if verdict.positives >= threshold else Class.CLEANWARE


class FileReputationSource:
    """Verdicts from a JSON map ``sample_id -> {"positives", "total"}``."""

    def __init__(self, mapping):
        self._verdicts = {
            sid: ReputationVerdict(sid, int(v["positives"]), int(v["total"]))
            for sid, v in mapping.items()
        }

    @classmethod
    def from_file(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls(json.load(fh))

    def lookup(self, sample_id):
        return self._verdicts.get(sample_id)


class HttpReputationSource:
    """
    Fetches ``GET <base_url>/<sample_id>`` returning ``{"positives", "total"}``.
    Only constructed when the examiner passes a URL explicitly.
    """

    def __init__(self, base_url, timeout=10.0, opener=urllib.request.urlopen):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self._open = opener

    def lookup(self, sample_id):
        url = f"{self.base_url}/{urllib.parse.quote(sample_id)}"
        with self._open(url, timeout=self.timeout) as resp:
            body = json.loads(resp.read().decode("utf-8"))
        if not body:
            return None
        return ReputationVerdict(sample_id, int(body["positives"]), int(body["total"]))


def dump_report(report):
    """Serialize a report in the native single-document format."""
    doc = {
        "sample_id": report.sample_id,
        "sample_name": report.sample_name,
        "os": report.os.value,
        "events": [
            {"op": e.op.value, "path": e.path, **({"ts": e.timestamp} if e.timestamp is not None else {})}
            for e in report.events
        ],
    }
    return json.dumps(doc, indent=2) + "\n"
