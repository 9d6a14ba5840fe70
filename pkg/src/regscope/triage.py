"""Examiner-facing report for one classified case."""

import json
from dataclasses import dataclass

from .catalog import builtin_catalog
from .dataset import Class
from .ingest import extract_report
from .ml.model import predict

# Locations most indicative across all malware families are listed first.
PRIORITY = (17, 18)


@dataclass
class FiredLocation:
    id: int
    pattern: str
    example: str


@dataclass
class TriageReport:
    sample_name: str
    label: Class
    probabilities: dict
    fired: list
    skipped_events: int
    unmatched_events: int
    model_id: str
    model_kind: str
    catalog_version: str

    def to_dict(self):
        return {
            "sample_name": self.sample_name,
            "predicted": {"label": int(self.label), "class": self.label.name.lower()},
            "probabilities": {c.name.lower(): p for c, p in self.probabilities.items()},
            "fired_locations": [
                {"id": f"P{f.id}", "pattern": f.pattern, "example": f.example} for f in self.fired
            ],
            "skipped_events": self.skipped_events,
            "unmatched_events": self.unmatched_events,
            "model_id": self.model_id,
            "model_kind": self.model_kind,
            "catalog_version": self.catalog_version,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    def to_text(self):
        probs = ", ".join(f"{c.name.lower()} {p:.3f}" for c, p in self.probabilities.items())
        lines = [
            f"sample:      {self.sample_name}",
            f"prediction:  {self.label.name.lower()} ({int(self.label)})",
            f"probability: {probs}",
        ]
        if self.fired:
            lines.append(f"fired locations ({len(self.fired)}):")
            for f in self.fired:
                lines.append(f"  P{f.id:<3} {f.pattern}")
                lines.append(f"       e.g. {f.example}")
        else:
            lines.append("no catalog locations fired; prediction is the model's zero-vector answer")
        lines.append(
            f"events skipped (unparseable): {self.skipped_events}, "
            f"outside catalog: {self.unmatched_events}"
        )
        lines.append(f"model: {self.model_id} ({self.model_kind})  catalog: {self.catalog_version}")
        return "\n".join(lines)


def _order(loc_id):
    return (PRIORITY.index(loc_id), 0) if loc_id in PRIORITY else (len(PRIORITY), loc_id)


def triage(model, report, catalog=None):
    """Classify a sandbox report and collect the evidence behind it."""
    catalog = catalog or builtin_catalog()
    ex = extract_report(report, Class.CLEANWARE, catalog)
    pred = predict(model, ex.sample.features)
    fired = [
        FiredLocation(i, catalog.by_id[i].raw, ex.hits[i].raw or str(ex.hits[i]))
        for i in sorted(ex.hits, key=_order)
        if i <= len(ex.sample.features)
    ]
    return TriageReport(
        sample_name=report.sample_name,
        label=pred.label,
        probabilities=pred.probabilities,
        fired=fired,
        skipped_events=ex.skipped,
        unmatched_events=ex.unmatched,
        model_id=model.model_id,
        model_kind=model.kind,
        catalog_version=catalog.version,
    )
