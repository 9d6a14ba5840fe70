from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from regscope.datagen import fixture

settings.register_profile(
    "regscope", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("regscope")

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def separable():
    return fixture("separable")


@pytest.fixture(scope="session")
def malware_names():
    rows = []
    for line in (DATA / "malware_names.tsv").read_text(encoding="utf-8").splitlines():
        idx, category, name = line.split("\t")
        rows.append((int(idx), category, name))
    return rows


# Acceptance checks append (name, passed, detail) here; the lines are echoed
# in the terminal summary so they survive output capture.
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
