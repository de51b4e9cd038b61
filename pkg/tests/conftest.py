from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[1]
SCENARIOS = ROOT / "scenarios"
DATA = Path(__file__).resolve().parent / "data"

_criteria: list[str] = []


@pytest.fixture
def scenario_path():
    def get(name: str) -> Path:
        return SCENARIOS / name

    return get


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line per acceptance criterion for the summary."""

    class Recorder:
        def __init__(self):
            self.label = None
            self.detail = ""

        def __call__(self, label: str):
            self.label = label
            return self

    rec = Recorder()
    yield rec
    if rec.label is not None:
        _criteria.append(rec)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    rec = item.funcargs.get("criterion") if hasattr(item, "funcargs") else None
    if rec is not None and report.when == "call":
        rec.passed = report.passed


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for rec in sorted(_criteria, key=lambda r: r.label):
        status = "PASS" if getattr(rec, "passed", False) else "FAIL"
        terminalreporter.write_line(f"{status}  {rec.label}  {rec.detail}".rstrip())
