"""Shared fixtures plus the per-criterion acceptance report."""

import shutil
from pathlib import Path

import pytest

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures" / "recsys_course"


@pytest.fixture
def fixture_dir() -> Path:
    return FIXTURES


@pytest.fixture
def course_dir(tmp_path: Path) -> Path:
    """Writable copy of the course fixture plus an empty data directory."""
    for name in ("workspace.json", "mini_workspace.json", "kb.json"):
        shutil.copy(FIXTURES / name, tmp_path / name)
    (tmp_path / "data").mkdir()
    return tmp_path


@pytest.fixture
def app_state(course_dir: Path):
    from pvta import AppState, ServiceConfig

    return AppState(
        ServiceConfig(
            workspace_path=course_dir / "workspace.json",
            kb_path=course_dir / "kb.json",
            data_dir=course_dir / "data",
        )
    )


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Print one pass/fail line per acceptance criterion at the end of a run."""
    lines = []
    for outcome in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance.py" not in nodeid:
                continue
            if getattr(report, "when", "call") == "call" or outcome == "error":
                lines.append((nodeid.split("::")[-1], outcome == "passed"))
    if not lines:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name, ok in lines:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}")
