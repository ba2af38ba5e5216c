from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from revhist.fixtures import generate_dump


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance: tests implementing the acceptance criteria"
    )


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One PASS/FAIL line per acceptance criterion at the end of the run."""
    lines = []
    for outcome in ("passed", "failed", "error"):
        for report in terminalreporter.getreports(outcome):
            if "test_acceptance.py::test_criterion" not in report.nodeid:
                continue
            if report.when != "call" and outcome == "passed":
                continue
            name = report.nodeid.split("::")[-1]
            label = name.replace("test_criterion_", "criterion ").replace("_", " ")
            lines.append((name, f"{'PASS' if outcome == 'passed' else 'FAIL'}  {label}"))
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for _, line in sorted(set(lines)):
            terminalreporter.write_line(line)


@pytest.fixture
def make_dump(tmp_path):
    """Factory for deterministic dump fixtures in a temp dir."""

    def _make(name="dump.xml", **kwargs):
        kwargs.setdefault("pages", 3)
        kwargs.setdefault("revisions_per_page", 4)
        kwargs.setdefault("seed", 42)
        path = tmp_path / name
        summary = generate_dump(path, **kwargs)
        return path, summary

    return _make


@pytest.fixture(scope="session")
def shared_tmp(tmp_path_factory):
    return tmp_path_factory.mktemp("shared")
