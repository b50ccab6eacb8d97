"""Shared fixtures and the acceptance-criteria result printer."""

from __future__ import annotations

from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"

_acceptance_results: list[tuple[str, str]] = []


@pytest.fixture(scope="session")
def langid_corpora() -> dict[str, list[str]]:
    """Per-language sentence fixtures, split into train/held-out later."""
    out = {}
    for path in sorted((FIXTURES / "langid").glob("*.txt")):
        out[path.stem] = [line for line in
                          path.read_text(encoding="utf-8").splitlines()
                          if line.strip()]
    return out


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    if "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::", 1)[1]
        _acceptance_results.append((name, report.outcome))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance_results:
        word = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{word}  {name}")
