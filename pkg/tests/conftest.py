from __future__ import annotations

import pytest

# criterion id -> list of (label, passed, detail); filled by test_acceptance
ACCEPTANCE: dict = {}


def record(criterion: int, label: str, passed: bool, detail: str = "") -> None:
    ACCEPTANCE.setdefault(criterion, []).append((label, bool(passed), detail))


@pytest.fixture
def acceptance():
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for crit in sorted(ACCEPTANCE):
        for label, passed, detail in ACCEPTANCE[crit]:
            status = "PASS" if passed else "FAIL"
            suffix = f" - {detail}" if detail else ""
            tr.write_line(f"criterion {crit} [{label}]: {status}{suffix}")
