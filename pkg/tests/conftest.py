"""Shared fixtures and the acceptance summary printed at the end of a run."""
import pytest

ACCEPTANCE = {}


@pytest.fixture
def report():
    """Record one acceptance line: ``report(n, ok, detail)``."""

    def _report(number, ok, detail):
        ACCEPTANCE[number] = (bool(ok), detail)
        print(f"criterion {number}: {'PASS' if ok else 'FAIL'} | {detail}")

    return _report


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'} | {detail}")
