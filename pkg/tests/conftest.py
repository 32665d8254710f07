import pytest


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: criterion-level acceptance tests")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One PASS/FAIL line per acceptance criterion at the end of the run."""
    reports = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            if rep.when == "call" and "test_acceptance.py" in rep.nodeid:
                reports.append((rep.nodeid.split("::")[-1], outcome == "passed"))
    if not reports:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name, ok in sorted(reports):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {name}")
