"""Shared pytest hooks.

The acceptance tests in test_acceptance.py each cover one headline guarantee;
the terminal-summary hook below prints one PASS/FAIL line per criterion so the
outcome is readable even when output capture is on.
"""

_ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    detail = dict(report.user_properties).get("detail", "")
    _ACCEPTANCE[report.nodeid] = (report.outcome, detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for nodeid, (outcome, detail) in _ACCEPTANCE.items():
        name = nodeid.split("::")[-1]
        verdict = "PASS" if outcome == "passed" else "FAIL"
        line = f"{verdict} {name}"
        if detail:
            line += f": {detail}"
        terminalreporter.write_line(line)
