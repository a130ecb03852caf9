"""Acceptance reporting for the exporter suite.

Deliberately duplicates the analysis package's helper so the two
packages stay installable and testable independently.
"""

RESULTS = []


def record(number: int, ok: bool, detail: str) -> str:
    line = f"{'PASS' if ok else 'FAIL'} criterion {number:02d}: {detail}"
    RESULTS.append((number, line))
    print(line)
    return line


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(RESULTS):
            terminalreporter.line(line)
