"""Shared helpers for the test suite.

The acceptance tests report one PASS/FAIL line per criterion; collecting
them here and echoing them in the terminal summary keeps the lines
visible even though pytest captures stdout of passing tests.
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
