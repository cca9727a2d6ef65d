"""Collects acceptance verdicts and prints one line per criterion at the end."""

ACCEPTANCE_LINES: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES, key=lambda k: (int(k.rstrip("abcdefgh") or 0), k)):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
