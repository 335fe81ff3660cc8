import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

# acceptance tests append (criterion, passed, detail) here; printed at session end
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in sorted(ACCEPTANCE_LINES, key=lambda x: int(x[0][2:])):
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'} {name}: {detail}")
