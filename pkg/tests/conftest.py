import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

# lines appended by test_acceptance.py, printed after the run
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)
