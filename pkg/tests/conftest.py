import math

import pytest

from mindisc.analytic import StatePair

ALPHA_GRID = (math.pi / 32, math.pi / 16, math.pi / 8, 3 * math.pi / 16, 7 * math.pi / 32)

_acceptance_lines = []


@pytest.fixture
def pair8():
    return StatePair(math.pi / 8)


@pytest.fixture
def report_criterion():
    """Record one PASS/FAIL line per acceptance criterion for the terminal summary."""

    def _report(number, passed, detail):
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'} - {detail}"
        _acceptance_lines.append(line)
        print(line)
        return passed

    return _report


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_acceptance_lines):
            terminalreporter.write_line(line)
