import numpy as np
import pytest

from igeo import FiniteMeasure, SampleSpace
from igeo.oracles import make_rng

# filled by test_acceptance.py, one (criterion, passed, detail) entry per check
ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return make_rng(20240611)


@pytest.fixture
def two_point():
    return SampleSpace([0.5, 0.5])


@pytest.fixture
def three_point():
    return SampleSpace([0.2, 0.3, 0.5])


@pytest.fixture
def skewed(two_point):
    return FiniteMeasure(two_point, np.array([0.5, 1.5]))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in sorted(ACCEPTANCE_LINES, key=lambda r: int(r[0].split()[0])):
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")
