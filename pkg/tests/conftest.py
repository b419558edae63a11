import math

import numpy as np
import pytest

from ellirat import geometry as geo

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def triangle():
    s = math.sqrt(3)
    return geo.HPolytope.from_points([(2, 0), (-1, s), (-1, -s)])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
