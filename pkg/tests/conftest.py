import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from rpslab.spectral import Field, Grid

settings.register_profile("rpslab", deadline=None, max_examples=30, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("rpslab")


@pytest.fixture
def grid():
    return Grid(20.0, 2**11)


@pytest.fixture
def gaussian(grid):
    return Field.from_function(grid, lambda x: np.exp(-(x**2)))


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
