import numpy as np
import pytest

from metaplectic.wavefunction import Axis, gaussian


@pytest.fixture(scope="session")
def axis():
    """Default experiment grid: N=1024 on [-12, 12)."""
    return Axis.symmetric(12.0, 1024)


@pytest.fixture(scope="session")
def small_axis():
    return Axis.symmetric(10.0, 256)


@pytest.fixture
def ground(axis):
    return gaussian(axis, 1.0)


def rotation_blocks(t):
    return np.array([[np.cos(t), np.sin(t)], [-np.sin(t), np.cos(t)]])


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
