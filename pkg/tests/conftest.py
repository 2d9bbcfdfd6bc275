import numpy as np
import pytest

from rellich_sobolev.params import derive_constants
from rellich_sobolev.quadrature import QuadratureConfig

ACCEPTANCE_LINES = []


@pytest.fixture
def p5():
    return derive_constants(5, 0.5)


@pytest.fixture
def p6():
    return derive_constants(6, 1.0)


@pytest.fixture
def cfg():
    return QuadratureConfig()


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


def finite_difference(f, x, h, order):
    """Central differences of orders 1 and 2 (five-point stencil)."""
    if order == 1:
        return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h)
    return (-f(x + 2 * h) + 16 * f(x + h) - 30 * f(x) + 16 * f(x - h) - f(x - 2 * h)) / (12 * h * h)


@pytest.fixture
def fd():
    return finite_difference


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
