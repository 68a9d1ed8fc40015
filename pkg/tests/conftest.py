import numpy as np
import pytest

from qmlab import GridSpec, HarmonicOscillator, InfiniteWell, SystemConfig, solve_stationary


@pytest.fixture(scope="session")
def ho_system():
    return SystemConfig(grid=GridSpec(-10.0, 10.0, 2000))


@pytest.fixture(scope="session")
def ho_pairs(ho_system):
    return solve_stationary(HarmonicOscillator(1.0), ho_system, 6)


@pytest.fixture(scope="session")
def well_system():
    return SystemConfig(grid=GridSpec(0.0, 1.0, 2000))


@pytest.fixture(scope="session")
def well_pairs(well_system):
    return solve_stationary(InfiniteWell(1.0), well_system, 5)


def trapezoid_moment(state, power=1):
    """Plain quadrature moment of |psi|^2, independent of the core operators."""
    x = state.x
    w = np.full(x.size, state.grid.dx)
    w[0] *= 0.5
    w[-1] *= 0.5
    rho = np.abs(state.values) ** 2
    return float(np.sum(w * x**power * rho))
