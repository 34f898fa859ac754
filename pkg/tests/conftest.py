"""
    Shared fixtures of the lawsde test suite.

    Read more about conftest.py under:
    - https://docs.pytest.org/en/stable/fixture.html
"""
import numpy as np
import pytest

from lawsde import (KuboParams, RigidBodyParams, WienerGrid, SplitSde, build_kubo,
                    build_rigid_body, build_problem)


@pytest.fixture
def rigid_body():
    return build_problem("rigid-body", omega=1.0, sigma=1.0, T=1.0)


@pytest.fixture
def stiff_rigid_body():
    return build_rigid_body(RigidBodyParams(omega=10.0, sigma=10.0, T=1.0))


@pytest.fixture
def kubo():
    return build_kubo(KuboParams.example(omega=10.0, sigma=10.0, T=1.0))


@pytest.fixture
def linear_kubo():
    return build_kubo(KuboParams.example(omega=10.0, sigma=10.0, linear=True, T=1.0))


@pytest.fixture
def grid_for():
    """Factory of Brownian grids matching a problem's interval and channels."""
    def make(p, levels, seed=0):
        return WienerGrid.generate(p.t0, p.T, levels, p.M, seed)
    return make


@pytest.fixture
def unit_circle_states():
    rng = np.random.default_rng(11)
    theta = rng.uniform(0.0, 2 * np.pi, size=100)
    return np.column_stack([np.cos(theta), np.sin(theta)])


@pytest.fixture
def mass_conserving():
    """Three compartments exchanging mass: zero column sums in every A_m and
    zero component sums in every g_m, so 1^T x is a linear invariant."""
    A0 = np.array([[-1.0, 0.0, 1.0], [1.0, -1.0, 0.0], [0.0, 1.0, -1.0]])

    def g0(x):
        return 0.5 * x[0] * x[1] * np.array([-1.0, 1.0, 0.0])

    def g1(x):
        return 0.2 * x[0] * x[2] * np.array([0.0, 1.0, -1.0])

    return SplitSde([A0, 0.3 * A0.T], [g0, g1], [0.5, 0.3, 0.2], name="compartments")
