import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lawsde import Config, build_problem
from lawsde.model import (SplitSde, InvariantSpec, resplit, evaluate_invariant,
                          validate_commutativity, validate_quadratic_assumptions,
                          validate_linear_assumptions)

S = np.array([[0.0, -1.0], [1.0, 0.0]])


def cubic(x):
    return (x @ x) * (S @ x)


def test_split_sde_properties():
    p = SplitSde([2 * S, S], [cubic, None], [1.0, 0.0], T=2.0, name="toy")
    assert p.d == 2 and p.M == 1
    assert not p.is_linear
    assert p.with_changes(g=[None, None]).is_linear
    np.testing.assert_array_equal(p.nonlinear(1, np.ones(2)), np.zeros(2))
    np.testing.assert_allclose(p.field(0, [1.0, 0.0]), [0.0, 3.0])
    with pytest.raises(ValueError):
        p.A[0, 0, 0] = 1.0


@pytest.mark.parametrize("kwargs", [
    dict(A=[S], g=[None, None], x0=[1.0, 0.0]),
    dict(A=[S, np.eye(3)], g=[None, None], x0=[1.0, 0.0]),
    dict(A=[S], g=[None], x0=[1.0, 0.0, 0.0]),
    dict(A=[S], g=["not callable"], x0=[1.0, 0.0]),
    dict(A=[S], g=[None], x0=[1.0, 0.0], t0=1.0, T=1.0),
])
def test_split_sde_rejects_inconsistent_input(kwargs):
    with pytest.raises(ValueError):
        SplitSde(**kwargs)


def test_resplit_modes(rigid_body):
    p = rigid_body.sde
    assert resplit(p, "full") is p

    q = resplit(p, "drift")
    np.testing.assert_array_equal(q.A[0], p.A[0])
    assert not np.any(q.A[1])
    np.testing.assert_array_equal(q.B[1], p.A[1])
    assert q.g[1] is not None

    q = resplit(p, "none")
    assert not np.any(q.A)
    np.testing.assert_array_equal(q.B, p.A)

    with pytest.raises(ValueError):
        resplit(p, "partial")


def test_resplit_leaves_zero_channels_untouched(kubo):
    p = kubo.sde
    q = resplit(p, "none")
    assert q.g[2] is p.g[2]
    assert not np.any(q.B[2])


def test_invariant_spec():
    quad = InvariantSpec.quadratic(np.diag([1.0, 2.0]))
    assert quad.d == 2
    assert evaluate_invariant(quad, [1.0, 1.0]) == 3.0
    assert isinstance(quad([1.0, 1.0]), float)
    np.testing.assert_allclose(quad(np.array([[1.0, 0.0], [0.0, 1.0]])), [1.0, 2.0])

    lin = InvariantSpec.linear([1.0, -1.0])
    assert lin([3.0, 1.0]) == 2.0

    with pytest.raises(ValueError):
        InvariantSpec.quadratic([[1.0, 1.0], [0.0, 1.0]])
    with pytest.raises(ValueError):
        InvariantSpec("cubic")
    with pytest.raises(ValueError):
        InvariantSpec("quadratic")
    with pytest.raises(ValueError):
        quad([1.0, 2.0, 3.0])


def test_validate_commutativity(rigid_body):
    assert validate_commutativity(rigid_body.sde).passed

    E12 = np.array([[0.0, 1.0], [0.0, 0.0]])
    p = SplitSde([E12, E12.T], [None, None], [1.0, 0.0])
    report = validate_commutativity(p)
    assert not report
    assert report.max_violation["commutativity"] == 1.0
    assert any("[A_0, A_1]" in f for f in report.failures)
    assert "FAIL" in str(report)


def test_validate_quadratic_assumptions(kubo, rigid_body):
    assert validate_quadratic_assumptions(kubo.sde, np.eye(2)).passed
    assert validate_quadratic_assumptions(rigid_body.sde, np.eye(3)).passed

    p = SplitSde([S, np.diag([1.0, 0.0])], [lambda x: x, None], [1.0, 0.0])
    report = validate_quadratic_assumptions(p, np.eye(2))
    assert not report.passed
    assert not report.check_passed("skew-symmetry")
    assert not report.check_passed("tangential-g")
    assert report.check_passed("commutes-with-D")

    report = validate_quadratic_assumptions(SplitSde([S], [None], [1.0, 0.0]),
                                            np.diag([1.0, 2.0]))
    assert not report.check_passed("commutes-with-D")

    with pytest.raises(ValueError):
        validate_quadratic_assumptions(kubo.sde, np.eye(3))


def test_validate_linear_assumptions():
    A = np.array([[0.0, 0.0], [1.0, 0.0]])
    p = SplitSde([A], [lambda x: np.array([0.0, x[0]**2])], [1.0, 0.0])
    report = validate_linear_assumptions(p, [1.0, 0.0])
    assert report.passed
    report = validate_linear_assumptions(p, [0.0, 1.0])
    assert not report.check_passed("null-space")
    assert not report.check_passed("orthogonal-g")


@given(st.lists(st.floats(min_value=-10.0, max_value=10.0), min_size=3, max_size=3),
       st.sampled_from(["drift", "none"]))
@settings(deadline=None, max_examples=50)
def test_resplit_keeps_every_channel_field(x, mode):
    p = build_problem("rigid-body", omega=1.0, sigma=1.0, T=1.0).sde
    q = resplit(p, mode)
    x = np.array(x)
    for m in range(p.M + 1):
        expected = p.field(m, x)
        scale = max(1.0, np.max(np.abs(expected)))
        np.testing.assert_allclose(q.field(m, x), expected, rtol=1e-14, atol=1e-14 * scale)


def test_validators_read_their_settings_from_config(kubo):
    E12 = np.array([[0.0, 1.0], [0.0, 0.0]])
    p = SplitSde([E12, E12.T], [None, None], [1.0, 0.0])
    config = Config()
    config["struct_tol"] = 2.0
    report = validate_commutativity(p, config=config)
    assert report.passed
    assert report.tol == 2.0
    # an explicit tolerance wins over the hyperparameter
    assert not validate_commutativity(p, tol=1e-12, config=config).passed

    config = Config()
    config["sample_count"] = 0
    with pytest.raises(ValueError):
        validate_quadratic_assumptions(kubo.sde, np.eye(2), config=config)
    with pytest.raises(ValueError):
        validate_linear_assumptions(kubo.sde, [1.0, 0.0], config=config)
    assert validate_quadratic_assumptions(kubo.sde, np.eye(2), sample_count=5,
                                          config=config).passed

    config = Config()
    config["sample_box"] = -1.0
    with pytest.raises(ValueError):
        validate_quadratic_assumptions(kubo.sde, np.eye(2), config=config)


def test_mass_conserving_compartments(mass_conserving):
    report = validate_linear_assumptions(mass_conserving, np.ones(3))
    assert report.passed
    assert report.max_violation["null-space"] < 1e-15

    report = validate_linear_assumptions(mass_conserving, [1.0, 1.0, 0.0])
    assert not report.check_passed("null-space")
    assert not report.check_passed("orthogonal-g")
