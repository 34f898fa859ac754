import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lawsde.linalg import (as_matrix, expm, expm_skew2, commutator,
                           is_skew_symmetric, is_orthogonal, commutes_with)

S = np.array([[0.0, -1.0], [1.0, 0.0]])


def taylor_expm(A, terms=30):
    E = np.eye(A.shape[0])
    term = np.eye(A.shape[0])
    for k in range(1, terms):
        term = term @ A / k
        E = E + term
    return E


def test_expm_of_zero_is_exact_identity():
    E = expm(np.zeros((3, 3)))
    assert np.array_equal(E, np.eye(3))


def test_expm_rotation():
    theta = 0.7
    E = expm(theta * S)
    expected = np.array([[np.cos(theta), -np.sin(theta)],
                         [np.sin(theta), np.cos(theta)]])
    np.testing.assert_allclose(E, expected, rtol=0, atol=1e-14)


def test_expm_nilpotent():
    N = np.array([[0.0, 1.0], [0.0, 0.0]])
    np.testing.assert_allclose(expm(N), [[1.0, 1.0], [0.0, 1.0]], atol=1e-15)


def test_expm_matches_taylor_series():
    rng = np.random.default_rng(3)
    for _ in range(10):
        A = rng.standard_normal((4, 4))
        A /= np.linalg.norm(A, 2)
        np.testing.assert_allclose(expm(A), taylor_expm(A), rtol=1e-12, atol=1e-13)


def test_expm_rejects_bad_input():
    with pytest.raises(ValueError):
        expm(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        expm([[np.nan, 0.0], [0.0, 1.0]])
    with pytest.raises(ValueError):
        as_matrix([1.0, 2.0])


def test_expm_overflow():
    with pytest.raises(OverflowError):
        expm([[1000.0]])


def test_expm_skew2():
    A = 2.5 * S
    np.testing.assert_allclose(expm_skew2(A), expm(A), atol=1e-14)
    with pytest.raises(ValueError):
        expm_skew2([[0.0, 1.0], [0.5, 0.0]])
    with pytest.raises(ValueError):
        expm_skew2(np.zeros((3, 3)))


def test_commutator():
    E12 = np.array([[0.0, 1.0], [0.0, 0.0]])
    E21 = np.array([[0.0, 0.0], [1.0, 0.0]])
    np.testing.assert_array_equal(commutator(E12, E21), [[1.0, 0.0], [0.0, -1.0]])
    np.testing.assert_array_equal(commutator(S, 3 * S), np.zeros((2, 2)))
    with pytest.raises(ValueError):
        commutator(np.eye(2), np.eye(3))


def test_structure_predicates():
    assert is_skew_symmetric(S)
    assert not is_skew_symmetric(np.eye(2))
    assert is_orthogonal(expm(0.3 * S))
    assert not is_orthogonal(2 * np.eye(2))
    assert commutes_with(S, np.eye(2))
    assert not commutes_with(S, np.diag([1.0, 2.0]))
    with pytest.raises(ValueError):
        is_skew_symmetric(S, tol=-1.0)


@given(st.floats(min_value=-10.0, max_value=10.0))
@settings(deadline=None)
def test_exponential_of_skew_is_rotation(theta):
    E = expm(theta * S)
    assert is_orthogonal(E, tol=1e-12)
    np.testing.assert_allclose(E, expm_skew2(theta * S), rtol=0, atol=1e-11)


@given(st.integers(min_value=0, max_value=2**32 - 1))
@settings(deadline=None)
def test_commutator_is_antisymmetric(seed):
    rng = np.random.default_rng(seed)
    A, B = rng.standard_normal((2, 3, 3))
    np.testing.assert_array_equal(commutator(A, B), -commutator(B, A))


def commuting_pair(seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((4, 4))
    A *= 2.0 / np.linalg.norm(A, 2)
    return A, 0.5 * A - 0.1 * A @ A


@given(st.integers(min_value=0, max_value=2**32 - 1))
@settings(deadline=None, max_examples=50)
def test_expm_inverse_is_expm_of_negative(seed):
    A, _ = commuting_pair(seed)
    np.testing.assert_allclose(expm(A) @ expm(-A), np.eye(4), rtol=0, atol=1e-11)


@given(st.integers(min_value=0, max_value=2**32 - 1))
@settings(deadline=None, max_examples=50)
def test_expm_of_commuting_sum_factorizes(seed):
    A, B = commuting_pair(seed)
    assert commutes_with(A, B, tol=1e-12)
    E = expm(A + B)
    np.testing.assert_allclose(E, expm(A) @ expm(B), rtol=1e-12, atol=1e-12 * np.abs(E).max())
