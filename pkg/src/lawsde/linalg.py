"""lawsde linalg module.

Dense small-matrix operations used by the Lawson transformation: the matrix
exponential, commutators and structural predicates. All functions are pure.
"""
import numpy as np
import scipy.linalg

from .logger import *
from .utils import *

__all__ = [
    "as_matrix",
    "expm",
    "expm_skew2",
    "commutator",
    "is_skew_symmetric",
    "is_orthogonal",
    "commutes_with",
]


def as_matrix(A, name: str = "A") -> np.ndarray:
    """Convert `A` into a finite 2-D float array.

    Args:
        A: Array-like object.
        name: Name used in the error messages. Default: "A".

    Returns:
        A new float64 array with the entries of `A`.
    """
    A = np.array(A, dtype=DEFAULT_DTYPE)
    if A.ndim != 2:
        msg = f"'{name}' must be a 2-D matrix, got an array with shape {A.shape}."
        logger_error(msg)
        raise ValueError(msg)
    if not np.all(np.isfinite(A)):
        msg = f"'{name}' contains non-finite entries."
        logger_error(msg)
        raise ValueError(msg)
    return A


def _as_square(A, name: str = "A") -> np.ndarray:
    A = as_matrix(A, name)
    if A.shape[0] != A.shape[1]:
        msg = f"'{name}' must be square, got shape {A.shape}."
        logger_error(msg)
        raise ValueError(msg)
    return A


def expm(A) -> np.ndarray:
    """Compute the matrix exponential e^A.

    Uses the scaling-and-squaring Padé approximant of `scipy.linalg.expm`.
    The exponential of the zero matrix is returned as the exact identity.

    Args:
        A: Square matrix with finite entries.

    Returns:
        The matrix exponential of `A`.
    """
    A = _as_square(A)
    if not np.any(A):
        return np.eye(A.shape[0], dtype=DEFAULT_DTYPE)
    with np.errstate(over="ignore", invalid="ignore"):
        E = scipy.linalg.expm(A)
    if not np.all(np.isfinite(E)):
        msg = (f"Matrix exponential overflowed (max |A| = {np.max(np.abs(A)):.3e}).")
        logger_error(msg)
        raise OverflowError(msg)
    return E


def expm_skew2(A, tol: float = DEFAULT_STRUCT_TOL) -> np.ndarray:
    """Closed-form exponential of a 2x2 skew-symmetric matrix.

    For A = [[0, -a], [a, 0]] the exponential is the planar rotation by the
    angle a.

    Args:
        A: 2x2 skew-symmetric matrix.
        tol: Tolerance of the skew-symmetry check. Default: DEFAULT_STRUCT_TOL.

    Returns:
        The rotation matrix e^A.
    """
    A = _as_square(A)
    if A.shape != (2, 2) or not is_skew_symmetric(A, tol):
        msg = "'expm_skew2' requires a 2x2 skew-symmetric matrix."
        logger_error(msg)
        raise ValueError(msg)
    a = 0.5*(A[1, 0] - A[0, 1])
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, -s], [s, c]], dtype=DEFAULT_DTYPE)


def commutator(A, B) -> np.ndarray:
    """Compute the commutator AB - BA.

    Args:
        A: Square matrix.
        B: Square matrix with the same dimension as `A`.

    Returns:
        The commutator of `A` and `B`.
    """
    A = _as_square(A, "A")
    B = _as_square(B, "B")
    if A.shape != B.shape:
        msg = f"Dimension mismatch in commutator: {A.shape} and {B.shape}."
        logger_error(msg)
        raise ValueError(msg)
    return A @ B - B @ A


def is_skew_symmetric(A, tol: float = DEFAULT_STRUCT_TOL) -> bool:
    """Check whether max|A + A^T| <= tol entrywise."""
    if tol < 0:
        msg = "'tol' must be non-negative."
        logger_error(msg)
        raise ValueError(msg)
    A = _as_square(A)
    return bool(np.max(np.abs(A + A.T), initial=0.0) <= tol)


def is_orthogonal(Q, tol: float = DEFAULT_STRUCT_TOL) -> bool:
    """Check whether max|Q^T Q - I| <= tol entrywise."""
    Q = _as_square(Q, "Q")
    residual = Q.T @ Q - np.eye(Q.shape[0])
    return bool(np.max(np.abs(residual), initial=0.0) <= tol)


def commutes_with(A, D, tol: float = DEFAULT_STRUCT_TOL) -> bool:
    """Check whether max|AD - DA| <= tol entrywise."""
    C = commutator(A, D)
    return bool(np.max(np.abs(C), initial=0.0) <= tol)
