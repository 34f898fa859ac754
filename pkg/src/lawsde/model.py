"""lawsde model module.

Split Stratonovich SDEs

    dX = sum_{m=0}^{M} (A_m X + g_m(X)) o dW_m,    W_0(t) = t,

the freedom of moving linear parts into the nonlinear maps, invariant
definitions and the validators of the structural assumptions the Lawson
schemes rely on.
"""
from typing import Optional, Callable, Sequence, List, Tuple, Dict, Union

import numpy as np

from .logger import *
from .utils import *
from .config import Config
from .linalg import as_matrix, commutator, is_skew_symmetric

__all__ = [
    "SplitSde",
    "InvariantSpec",
    "ValidationReport",
    "resplit",
    "validate_commutativity",
    "validate_quadratic_assumptions",
    "validate_linear_assumptions",
    "evaluate_invariant",
]

StateMap = Callable[[np.ndarray], np.ndarray]


class SplitSde:
    """Split SDE with constant matrices A_0..A_M and state maps g_0..g_M.

    A map given as None stands for g_m = 0 and is never evaluated. The
    matrices `B` record linear parts that were folded into the maps by
    `resplit`; they leave the vector field unchanged and are only used to
    precondition the implicit solvers.
    """

    def __init__(self,
                 A: Sequence,
                 g: Sequence[Optional[StateMap]],
                 x0,
                 t0: float = 0.0,
                 T: float = 1.0,
                 name: str = "sde",
                 B: Optional[Sequence] = None,
    ) -> None:
        """Constructor.

        Args:
            A: The M + 1 matrices A_0..A_M, each of shape (d, d).
            g: The M + 1 maps g_0..g_M (R^d -> R^d) or None for zero maps.
            x0: Initial state with d entries.
            t0: Initial time. Default: 0.0.
            T: Final time. Default: 1.0.
            name: Name of the problem, used in logs and reports. Default: "sde".
            B: Linear parts folded into `g`, same shape as `A`. If None, all
                zero. Default: None.
        """
        if len(A) == 0 or len(A) != len(g):
            msg = (f"'A' and 'g' must both hold M + 1 >= 1 entries, got "
                   f"{len(A)} matrices and {len(g)} maps.")
            logger_error(msg)
            raise ValueError(msg)
        mats = [as_matrix(A_m, f"A_{m}") for m, A_m in enumerate(A)]
        d = mats[0].shape[0]
        for m, A_m in enumerate(mats):
            if A_m.shape != (d, d):
                msg = f"'A_{m}' has shape {A_m.shape}, expected {(d, d)}."
                logger_error(msg)
                raise ValueError(msg)
        for m, g_m in enumerate(g):
            if g_m is not None and not callable(g_m):
                msg = f"'g_{m}' must be callable or None."
                logger_error(msg)
                raise ValueError(msg)
        x0 = np.array(x0, dtype=DEFAULT_DTYPE).reshape(-1)
        if x0.shape != (d,):
            msg = f"'x0' must have {d} entries, got {x0.size}."
            logger_error(msg)
            raise ValueError(msg)
        if not T > t0:
            msg = f"'T' = {T} must be larger than 't0' = {t0}."
            logger_error(msg)
            raise ValueError(msg)

        self.A = np.stack(mats)
        self.A.flags.writeable = False
        self.g: Tuple[Optional[StateMap], ...] = tuple(g)
        if B is None:
            self.B = np.zeros_like(self.A)
        else:
            self.B = np.stack([as_matrix(B_m, f"B_{m}") for m, B_m in enumerate(B)])
            if self.B.shape != self.A.shape:
                msg = f"'B' has shape {self.B.shape}, expected {self.A.shape}."
                logger_error(msg)
                raise ValueError(msg)
        self.B.flags.writeable = False
        x0.flags.writeable = False
        self.x0 = x0
        self.t0 = float(t0)
        self.T = float(T)
        self.name = name

    def __repr__(self) -> str:
        return f"SplitSde(name={self.name!r}, d={self.d}, M={self.M}, t0={self.t0}, T={self.T})"

    @property
    def d(self) -> int:
        """State dimension."""
        return self.A.shape[1]

    @property
    def M(self) -> int:
        """Number of noise channels (channel 0 excluded)."""
        return self.A.shape[0] - 1

    @property
    def is_linear(self) -> bool:
        """True if every nonlinear map is zero."""
        return all(g_m is None for g_m in self.g)

    def with_changes(self, **changes) -> "SplitSde":
        """Return a copy with some constructor arguments replaced."""
        kwargs = dict(A=self.A, g=self.g, x0=self.x0, t0=self.t0, T=self.T,
                      name=self.name, B=self.B)
        kwargs.update(changes)
        return SplitSde(**kwargs)

    def nonlinear(self, m: int, x: np.ndarray) -> np.ndarray:
        """Evaluate g_m(x), zeros for a missing map."""
        if self.g[m] is None:
            return np.zeros(self.d, dtype=DEFAULT_DTYPE)
        return np.asarray(self.g[m](x), dtype=DEFAULT_DTYPE)

    def field(self, m: int, x: np.ndarray) -> np.ndarray:
        """Evaluate the channel-m vector field A_m x + g_m(x)."""
        x = np.asarray(x, dtype=DEFAULT_DTYPE)
        return self.A[m] @ x + self.nonlinear(m, x)


def _fold(A_m: np.ndarray, g_m: Optional[StateMap]) -> StateMap:
    """Map x -> A_m x + g_m(x)."""
    A_m = np.array(A_m)
    if g_m is None:
        def folded(x):
            return A_m @ x
    else:
        def folded(x):
            return A_m @ x + g_m(x)
    return folded


def resplit(p: SplitSde, mode: str) -> SplitSde:
    """Move linear parts of `p` into the nonlinear maps.

    Args:
        p: The split SDE.
        mode: "full" keeps every A_m, "drift" keeps only A_0 and "none" keeps
            no linear part. Channels whose matrix is zero are left untouched.

    Returns:
        A problem with the same vector fields A_m x + g_m(x) for every channel.
    """
    if mode not in VALID_SPLITTING_MODES:
        msg = (f"'mode' = {mode} is not a valid splitting mode.\n"
               f"Valid modes are: {VALID_SPLITTING_MODES}.")
        logger_error(msg)
        raise ValueError(msg)
    if mode == "full":
        return p
    first = 1 if mode == "drift" else 0
    A = np.array(p.A)
    B = np.array(p.B)
    g = list(p.g)
    for m in range(first, p.M + 1):
        if not np.any(A[m]):
            continue
        g[m] = _fold(A[m], g[m])
        B[m] = B[m] + A[m]
        A[m] = 0.0
    return p.with_changes(A=A, g=g, B=B)


class InvariantSpec:
    """Quadratic invariant x^T D x or linear invariant r^T x."""

    def __init__(self,
                 kind: str,
                 D=None,
                 r=None,
                 tol: float = DEFAULT_STRUCT_TOL,
    ) -> None:
        """Constructor.

        Args:
            kind: "quadratic" or "linear".
            D: Symmetric matrix of a quadratic invariant.
            r: Vector of a linear invariant.
            tol: Tolerance of the symmetry check of `D`.
                Default: DEFAULT_STRUCT_TOL.
        """
        if kind == "quadratic":
            if D is None:
                msg = "A quadratic invariant needs the matrix 'D'."
                logger_error(msg)
                raise ValueError(msg)
            D = as_matrix(D, "D")
            if D.shape[0] != D.shape[1] or np.max(np.abs(D - D.T)) > tol:
                msg = "The matrix 'D' of a quadratic invariant must be square and symmetric."
                logger_error(msg)
                raise ValueError(msg)
            self.D: Optional[np.ndarray] = D
            self.r: Optional[np.ndarray] = None
        elif kind == "linear":
            if r is None:
                msg = "A linear invariant needs the vector 'r'."
                logger_error(msg)
                raise ValueError(msg)
            self.D = None
            self.r = np.array(r, dtype=DEFAULT_DTYPE).reshape(-1)
        else:
            msg = f"Unknown invariant kind: {kind}. Use 'quadratic' or 'linear'."
            logger_error(msg)
            raise ValueError(msg)
        self.kind = kind

    @classmethod
    def quadratic(cls, D) -> "InvariantSpec":
        return cls("quadratic", D=D)

    @classmethod
    def linear(cls, r) -> "InvariantSpec":
        return cls("linear", r=r)

    @property
    def d(self) -> int:
        return self.D.shape[0] if self.kind == "quadratic" else self.r.size

    def __repr__(self) -> str:
        return f"InvariantSpec(kind={self.kind!r}, d={self.d})"

    def __call__(self, x) -> Union[float, np.ndarray]:
        return evaluate_invariant(self, x)


def evaluate_invariant(spec: InvariantSpec, x) -> Union[float, np.ndarray]:
    """Evaluate an invariant at a state or along a trajectory.

    Args:
        spec: The invariant.
        x: A state of shape (d,) or states of shape (N, d).

    Returns:
        x^T D x or r^T x; one value per state for 2-D input.
    """
    x = np.asarray(x, dtype=DEFAULT_DTYPE)
    if x.shape[-1] != spec.d:
        msg = f"State dimension {x.shape[-1]} does not match the invariant dimension {spec.d}."
        logger_error(msg)
        raise ValueError(msg)
    if spec.kind == "quadratic":
        values = np.einsum("...i,ij,...j->...", x, spec.D, x)
    else:
        values = x @ spec.r
    return float(values) if np.ndim(values) == 0 else values


class ValidationReport:
    """Outcome of an assumption check.

    Each named check stores its maximum violation; a check passes when the
    violation does not exceed the tolerance.
    """

    def __init__(self, name: str, tol: float) -> None:
        self.name = name
        self.tol = tol
        self.max_violation: Dict[str, float] = {}
        self.failures: List[str] = []

    def record(self, check: str, violation: float, detail: Optional[str] = None) -> None:
        """Record the violation of one check (keeps the maximum)."""
        violation = float(violation)
        previous = self.max_violation.get(check, 0.0)
        self.max_violation[check] = max(previous, violation)
        if violation > self.tol or not np.isfinite(violation):
            self.failures.append(detail if detail is not None else check)

    def check_passed(self, check: str) -> bool:
        return self.max_violation.get(check, 0.0) <= self.tol

    @property
    def passed(self) -> bool:
        return all(self.check_passed(c) for c in self.max_violation)

    def __bool__(self) -> bool:
        return self.passed

    def __str__(self) -> str:
        rval = f"\n{self.name} (tol = {self.tol:.1e}):\n---------------\n"
        for check, val in self.max_violation.items():
            status = "pass" if self.check_passed(check) else "FAIL"
            rval += f" - {check:<24}: {status}  (max violation {val:.3e})\n"
        for failure in self.failures:
            rval += f"   failing: {failure}\n"
        return rval

    def _log(self) -> None:
        if self.passed:
            logger_info(f"{self.name}: all checks passed.")
        else:
            logger_warning(f"{self.name}: {len(self.failures)} failing check(s): "
                           f"{', '.join(self.failures)}.")


def validate_commutativity(p: SplitSde,
                           tol: Optional[float] = None,
                           config: Optional[Config] = None,
) -> ValidationReport:
    """Check that the matrices A_0..A_M commute pairwise.

    Args:
        p: The split SDE.
        tol: Absolute tolerance on the entries of A_l A_k - A_k A_l. If None,
            the "struct_tol" hyperparameter. Default: None.
        config: Hyperparameters supplying the defaults. If None, a fresh
            Config. Default: None.

    Returns:
        A report with the check "commutativity"; every failing pair is listed.
    """
    tol, _, _ = _validation_settings(config, tol, None, None)
    report = ValidationReport(f"Commutativity of {p.name}", tol)
    report.max_violation["commutativity"] = 0.0
    for l in range(p.M + 1):
        for k in range(l + 1, p.M + 1):
            residual = np.max(np.abs(commutator(p.A[l], p.A[k])), initial=0.0)
            report.record("commutativity", residual,
                          f"[A_{l}, A_{k}] (residual {residual:.3e})")
    report._log()
    return report


def _validation_settings(config: Optional[Config],
                         tol: Optional[float],
                         sample_count: Optional[int],
                         box: Optional[float],
) -> Tuple[float, int, float]:
    """Fill the unset validator settings from the hyperparameters."""
    config = Config() if config is None else config
    tol = config["struct_tol"] if tol is None else tol
    sample_count = config["sample_count"] if sample_count is None else sample_count
    box = config["sample_box"] if box is None else box
    if tol < 0 or sample_count < 1 or box <= 0:
        msg = (f"Invalid validator settings: tol = {tol}, sample_count = {sample_count}, "
               f"box = {box}.")
        logger_error(msg)
        raise ValueError(msg)
    return tol, int(sample_count), box


def _sample_states(d: int, sample_count: int, seed: int, box: float) -> np.ndarray:
    """Uniform samples from [-box, box]^d."""
    rng = np.random.default_rng(seed)
    return rng.uniform(-box, box, size=(sample_count, d))


def validate_quadratic_assumptions(p: SplitSde,
                                   D,
                                   tol: Optional[float] = None,
                                   sample_count: Optional[int] = None,
                                   seed: int = 0,
                                   box: Optional[float] = None,
                                   config: Optional[Config] = None,
) -> ValidationReport:
    """Check the assumptions under which x^T D x is a quadratic invariant.

    The checks are: every A_m is skew-symmetric, every A_m commutes with D,
    and x^T D g_m(x) = 0. The last identity is checked at `sample_count`
    uniform random states of [-box, box]^d, relative to the scale
    max(1, |x| |D g_m(x)|) of the product.

    Args:
        p: The split SDE.
        D: Symmetric d x d matrix.
        tol: Tolerance of the checks. If None, the "struct_tol"
            hyperparameter. Default: None.
        sample_count: Number of sampled states. If None, the "sample_count"
            hyperparameter. Default: None.
        seed: Seed of the sampled states. Default: 0.
        box: Half-width of the sampling box. If None, the "sample_box"
            hyperparameter. Default: None.
        config: Hyperparameters supplying the defaults. If None, a fresh
            Config. Default: None.

    Returns:
        A report with the checks "skew-symmetry", "commutes-with-D" and
        "tangential-g".
    """
    tol, sample_count, box = _validation_settings(config, tol, sample_count, box)
    D = InvariantSpec.quadratic(D).D
    if D.shape != (p.d, p.d):
        msg = f"'D' has shape {D.shape}, expected {(p.d, p.d)}."
        logger_error(msg)
        raise ValueError(msg)
    report = ValidationReport(f"Quadratic invariant assumptions of {p.name}", tol)
    for check in ("skew-symmetry", "commutes-with-D", "tangential-g"):
        report.max_violation[check] = 0.0
    for m in range(p.M + 1):
        skew = np.max(np.abs(p.A[m] + p.A[m].T), initial=0.0)
        report.record("skew-symmetry", skew, f"A_{m} is not skew-symmetric ({skew:.3e})")
        comm = np.max(np.abs(commutator(p.A[m], D)), initial=0.0)
        report.record("commutes-with-D", comm, f"A_{m} does not commute with D ({comm:.3e})")

    states = _sample_states(p.d, sample_count, seed, box)
    for m in range(p.M + 1):
        if p.g[m] is None:
            continue
        worst = 0.0
        for x in states:
            Dg = D @ p.nonlinear(m, x)
            scale = max(1.0, np.linalg.norm(x) * np.linalg.norm(Dg))
            worst = max(worst, abs(x @ Dg) / scale)
        report.record("tangential-g", worst, f"x^T D g_{m}(x) != 0 ({worst:.3e})")
    report._log()
    return report


def validate_linear_assumptions(p: SplitSde,
                                r,
                                tol: Optional[float] = None,
                                sample_count: Optional[int] = None,
                                seed: int = 0,
                                box: Optional[float] = None,
                                config: Optional[Config] = None,
) -> ValidationReport:
    """Check the assumptions under which r^T x is a linear invariant.

    The checks are r^T A_m = 0 for every channel and r^T g_m(x) = 0 at
    sampled states (relative to max(1, |r| |g_m(x)|)).

    Args:
        p: The split SDE.
        r: Vector with d entries.
        tol: Tolerance of the checks. If None, the "struct_tol"
            hyperparameter. Default: None.
        sample_count: Number of sampled states. If None, the "sample_count"
            hyperparameter. Default: None.
        seed: Seed of the sampled states. Default: 0.
        box: Half-width of the sampling box. If None, the "sample_box"
            hyperparameter. Default: None.
        config: Hyperparameters supplying the defaults. If None, a fresh
            Config. Default: None.

    Returns:
        A report with the checks "null-space" and "orthogonal-g".
    """
    tol, sample_count, box = _validation_settings(config, tol, sample_count, box)
    r = InvariantSpec.linear(r).r
    if r.shape != (p.d,):
        msg = f"'r' has {r.size} entries, expected {p.d}."
        logger_error(msg)
        raise ValueError(msg)
    report = ValidationReport(f"Linear invariant assumptions of {p.name}", tol)
    for check in ("null-space", "orthogonal-g"):
        report.max_violation[check] = 0.0
    for m in range(p.M + 1):
        viol = np.max(np.abs(r @ p.A[m]), initial=0.0)
        report.record("null-space", viol, f"r^T A_{m} != 0 ({viol:.3e})")

    states = _sample_states(p.d, sample_count, seed, box)
    r_norm = np.linalg.norm(r)
    for m in range(p.M + 1):
        if p.g[m] is None:
            continue
        worst = 0.0
        for x in states:
            g_x = p.nonlinear(m, x)
            scale = max(1.0, r_norm * np.linalg.norm(g_x))
            worst = max(worst, abs(r @ g_x) / scale)
        report.record("orthogonal-g", worst, f"r^T g_{m}(x) != 0 ({worst:.3e})")
    report._log()
    return report
