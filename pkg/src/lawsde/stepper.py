"""lawsde stepper module."""
from abc import ABC, abstractmethod
from typing import Optional, Callable, Tuple

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .logger import *
from .utils import *
from .config import Config
from .linalg import expm
from .model import SplitSde

__all__ = ["StepperConfig", "NonConvergenceError", "Stepper"]


class NonConvergenceError(RuntimeError):
    """The fixed-point iteration of an implicit step did not converge."""

    def __init__(self,
                 iterations: int,
                 residual: float,
                 step_index: Optional[int] = None,
    ) -> None:
        self.iterations = iterations
        self.residual = residual
        self.step_index = step_index
        where = "" if step_index is None else f" at step {step_index}"
        super().__init__(f"Fixed-point iteration did not converge{where}: "
                         f"residual {residual:.3e} after {iterations} iterations.")

    def at_step(self, step_index: int) -> "NonConvergenceError":
        """Copy of the error with the step index filled in."""
        return NonConvergenceError(self.iterations, self.residual, step_index)


class StepperConfig:
    """Scheme selection and settings of the implicit solver."""

    def __init__(self,
                 scheme: str = "MFSL",
                 fp_tol: float = DEFAULT_FP_TOL,
                 fp_max_iters: int = DEFAULT_FP_MAX_ITERS,
                 fp_damping: float = 1.0,
    ) -> None:
        """Constructor.

        Args:
            scheme: Name of the scheme. Default: "MFSL".
            fp_tol: Max-norm residual tolerance of the fixed-point iteration.
                Default: DEFAULT_FP_TOL.
            fp_max_iters: Maximum number of fixed-point iterations.
                Default: DEFAULT_FP_MAX_ITERS.
            fp_damping: Damping factor in (0, 1] of the update. Default: 1.0.
        """
        check_scheme(scheme)
        if not fp_tol > 0:
            msg = f"'fp_tol' = {fp_tol} must be positive."
            logger_error(msg)
            raise ValueError(msg)
        if fp_max_iters < 1:
            msg = f"'fp_max_iters' = {fp_max_iters} must be at least 1."
            logger_error(msg)
            raise ValueError(msg)
        if not 0 < fp_damping <= 1:
            msg = f"'fp_damping' = {fp_damping} must lie in (0, 1]."
            logger_error(msg)
            raise ValueError(msg)
        self.scheme = scheme
        self.fp_tol = float(fp_tol)
        self.fp_max_iters = int(fp_max_iters)
        self.fp_damping = float(fp_damping)

    @classmethod
    def from_config(cls, config: Config, scheme: str) -> "StepperConfig":
        """Build the solver settings from the package hyperparameters."""
        return cls(scheme, config["fp_tol"], config["fp_max_iters"],
                   config["fp_damping"])

    def with_scheme(self, scheme: str) -> "StepperConfig":
        """Same solver settings for another scheme."""
        return StepperConfig(scheme, self.fp_tol, self.fp_max_iters, self.fp_damping)

    def __repr__(self) -> str:
        return (f"StepperConfig(scheme={self.scheme!r}, fp_tol={self.fp_tol}, "
                f"fp_max_iters={self.fp_max_iters}, fp_damping={self.fp_damping})")

    def __eq__(self, other) -> bool:
        if not isinstance(other, StepperConfig):
            return NotImplemented
        return (self.scheme, self.fp_tol, self.fp_max_iters, self.fp_damping) == \
               (other.scheme, other.fp_tol, other.fp_max_iters, other.fp_damping)


class Stepper(ABC):
    """Base one-step integrator for a split SDE.

    A stepper is built for one (already resplit) problem and one solver
    configuration. `advance` is pure: the matrix exponentials and the
    preconditioner of a step are locals of that step.
    """

    def __init__(self, p: SplitSde, cfg: StepperConfig) -> None:
        """Constructor.

        Args:
            p: The split SDE the steps are applied to, as given (no resplit).
            cfg: Solver settings.
        """
        self.problem = p
        self.cfg = cfg
        self._active = [m for m in range(p.M + 1) if p.g[m] is not None]
        self._folded = bool(np.any(p.B))

    def step(self, y, dW) -> np.ndarray:
        """Advance the state `y` over one step with increments `dW`."""
        return self.advance(y, dW)[0]

    def advance(self, y, dW) -> Tuple[np.ndarray, int]:
        """Advance the state `y` over one step.

        Args:
            y: Current state, d entries.
            dW: The M + 1 increments of the step, dW[0] being the step size.

        Returns:
            The new state and the number of fixed-point iterations used.
        """
        y = np.asarray(y, dtype=DEFAULT_DTYPE)
        dW = np.asarray(dW, dtype=DEFAULT_DTYPE)
        if dW.shape != (self.problem.M + 1,):
            msg = f"'dW' must hold {self.problem.M + 1} increments, got shape {dW.shape}."
            logger_error(msg)
            raise ValueError(msg)
        return self._advance(y, dW)

    @abstractmethod
    def _advance(self, y: np.ndarray, dW: np.ndarray) -> Tuple[np.ndarray, int]:
        """Scheme specific step."""
        return

    def exponent(self, dW: np.ndarray) -> np.ndarray:
        """Linear exponent sum_m A_m dW_m of a step."""
        return np.tensordot(dW, self.problem.A, axes=1)

    def g_sum(self, x: np.ndarray, dW: np.ndarray) -> np.ndarray:
        """Nonlinear increment sum_m g_m(x) dW_m."""
        total = np.zeros(self.problem.d, dtype=DEFAULT_DTYPE)
        for m in self._active:
            total += self.problem.g[m](x) * dW[m]
        return total

    def preconditioner(self,
                       dW: np.ndarray,
                       weight: float,
                       conjugate: Optional[Tuple[np.ndarray, np.ndarray]] = None,
    ):
        """LU factors of P = I - weight * sum_m B_m dW_m, or None.

        P is the derivative of the implicit equation with respect to the
        linear parts that were folded into the maps.

        Args:
            dW: The increments of the step.
            weight: Weight of the unknown in the implicit equation.
            conjugate: Optional pair (E, E^{-1}); the folded part is then
                replaced by E (sum_m B_m dW_m) E^{-1}. Default: None.

        Returns:
            The LU factorization of P, or None when nothing was folded.
        """
        if not self._folded:
            return None
        J = np.tensordot(dW, self.problem.B, axes=1)
        if not np.any(J):
            return None
        if conjugate is not None:
            J = conjugate[0] @ J @ conjugate[1]
        P = np.eye(self.problem.d) - weight * J
        return lu_factor(P)

    def solve(self,
              phi: Callable[[np.ndarray], np.ndarray],
              y0: np.ndarray,
              lu=None,
    ) -> Tuple[np.ndarray, int]:
        """Solve y = phi(y) by damped, optionally preconditioned, fixed-point iteration.

        The update is y <- y - beta P^{-1} (y - phi(y)). The iteration stops once
        the max-norm of y - phi(y) is at most `fp_tol` and returns the updated
        iterate.

        Args:
            phi: The map whose fixed point is sought.
            y0: Initial guess.
            lu: LU factors of the preconditioner P, or None for P = I.
                Default: None.

        Returns:
            The solution and the number of evaluations of `phi`.
        """
        tol = self.cfg.fp_tol
        beta = self.cfg.fp_damping
        y = y0
        residual = np.inf
        for k in range(1, self.cfg.fp_max_iters + 1):
            r = y - phi(y)
            residual = float(np.max(np.abs(r)))
            if not np.isfinite(residual):
                break
            correction = r if lu is None else lu_solve(lu, r)
            y = y - beta * correction
            if residual <= tol:
                return y, k
        logger_debug(f"{self.cfg.scheme}: no convergence, residual {residual:.3e} "
                     f"after {k} iterations.")
        raise NonConvergenceError(k, residual)

    @staticmethod
    def exponentials(L: np.ndarray, half: bool = False):
        """e^L, and with `half` also e^{L/2} and e^{-L/2}."""
        E = expm(L)
        if not half:
            return E
        return E, expm(0.5 * L), expm(-0.5 * L)
