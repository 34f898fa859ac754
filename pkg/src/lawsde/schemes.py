"""lawsde schemes module.

One-step integrators for split SDEs. The Lawson rules act on the problem as
split; the underlying implicit midpoint and trapezoidal rules are the same
rules applied after moving every linear part into the nonlinear maps, and
the drift (DSL) variants keep only the linear drift part in the exponential.
"""
from typing import Optional, Tuple, Dict, Type

import sys
from time import perf_counter

import numpy as np
import pandas as pd

from .logger import *
from .utils import *
from .model import SplitSde, InvariantSpec, resplit, evaluate_invariant
from .brownian import WienerGrid
from .stepper import Stepper, StepperConfig, NonConvergenceError

__all__ = [
    "TrapezoidalLawsonStepper",
    "MidpointLawsonStepper",
    "ExpEulerFwdStepper",
    "ExpEulerBwdStepper",
    "Trajectory",
    "make_stepper",
    "step_midpoint",
    "step_trapezoidal",
    "step_lawson_trapezoidal",
    "step_lawson_midpoint",
    "step_exp_euler_fwd",
    "step_exp_euler_bwd",
    "integrate",
]


class TrapezoidalLawsonStepper(Stepper):
    """Trapezoidal Lawson rule.

    Y1 = E Y + 1/2 sum_m (E g_m(Y) + g_m(Y1)) dW_m,  E = exp(sum_m A_m dW_m).
    """

    def _advance(self, y: np.ndarray, dW: np.ndarray) -> Tuple[np.ndarray, int]:
        E = self.exponentials(self.exponent(dW))
        base = E @ y
        if not self._active:
            return base, 0
        c = base + 0.5 * (E @ self.g_sum(y, dW))
        lu = self.preconditioner(dW, 0.5)
        return self.solve(lambda z: c + 0.5 * self.g_sum(z, dW), base, lu)


class MidpointLawsonStepper(Stepper):
    """Midpoint Lawson rule.

    Y1 = E Y + E_h sum_m g_m((E_h Y + E_h^{-1} Y1)/2) dW_m, with E_h = exp(L/2).
    """

    def _advance(self, y: np.ndarray, dW: np.ndarray) -> Tuple[np.ndarray, int]:
        E, Eh, Eh_inv = self.exponentials(self.exponent(dW), half=True)
        base = E @ y
        if not self._active:
            return base, 0
        a = Eh @ y

        def phi(z):
            return base + Eh @ self.g_sum(0.5 * (a + Eh_inv @ z), dW)

        lu = self.preconditioner(dW, 0.5, conjugate=(Eh, Eh_inv))
        return self.solve(phi, base, lu)


class ExpEulerFwdStepper(Stepper):
    """Explicit exponential Euler step: E (Y + sum_m g_m(Y) dW_m)."""

    def _advance(self, y: np.ndarray, dW: np.ndarray) -> Tuple[np.ndarray, int]:
        E = self.exponentials(self.exponent(dW))
        if not self._active:
            return E @ y, 0
        return E @ (y + self.g_sum(y, dW)), 0


class ExpEulerBwdStepper(Stepper):
    """Implicit exponential Euler step: Y1 = E Y + sum_m g_m(Y1) dW_m."""

    def _advance(self, y: np.ndarray, dW: np.ndarray) -> Tuple[np.ndarray, int]:
        E = self.exponentials(self.exponent(dW))
        base = E @ y
        if not self._active:
            return base, 0
        lu = self.preconditioner(dW, 1.0)
        return self.solve(lambda z: base + self.g_sum(z, dW), base, lu)


rule_to_stepper: Dict[str, Type[Stepper]] = {
    "trapezoidal": TrapezoidalLawsonStepper,
    "midpoint": MidpointLawsonStepper,
    "forward": ExpEulerFwdStepper,
    "backward": ExpEulerBwdStepper,
}


def make_stepper(p: SplitSde, cfg: StepperConfig) -> Stepper:
    """Build the stepper of `cfg.scheme` for `p`, resplitting it as the scheme requires.

    Args:
        p: The split SDE as given (full splitting).
        cfg: Solver settings and scheme.

    Returns:
        The stepper.
    """
    scheme = check_scheme(cfg.scheme)
    q = resplit(p, scheme_to_splitting[scheme])
    return rule_to_stepper[scheme_to_rule[scheme]](q, cfg)


def _solver_cfg(cfg: Optional[StepperConfig], scheme: str) -> StepperConfig:
    return StepperConfig(scheme) if cfg is None else cfg.with_scheme(scheme)


def step_midpoint(p: SplitSde, y, dW, cfg: Optional[StepperConfig] = None) -> np.ndarray:
    """One step of the implicit midpoint rule on the untransformed field.

    Y1 = Y + sum_m f_m((Y + Y1)/2) dW_m with f_m(x) = A_m x + g_m(x).

    Args:
        p: The split SDE.
        y: Current state.
        dW: The M + 1 increments, dW[0] being the step size.
        cfg: Solver settings; the scheme field is ignored. If None, defaults.
            Default: None.

    Returns:
        The new state.
    """
    cfg = _solver_cfg(cfg, "Midpoint")
    return MidpointLawsonStepper(resplit(p, "none"), cfg).step(y, dW)


def step_trapezoidal(p: SplitSde, y, dW, cfg: Optional[StepperConfig] = None) -> np.ndarray:
    """One step of the trapezoidal rule on the untransformed field.

    Y1 = Y + 1/2 sum_m (f_m(Y) + f_m(Y1)) dW_m with f_m(x) = A_m x + g_m(x).
    Arguments as in `step_midpoint`.
    """
    cfg = _solver_cfg(cfg, "Trapezoidal")
    return TrapezoidalLawsonStepper(resplit(p, "none"), cfg).step(y, dW)


def step_lawson_trapezoidal(p: SplitSde, y, dW, cfg: Optional[StepperConfig] = None) -> np.ndarray:
    """One step of the trapezoidal Lawson rule with the splitting of `p` as given."""
    cfg = _solver_cfg(cfg, "TFSL")
    return TrapezoidalLawsonStepper(p, cfg).step(y, dW)


def step_lawson_midpoint(p: SplitSde, y, dW, cfg: Optional[StepperConfig] = None) -> np.ndarray:
    """One step of the midpoint Lawson rule with the splitting of `p` as given."""
    cfg = _solver_cfg(cfg, "MFSL")
    return MidpointLawsonStepper(p, cfg).step(y, dW)


def step_exp_euler_fwd(p: SplitSde, y, dW, cfg: Optional[StepperConfig] = None) -> np.ndarray:
    """Explicit exponential Euler step with the increments as given."""
    cfg = _solver_cfg(cfg, "ExpEulerFwd")
    return ExpEulerFwdStepper(p, cfg).step(y, dW)


def step_exp_euler_bwd(p: SplitSde, y, dW, cfg: Optional[StepperConfig] = None) -> np.ndarray:
    """Implicit exponential Euler step with the increments as given."""
    cfg = _solver_cfg(cfg, "ExpEulerBwd")
    return ExpEulerBwdStepper(p, cfg).step(y, dW)


class Trajectory:
    """Numerical solution Y_0..Y_N on a uniform grid."""

    def __init__(self,
                 times: np.ndarray,
                 states: np.ndarray,
                 solver_stats: np.ndarray,
                 scheme: str = "",
    ) -> None:
        """Constructor.

        Args:
            times: The N + 1 grid times, strictly increasing.
            states: Array of shape (N + 1, d).
            solver_stats: Fixed-point iterations of each of the N steps.
            scheme: Name of the scheme that produced the trajectory.
        """
        self.times = times
        self.states = states
        self.solver_stats = solver_stats
        self.scheme = scheme

    def __len__(self) -> int:
        return self.states.shape[0]

    def __repr__(self) -> str:
        return (f"Trajectory(scheme={self.scheme!r}, steps={len(self) - 1}, "
                f"d={self.states.shape[1]})")

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    def invariant(self, spec: InvariantSpec) -> np.ndarray:
        """Values of an invariant at every grid time."""
        return evaluate_invariant(spec, self.states)

    def to_frame(self, prefix: Optional[str] = None) -> pd.DataFrame:
        """DataFrame with the time column `t` and one column per component.

        Args:
            prefix: Column prefix of the components. If None, the scheme name.
                Default: None.
        """
        prefix = self.scheme if prefix is None else prefix
        columns = [f"{prefix}{i + 1}" for i in range(self.states.shape[1])]
        frame = pd.DataFrame(self.states, columns=columns)
        frame.insert(0, "t", self.times)
        return frame


def integrate(p: SplitSde,
              grid: WienerGrid,
              level: Optional[int] = None,
              cfg: Optional[StepperConfig] = None,
              n_steps: Optional[int] = None,
              truncate: bool = False,
              verbose: int = 0,
) -> Trajectory:
    """Integrate `p` with the scheme of `cfg` over the grid coarsened to `level`.

    The scheme's splitting is applied first (see `make_stepper`).

    Args:
        p: The split SDE. Its time interval must match the grid's.
        grid: The Brownian increments.
        level: Dyadic level of the step size. If None, the grid's own level.
            Default: None.
        cfg: Scheme and solver settings. If None, MFSL with the default
            solver settings. Default: None.
        n_steps: Only take the first `n_steps` steps of the grid. If None, all
            2**level steps. Default: None.
        truncate: On a failed step, return the trajectory computed so far
            instead of raising. Default: False.
        verbose: Print the elapsed time if > 0. Default: 0.

    Returns:
        The trajectory with n_steps + 1 (by default 2**level + 1) states.
    """
    cfg = StepperConfig() if cfg is None else cfg
    level = grid.levels if level is None else level
    if grid.M != p.M:
        msg = f"The grid has {grid.M} noise channels but {p!r} needs {p.M}."
        logger_error(msg)
        raise ValueError(msg)
    if not (np.isclose(grid.t0, p.t0, rtol=0.0, atol=TIME_ATOL)
            and np.isclose(grid.T, p.T, rtol=0.0, atol=TIME_ATOL)):
        msg = (f"The grid interval [{grid.t0}, {grid.T}] does not match the "
               f"problem interval [{p.t0}, {p.T}].")
        logger_error(msg)
        raise ValueError(msg)
    dW = grid.dW(level)
    n_steps = dW.shape[1] if n_steps is None else n_steps
    if n_steps < 0 or n_steps > dW.shape[1]:
        msg = f"'n_steps' = {n_steps} must lie in [0, {dW.shape[1]}]."
        logger_error(msg)
        raise ValueError(msg)

    start_time = perf_counter()
    stepper = make_stepper(p, cfg)
    times = grid.times(level)[:n_steps + 1]
    states = np.empty((n_steps + 1, p.d), dtype=DEFAULT_DTYPE)
    stats = np.zeros(n_steps, dtype=np.int64)
    states[0] = p.x0
    for n in range(n_steps):
        try:
            states[n + 1], stats[n] = stepper.advance(states[n], dW[:, n])
        except NonConvergenceError as err:
            if truncate:
                logger_warning(f"{cfg.scheme} on {p.name}: step {n} did not "
                               f"converge, trajectory truncated at t = {times[n]:.6g}.")
                return Trajectory(times[:n + 1], states[:n + 1], stats[:n], cfg.scheme)
            logger_debug(f"{cfg.scheme} on {p.name}: step {n} of {n_steps} failed.")
            raise err.at_step(n) from err
    elapsed_time_sec = perf_counter() - start_time
    if verbose > 0:
        print(f"{cfg.scheme}: {n_steps} steps in {elapsed_time_to_str(elapsed_time_sec)}")
        sys.stdout.flush()
    return Trajectory(times, states, stats, cfg.scheme)
