"""lawsde experiments module.

Drivers for the numerical experiments: common-path strong convergence
sweeps, long-time invariant traces, invariant-deviation order fits and the
FPUT oscillatory-energy statistics. Paths run on a joblib thread pool and are
folded in path-index order, so the results do not depend on scheduling.
"""
from typing import Optional, Sequence, List, Dict, Tuple, Callable, Any

import os
import sys
from time import perf_counter

import numpy as np
import pandas as pd
from scipy import stats
from joblib import Parallel, delayed

from .logger import *
from .utils import *
from .model import SplitSde, InvariantSpec, evaluate_invariant
from .brownian import WienerGrid, path_seed
from .stepper import StepperConfig, NonConvergenceError
from .schemes import Trajectory, integrate
from .problems import FputParams, build_fput, fput_oscillatory_energies

__all__ = [
    "ConvergenceReport",
    "DriftTrace",
    "InvariantOrderReport",
    "EnergyReport",
    "summarize_ci",
    "fit_loglog_slope",
    "check_common_path",
    "exact_tfsl_drift",
    "run_convergence",
    "run_drift_trace",
    "fit_invariant_order",
    "run_fput_energies",
    "write_csv",
]

CI_LEVEL = 0.95
ENERGY_COLUMNS = ["I1", "I2", "I3", "I"]


def summarize_ci(samples) -> Tuple[float, float]:
    """Sample mean and half-width of its 95% confidence interval.

    Uses the normal approximation with the sample standard deviation.

    Args:
        samples: The samples.

    Returns:
        The mean and the half-width z_{0.975} s / sqrt(n).
    """
    samples = np.asarray(samples, dtype=DEFAULT_DTYPE).ravel()
    if samples.size == 0:
        msg = "Cannot summarize an empty sample."
        logger_error(msg)
        raise ValueError(msg)
    mean = float(np.mean(samples))
    if samples.size < 2 or np.ptp(samples) == 0:
        return mean, 0.0
    z = stats.norm.ppf(0.5 + CI_LEVEL / 2)
    half_width = z * np.std(samples, ddof=1) / np.sqrt(samples.size)
    return mean, float(half_width)


def fit_loglog_slope(h, values) -> float:
    """Least-squares slope of log2(values) against log2(h).

    Non-finite and non-positive values are skipped. Returns NaN if fewer than
    two points remain.
    """
    h = np.asarray(h, dtype=DEFAULT_DTYPE)
    values = np.asarray(values, dtype=DEFAULT_DTYPE)
    mask = np.isfinite(values) & (values > 0)
    if np.count_nonzero(mask) < 2:
        return float("nan")
    return float(stats.linregress(np.log2(h[mask]), np.log2(values[mask])).slope)


def _check_levels(levels: Sequence[int]) -> List[int]:
    levels = [int(l) for l in levels]
    if len(levels) == 0 or min(levels) < 0 or sorted(set(levels)) != levels:
        msg = (f"'levels' = {levels} must be a non-empty, strictly increasing "
               f"list of non-negative integers.")
        logger_error(msg)
        raise ValueError(msg)
    return levels


def _run_paths(func: Callable[[int], Any], paths: int, num_cores: int) -> List[Any]:
    """Evaluate `func` for every path index, results in path order."""
    if paths < 1:
        msg = f"'paths' = {paths} must be at least 1."
        logger_error(msg)
        raise ValueError(msg)
    return Parallel(n_jobs=num_cores, prefer="threads")(
        delayed(func)(i) for i in range(paths))


def _scheme_cfgs(schemes: Sequence[str], cfg: Optional[StepperConfig]) -> List[StepperConfig]:
    base = StepperConfig() if cfg is None else cfg
    return [base.with_scheme(s) for s in schemes]


def write_csv(frame: pd.DataFrame, fname) -> None:
    directory = os.path.dirname(os.path.abspath(fname))
    os.makedirs(directory, exist_ok=True)
    frame.to_csv(fname, index=False, float_format=CSV_FLOAT_FORMAT, na_rep="nan")
    logger_info(f"Wrote {fname}.")


def check_common_path(grid: WienerGrid, levels: Sequence[int]) -> bool:
    """Check that every level of `grid` carries the same Brownian path.

    The coarsest view obtained through each level must coincide bit for bit
    with the direct coarsening.
    """
    total = grid.coarsen(0).increments
    return all(np.array_equal(grid.coarsen(l).coarsen(0).increments, total)
               for l in levels)


def _flags(schemes: Sequence[str], failures: np.ndarray) -> List[str]:
    """Per-level marker `scheme:count;...` of the non-converged paths."""
    return [";".join(f"{s}:{int(failures[i, j])}" for i, s in enumerate(schemes)
                     if failures[i, j] > 0)
            for j in range(failures.shape[1])]


class ConvergenceReport:
    """Strong errors E|X(T) - Y_N| per scheme and step size.

    `errors` has shape (paths, schemes, levels); NaN marks a path whose
    scheme or reference run did not converge. Such cells are flagged and left
    out of the slope fits.
    """

    def __init__(self,
                 problem: str,
                 schemes: Sequence[str],
                 levels: Sequence[int],
                 h: np.ndarray,
                 errors: np.ndarray,
    ) -> None:
        self.problem = problem
        self.schemes = list(schemes)
        self.levels = list(levels)
        self.h = np.asarray(h)
        self.errors = errors
        n_schemes, n_levels = len(self.schemes), len(self.levels)
        self.mean = np.full((n_schemes, n_levels), np.nan)
        self.ci = np.full((n_schemes, n_levels), np.nan)
        self.failures = np.isnan(errors).sum(axis=0)
        for i in range(n_schemes):
            for j in range(n_levels):
                ok = errors[:, i, j][~np.isnan(errors[:, i, j])]
                if ok.size > 0:
                    self.mean[i, j], self.ci[i, j] = summarize_ci(ok)
        self.slopes = {s: fit_loglog_slope(self.h[self.failures[i] == 0],
                                           self.mean[i][self.failures[i] == 0])
                       for i, s in enumerate(self.schemes)}

    @property
    def frame(self) -> pd.DataFrame:
        """Table with columns h, e<scheme>, ci<scheme>, ..., flags."""
        data: Dict[str, Any] = {"h": self.h}
        for i, s in enumerate(self.schemes):
            data[f"e{s}"] = self.mean[i]
            data[f"ci{s}"] = self.ci[i]
        data["flags"] = _flags(self.schemes, self.failures)
        return pd.DataFrame(data)

    def to_csv(self, fname) -> None:
        write_csv(self.frame, fname)

    def summary(self) -> str:
        slopes = ", ".join(f"{s}={v:.3f}" for s, v in self.slopes.items())
        return f"{self.problem} convergence slopes: {slopes}"


class InvariantOrderReport:
    """Mean over paths of max_n |I(Y_n) - I(Y_0)| per step size for one scheme."""

    def __init__(self,
                 problem: str,
                 scheme: str,
                 levels: Sequence[int],
                 h: np.ndarray,
                 deviations: np.ndarray,
    ) -> None:
        self.problem = problem
        self.scheme = scheme
        self.levels = list(levels)
        self.h = np.asarray(h)
        self.deviations = deviations
        n_levels = len(self.levels)
        self.mean = np.full(n_levels, np.nan)
        self.ci = np.full(n_levels, np.nan)
        self.failures = np.isnan(deviations).sum(axis=0)
        for j in range(n_levels):
            ok = deviations[:, j][~np.isnan(deviations[:, j])]
            if ok.size > 0:
                self.mean[j], self.ci[j] = summarize_ci(ok)
        ok_levels = self.failures == 0
        self.slope = fit_loglog_slope(self.h[ok_levels], self.mean[ok_levels])

    @property
    def frame(self) -> pd.DataFrame:
        """Table with columns h, dev<scheme>, ci<scheme>, flags."""
        return pd.DataFrame({
            "h": self.h,
            f"dev{self.scheme}": self.mean,
            f"ci{self.scheme}": self.ci,
            "flags": _flags([self.scheme], self.failures[None, :]),
        })

    def to_csv(self, fname) -> None:
        write_csv(self.frame, fname)

    @staticmethod
    def combined_frame(reports: Sequence["InvariantOrderReport"]) -> pd.DataFrame:
        """One table h, dev<S>, ci<S>, ..., flags for reports sharing their levels."""
        frame = pd.DataFrame({"h": reports[0].h})
        flags = [[] for _ in reports[0].levels]
        for r in reports:
            if r.levels != reports[0].levels:
                msg = "Only reports over the same levels can be combined."
                logger_error(msg)
                raise ValueError(msg)
            frame[f"dev{r.scheme}"] = r.mean
            frame[f"ci{r.scheme}"] = r.ci
            for j, flag in enumerate(_flags([r.scheme], r.failures[None, :])):
                if flag:
                    flags[j].append(flag)
        frame["flags"] = [";".join(f) for f in flags]
        return frame

    def summary(self) -> str:
        return (f"{self.problem} {self.scheme} invariant deviation slope: "
                f"{self.slope:.3f} (max mean deviation {np.nanmax(self.mean):.3e})")


class DriftTrace:
    """Trajectories of several schemes on one shared Brownian path."""

    def __init__(self,
                 problem: str,
                 times: np.ndarray,
                 trajectories: Dict[str, Trajectory],
                 invariant: Optional[InvariantSpec] = None,
    ) -> None:
        self.problem = problem
        self.times = times
        self.trajectories = trajectories
        self.invariant = invariant

    @property
    def schemes(self) -> List[str]:
        return list(self.trajectories)

    def truncated(self, scheme: str) -> bool:
        """True if the scheme stopped before the final time."""
        return len(self.trajectories[scheme]) < len(self.times)

    def invariant_values(self, scheme: str) -> np.ndarray:
        """I(Y_n) along the trajectory of `scheme`."""
        if self.invariant is None:
            msg = "This trace has no invariant attached."
            logger_error(msg)
            raise ValueError(msg)
        return self.trajectories[scheme].invariant(self.invariant)

    def max_deviation(self, scheme: str) -> float:
        """max_n |I(Y_n) - I(Y_0)| for `scheme`."""
        values = self.invariant_values(scheme)
        return float(np.max(np.abs(values - values[0])))

    def _padded(self, values: np.ndarray) -> np.ndarray:
        out = np.full((len(self.times),) + values.shape[1:], np.nan)
        out[:values.shape[0]] = values
        return out

    @property
    def frame(self) -> pd.DataFrame:
        """Table with columns t, <scheme>1..<scheme>d for every scheme.

        Truncated trajectories are padded with NaN.
        """
        data: Dict[str, Any] = {"t": self.times}
        for s, traj in self.trajectories.items():
            states = self._padded(traj.states)
            for i in range(states.shape[1]):
                data[f"{s}{i + 1}"] = states[:, i]
        return pd.DataFrame(data)

    @property
    def invariant_frame(self) -> pd.DataFrame:
        """Table with columns t, I<scheme> for every scheme."""
        data: Dict[str, Any] = {"t": self.times}
        for s in self.trajectories:
            data[f"I{s}"] = self._padded(self.invariant_values(s))
        return pd.DataFrame(data)

    def to_csv(self, fname) -> None:
        write_csv(self.frame, fname)

    def summary(self) -> str:
        if self.invariant is None:
            return f"{self.problem} drift trace: {', '.join(self.schemes)}"
        parts = []
        for s in self.schemes:
            mark = " (truncated)" if self.truncated(s) else ""
            parts.append(f"{s}={self.max_deviation(s):.3e}{mark}")
        return f"{self.problem} max invariant deviation: {', '.join(parts)}"


class EnergyReport:
    """Path means of the FPUT oscillatory energies and their weak errors.

    For every scheme: means and sample variances of I_1, I_2, I_3 and their
    sum at each step, and Err_n = max_{t <= t_n} |E(I) - E(I_ref)| against the
    reference scheme on the same set of paths.
    """

    def __init__(self,
                 times: np.ndarray,
                 reference: str,
                 means: Dict[str, np.ndarray],
                 variances: Dict[str, np.ndarray],
                 errors: Dict[str, np.ndarray],
                 failures: Dict[str, int],
    ) -> None:
        self.times = times
        self.reference = reference
        self.means = means
        self.variances = variances
        self.errors = errors
        self.failures = failures

    @property
    def schemes(self) -> List[str]:
        return list(self.errors)

    def frame(self, scheme: str) -> pd.DataFrame:
        """Table t, I1, I2, I3, I, vI1, vI2, vI3, vI of `scheme` (or "ref")."""
        frame = pd.DataFrame(self.means[scheme], columns=ENERGY_COLUMNS)
        variances = pd.DataFrame(self.variances[scheme],
                                 columns=[f"v{c}" for c in ENERGY_COLUMNS])
        frame = pd.concat([frame, variances], axis=1)
        frame.insert(0, "t", self.times)
        return frame

    def error_frame(self, scheme: str) -> pd.DataFrame:
        """Table t, I1, I2, I3, I of the accumulated errors of `scheme`."""
        frame = pd.DataFrame(self.errors[scheme], columns=ENERGY_COLUMNS)
        frame.insert(0, "t", self.times)
        return frame

    def final_error(self, scheme: str, column: str = "I") -> float:
        return float(self.errors[scheme][-1, ENERGY_COLUMNS.index(column)])

    def to_csv(self, fname) -> List[str]:
        """Write `<stem>_<scheme>.csv`, `<stem>_<scheme>_err.csv` and `<stem>_ref.csv`.

        Returns:
            The written file names.
        """
        stem = os.path.splitext(str(fname))[0]
        written = []
        for s in self.schemes:
            write_csv(self.frame(s), f"{stem}_{s}.csv")
            write_csv(self.error_frame(s), f"{stem}_{s}_err.csv")
            written += [f"{stem}_{s}.csv", f"{stem}_{s}_err.csv"]
        write_csv(self.frame("ref"), f"{stem}_ref.csv")
        written.append(f"{stem}_ref.csv")
        return written

    def summary(self) -> str:
        errs = ", ".join(f"{s}={self.final_error(s):.3e}" for s in self.schemes)
        return f"fput final Err_n(I1+I2+I3): {errs}"


def exact_tfsl_drift(p: SplitSde, traj: Trajectory, D=None) -> np.ndarray:
    """Closed-form invariant drift of the trapezoidal full Lawson scheme.

    When only the drift carries a nonlinear map,
    I(Y_n) - I(Y_0) = -1/4 (g_0(Y_n)^T D g_0(Y_n) - g_0(Y_0)^T D g_0(Y_0)) h^2.

    Args:
        p: The split SDE the trajectory was computed for.
        traj: A uniform-step trajectory of the scheme.
        D: Matrix of the quadratic invariant. If None, the identity.
            Default: None.

    Returns:
        The predicted I(Y_n) - I(Y_0) for every n.
    """
    if any(g_m is not None for g_m in p.g[1:]):
        msg = "The closed-form drift needs g_m = 0 for every noise channel."
        logger_error(msg)
        raise ValueError(msg)
    D = np.eye(p.d) if D is None else np.asarray(D, dtype=DEFAULT_DTYPE)
    if len(traj) < 2:
        return np.zeros(len(traj))
    h = traj.times[1] - traj.times[0]
    q = np.array([g @ D @ g for g in (p.nonlinear(0, y) for y in traj.states)])
    return -0.25 * (q - q[0]) * h**2


def run_convergence(p: SplitSde,
                    schemes: Sequence[str],
                    levels: Sequence[int],
                    ref_level: int,
                    ref_scheme: str = "MFSL",
                    paths: int = 20,
                    seed: int = 0,
                    cfg: Optional[StepperConfig] = None,
                    num_cores: int = 1,
                    memory_budget: Optional[int] = None,
                    verbose: int = 0,
) -> ConvergenceReport:
    """Strong convergence sweep on common Brownian paths.

    For each path one grid at `ref_level` is drawn; the reference solution
    and every (scheme, level) run use coarsenings of it. Errors are measured
    at the final time in the Euclidean norm.

    Args:
        p: The split SDE.
        schemes: Scheme names.
        levels: Increasing dyadic levels of the tested step sizes.
        ref_level: Level of the reference solution, larger than all `levels`.
        ref_scheme: Scheme of the reference solution. Default: "MFSL".
        paths: Number of Brownian paths. Default: 20.
        seed: Seed of the experiment. Default: 0.
        cfg: Solver settings (the scheme field is ignored). Default: None.
        num_cores: Number of worker threads. Default: 1.
        memory_budget: Memory budget of each grid in bytes. Default: None.
        verbose: Print progress if > 0. Default: 0.

    Returns:
        The ConvergenceReport.
    """
    schemes = expand_schemes(schemes)
    levels = _check_levels(levels)
    check_scheme(ref_scheme)
    if ref_level <= levels[-1]:
        msg = f"'ref_level' = {ref_level} must be larger than all levels {levels}."
        logger_error(msg)
        raise ValueError(msg)
    cfgs = _scheme_cfgs(schemes, cfg)
    ref_cfg = _scheme_cfgs([ref_scheme], cfg)[0]

    def one_path(index: int) -> np.ndarray:
        grid = WienerGrid.generate(p.t0, p.T, ref_level, p.M,
                                   path_seed(seed, index), memory_budget)
        if not check_common_path(grid, levels):
            msg = f"Path {index}: coarsened increments do not share one path."
            logger_error(msg)
            raise RuntimeError(msg)
        errors = np.full((len(schemes), len(levels)), np.nan)
        try:
            ref = integrate(p, grid, ref_level, ref_cfg).final_state
        except NonConvergenceError as err:
            logger_warning(f"Path {index}: reference {ref_scheme} failed ({err}).")
            return errors
        for i, c in enumerate(cfgs):
            for j, level in enumerate(levels):
                try:
                    y = integrate(p, grid, level, c).final_state
                    errors[i, j] = np.linalg.norm(y - ref)
                except NonConvergenceError as err:
                    logger_warning(f"Path {index}: {c.scheme} at level {level} "
                                   f"flagged ({err}).")
        return errors

    start_time = perf_counter()
    results = _run_paths(one_path, paths, num_cores)
    h = np.array([(p.T - p.t0) / 2**l for l in levels])
    report = ConvergenceReport(p.name, schemes, levels, h, np.stack(results))
    elapsed_time_sec = perf_counter() - start_time
    logger_info(f"Convergence run on {p.name} ({paths} paths) finished in "
                f"{elapsed_time_to_str(elapsed_time_sec)}.")
    if verbose > 0:
        print(report.summary())
        print(f"Elapsed time: {elapsed_time_to_str(elapsed_time_sec)}")
        sys.stdout.flush()
    return report


def run_drift_trace(p: SplitSde,
                    schemes: Sequence[str],
                    level: int,
                    T: Optional[float] = None,
                    seed: int = 0,
                    invariant: Optional[InvariantSpec] = None,
                    cfg: Optional[StepperConfig] = None,
                    num_cores: int = 1,
                    verbose: int = 0,
) -> DriftTrace:
    """Long-time trajectories of several schemes on one shared path.

    A scheme whose implicit solve fails is kept up to the failing step.

    Args:
        p: The split SDE.
        schemes: Scheme names.
        level: Dyadic level of the step size over [t0, T].
        T: Final time. If None, the problem's. Default: None.
        seed: Seed of the path. Default: 0.
        invariant: Invariant monitored along the trajectories. Default: None.
        cfg: Solver settings (the scheme field is ignored). Default: None.
        num_cores: Number of worker threads. Default: 1.
        verbose: Print a summary if > 0. Default: 0.

    Returns:
        The DriftTrace.
    """
    schemes = expand_schemes(schemes)
    if T is not None:
        p = p.with_changes(T=T)
    grid = WienerGrid.generate(p.t0, p.T, level, p.M, seed)
    cfgs = _scheme_cfgs(schemes, cfg)
    trajectories = Parallel(n_jobs=num_cores, prefer="threads")(
        delayed(integrate)(p, grid, level, c, truncate=True) for c in cfgs)
    trace = DriftTrace(p.name, grid.times(), dict(zip(schemes, trajectories)), invariant)
    if verbose > 0:
        print(trace.summary())
        sys.stdout.flush()
    return trace


def fit_invariant_order(p: SplitSde,
                        scheme: str,
                        levels: Sequence[int],
                        paths: int = 20,
                        seed: int = 0,
                        invariant: Optional[InvariantSpec] = None,
                        cfg: Optional[StepperConfig] = None,
                        num_cores: int = 1,
                        verbose: int = 0,
) -> InvariantOrderReport:
    """Order of the invariant deviation max_n |I(Y_n) - I(Y_0)| in the step size.

    Args:
        p: The split SDE.
        scheme: Scheme name.
        levels: Increasing dyadic levels of the step sizes.
        paths: Number of Brownian paths. Default: 20.
        seed: Seed of the experiment. Default: 0.
        invariant: The invariant. If None, x^T x. Default: None.
        cfg: Solver settings (the scheme field is ignored). Default: None.
        num_cores: Number of worker threads. Default: 1.
        verbose: Print a summary if > 0. Default: 0.

    Returns:
        The InvariantOrderReport.
    """
    check_scheme(scheme)
    levels = _check_levels(levels)
    invariant = InvariantSpec.quadratic(np.eye(p.d)) if invariant is None else invariant
    c = _scheme_cfgs([scheme], cfg)[0]

    def one_path(index: int) -> np.ndarray:
        grid = WienerGrid.generate(p.t0, p.T, levels[-1], p.M, path_seed(seed, index))
        deviations = np.full(len(levels), np.nan)
        for j, level in enumerate(levels):
            try:
                values = integrate(p, grid, level, c).invariant(invariant)
                deviations[j] = np.max(np.abs(values - values[0]))
            except NonConvergenceError as err:
                logger_warning(f"Path {index}: {scheme} at level {level} flagged ({err}).")
        return deviations

    results = _run_paths(one_path, paths, num_cores)
    h = np.array([(p.T - p.t0) / 2**l for l in levels])
    report = InvariantOrderReport(p.name, scheme, levels, h, np.stack(results))
    if verbose > 0:
        print(report.summary())
        sys.stdout.flush()
    return report


def run_fput_energies(params: FputParams,
                      schemes: Sequence[str],
                      h: float = 1.0 / 64,
                      T: float = 20.0,
                      paths: int = 10,
                      seed: int = 0,
                      ref: Tuple[str, float] = ("Midpoint", 1.0 / 1024),
                      cfg: Optional[StepperConfig] = None,
                      num_cores: int = 1,
                      verbose: int = 0,
) -> EnergyReport:
    """Mean oscillatory energies of the FPUT chain and their weak errors.

    The run covers N = T/h steps. The Brownian paths live on a dyadic grid
    of 2**k steps of size h (2**k >= N), refined for the reference run, so the
    reference and every scheme share each path.

    Args:
        params: FPUT parameters (the final time is taken from `T`).
        schemes: Scheme names.
        h: Step size of the schemes. Default: 1/64.
        T: Length of the time interval. Must be a multiple of `h`.
            Default: 20.0.
        paths: Number of Brownian paths. Default: 10.
        seed: Seed of the experiment. Default: 0.
        ref: Reference scheme and step size; h/h_ref must be a power of two.
            Default: ("Midpoint", 1/1024).
        cfg: Solver settings (the scheme field is ignored). Default: None.
        num_cores: Number of worker threads. Default: 1.
        verbose: Print a summary if > 0. Default: 0.

    Returns:
        The EnergyReport.
    """
    schemes = expand_schemes(schemes)
    ref_scheme, h_ref = ref
    check_scheme(ref_scheme)
    if not (h > 0 and T > 0 and h_ref > 0):
        msg = f"'h' = {h}, 'T' = {T} and 'h_ref' = {h_ref} must be positive."
        logger_error(msg)
        raise ValueError(msg)
    n_steps = int(round(T / h))
    if n_steps < 1 or not np.isclose(n_steps * h, T, rtol=1e-12, atol=0.0):
        msg = f"'T' = {T} must be a positive multiple of 'h' = {h}."
        logger_error(msg)
        raise ValueError(msg)
    refine = int(round(np.log2(h / h_ref)))
    if refine < 0 or not np.isclose(h_ref * 2**refine, h, rtol=1e-12, atol=0.0):
        msg = f"'h' / 'h_ref' = {h / h_ref} must be a power of two."
        logger_error(msg)
        raise ValueError(msg)
    level = int(np.ceil(np.log2(n_steps)))
    ref_level = level + refine
    stride = 2**refine
    p = build_fput(params).sde.with_changes(T=params.t0 + h * 2**level)
    cfgs = _scheme_cfgs(schemes, cfg)
    ref_cfg = _scheme_cfgs([ref_scheme], cfg)[0]

    def energies(traj: Trajectory) -> np.ndarray:
        E = fput_oscillatory_energies(traj.states, params.omega)
        return np.column_stack([E, E.sum(axis=1)])

    def one_path(index: int):
        grid = WienerGrid.generate(p.t0, p.T, ref_level, p.M, path_seed(seed, index))
        try:
            traj = integrate(p, grid, ref_level, ref_cfg, n_steps=n_steps * stride)
            ref_energies = energies(traj)[::stride]
        except NonConvergenceError as err:
            logger_warning(f"Path {index}: reference {ref_scheme} failed ({err}).")
            ref_energies = None
        results = {}
        for c in cfgs:
            try:
                results[c.scheme] = energies(integrate(p, grid, level, c, n_steps=n_steps))
            except NonConvergenceError as err:
                logger_warning(f"Path {index}: {c.scheme} flagged ({err}).")
                results[c.scheme] = None
        return ref_energies, results

    start_time = perf_counter()
    results = _run_paths(one_path, paths, num_cores)
    times = params.t0 + h * np.arange(n_steps + 1)
    shape = (n_steps + 1, len(ENERGY_COLUMNS))

    def moments(samples: List[np.ndarray]) -> Tuple[np.ndarray, np.ndarray]:
        if len(samples) == 0:
            return np.full(shape, np.nan), np.full(shape, np.nan)
        stack = np.stack(samples)
        var = stack.var(axis=0, ddof=1) if len(samples) > 1 else np.zeros(shape)
        return stack.mean(axis=0), var

    ref_ok = [r for r, _ in results if r is not None]
    means, variances, errors, failures = {}, {}, {}, {}
    means["ref"], variances["ref"] = moments(ref_ok)
    for s in schemes:
        pairs = [(r, res[s]) for r, res in results if r is not None and res[s] is not None]
        failures[s] = paths - len(pairs)
        if failures[s] > 0:
            logger_warning(f"{s}: {failures[s]} of {paths} paths left out.")
        means[s], variances[s] = moments([e for _, e in pairs])
        ref_mean, _ = moments([r for r, _ in pairs])
        errors[s] = np.maximum.accumulate(np.abs(means[s] - ref_mean), axis=0)
    report = EnergyReport(times, ref_scheme, means, variances, errors, failures)
    elapsed_time_sec = perf_counter() - start_time
    logger_info(f"FPUT energy run ({paths} paths) finished in "
                f"{elapsed_time_to_str(elapsed_time_sec)}.")
    if verbose > 0:
        print(report.summary())
        print(f"Elapsed time: {elapsed_time_to_str(elapsed_time_sec)}")
        sys.stdout.flush()
    return report
