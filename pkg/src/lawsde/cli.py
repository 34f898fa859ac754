"""
Command line front-end of lawsde.

Console script ``lawsde`` (see ``[options.entry_points]`` in ``setup.cfg``)::

    lawsde converge --problem rigid-body --omega 1 --sigma 1 --schemes all \\
        --levels 4..9 --ref-level 12 --paths 20 --seed 7
    lawsde drift --problem kubo --omega 10 --sigma 10 --schemes MFSL,TDSL \\
        --level 5 --T 50 --seed 1
    lawsde invariant-order --problem rigid-body --omega 10 --sigma 0.3 \\
        --schemes TFSL --levels 4..8 --paths 20
    lawsde fput --omega 50 --sigma 0.02 --T 20 --paths 10
    lawsde validate --problem kubo

Every run writes its effective configuration to ``<output>.cfg``; passing that
file back with ``--config`` repeats the run exactly.
"""
from typing import List, Dict, Any

import argparse
import logging
import os
import sys

from lawsde import __version__

from .logger import *
from .utils import *
from .config import Config
from .stepper import StepperConfig, NonConvergenceError
from .problems import FputParams, build_problem
from .model import validate_commutativity, validate_quadratic_assumptions
from .experiments import (run_convergence, run_drift_trace, fit_invariant_order,
                          run_fput_energies, InvariantOrderReport, write_csv)

__all__ = ["RunConfig", "parse_args", "main", "run"]

SUBCOMMANDS = ["converge", "drift", "invariant-order", "fput", "validate"]

EXIT_OK = 0
EXIT_CONFIG_ERROR = 2
EXIT_SOLVER_FAILURE = 3


def parse_levels(text: str) -> List[int]:
    """Parse "4..9" (inclusive range) or "4,5,6" into a list of levels."""
    text = str(text).strip()
    try:
        if ".." in text:
            lo, hi = text.split("..")
            return list(range(int(lo), int(hi) + 1))
        return [int(l) for l in text.split(",") if l.strip()]
    except ValueError:
        msg = f"Cannot parse levels '{text}': use 'a..b' or a comma separated list."
        logger_error(msg)
        raise ValueError(msg)


class RunConfig:
    """Settings of one CLI run, serializable to a flat key=value text file."""

    # Field name -> (converter, default). None defaults are filled per subcommand.
    FIELDS: Dict[str, Any] = {
        "subcommand": (str, None),
        "problem": (str, "rigid-body"),
        "omega": (float, None),
        "sigma": (float, None),
        "T": (float, None),
        "schemes": (str, "all"),
        "levels": (str, "4..9"),
        "ref_level": (int, 12),
        "ref_scheme": (str, None),
        "level": (int, 5),
        "h": (float, 1.0 / 64),
        "h_ref": (float, None),
        "paths": (int, 20),
        "seed": (int, 0),
        "fp_tol": (float, DEFAULT_FP_TOL),
        "fp_max_iters": (int, DEFAULT_FP_MAX_ITERS),
        "threads": (int, None),
        "output": (str, None),
    }

    def __init__(self, **values) -> None:
        self.values: Dict[str, Any] = {}
        for key, (convert, default) in self.FIELDS.items():
            self.values[key] = default
        self.update(values)

    def __getitem__(self, name: str) -> Any:
        return self.values[name]

    def __setitem__(self, name: str, val: Any) -> None:
        name = name.replace("-", "_")
        if name not in self.FIELDS:
            msg = f"Configuration key {name} is not a valid option."
            logger_error(msg)
            raise ValueError(msg)
        convert = self.FIELDS[name][0]
        try:
            self.values[name] = None if val is None else convert(val)
        except ValueError:
            msg = f"Invalid value for configuration key {name}: {val!r}."
            logger_error(msg)
            raise ValueError(msg)

    def update(self, values: Dict[str, Any]) -> "RunConfig":
        """Override the settings with every non-None value of `values`."""
        for key, val in values.items():
            if val is not None:
                self[key] = val
        return self

    @staticmethod
    def read(fname: str) -> Dict[str, str]:
        """Read a key=value file. Blank lines and lines starting with # are skipped."""
        values = {}
        with open(fname) as f:
            for lineno, line in enumerate(f, start=1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    msg = f"{fname}:{lineno}: expected 'key=value', got {line!r}."
                    logger_error(msg)
                    raise ValueError(msg)
                key, val = line.split("=", 1)
                values[key.strip().replace("-", "_")] = val.strip()
        return values

    def to_text(self) -> str:
        lines = [f"# lawsde {__version__} run configuration"]
        for key, val in self.values.items():
            if val is not None:
                lines.append(f"{key}={val!r}" if isinstance(val, float) else f"{key}={val}")
        return "\n".join(lines) + "\n"

    def save(self, fname: str) -> None:
        with open(fname, "w") as f:
            f.write(self.to_text())
        logger_info(f"Saved run configuration to {fname}.")

    def fill_defaults(self) -> "RunConfig":
        """Complete the settings whose default depends on the subcommand."""
        sub = self["subcommand"]
        if sub not in SUBCOMMANDS:
            msg = f"Unknown subcommand {sub}. Valid subcommands are: {SUBCOMMANDS}."
            logger_error(msg)
            raise ValueError(msg)
        if sub == "fput":
            self["problem"] = "fput"
        if self["ref_scheme"] is None:
            self["ref_scheme"] = "Midpoint" if sub == "fput" else "MFSL"
        if self["T"] is None:
            self["T"] = 20.0 if sub == "fput" else 1.0
        if self["h_ref"] is None:
            self["h_ref"] = self["h"] / 16
        if self["threads"] is None:
            self["threads"] = Config()["num_cores"]
        if self["output"] is None:
            self["output"] = f"{sub}.csv"
        return self


def parse_args(args: List[str]) -> argparse.Namespace:
    """Parse command line parameters.

    Args:
        args: Command line parameters as list of strings (e.g. ``["--help"]``).

    Returns:
        Command line parameters namespace. Flags not given are None.
    """
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file with default settings")
    common.add_argument("--problem", help=f"one of {VALID_PROBLEMS}")
    common.add_argument("--omega", type=float, help="drift frequency")
    common.add_argument("--sigma", type=float, help="noise amplitude")
    common.add_argument("--T", type=float, help="final time")
    common.add_argument("--schemes", help="'all' or a comma separated list of schemes")
    common.add_argument("--levels", help="dyadic levels, e.g. 4..9 or 4,6,8")
    common.add_argument("--ref-level", dest="ref_level", type=int,
                        help="dyadic level of the reference solution")
    common.add_argument("--ref-scheme", dest="ref_scheme", help="scheme of the reference solution")
    common.add_argument("--level", type=int, help="dyadic level of a drift trace")
    common.add_argument("--h", type=float, help="step size of the FPUT runs")
    common.add_argument("--h-ref", dest="h_ref", type=float,
                        help="reference step size of the FPUT runs")
    common.add_argument("--paths", type=int, help="number of Brownian paths")
    common.add_argument("--seed", type=int, help="seed of all randomness")
    common.add_argument("--fp-tol", dest="fp_tol", type=float,
                        help="residual tolerance of the implicit solver")
    common.add_argument("--fp-max-iters", dest="fp_max_iters", type=int,
                        help="iteration cap of the implicit solver")
    common.add_argument("--threads", type=int, help="number of worker threads")
    common.add_argument("--output", help="output CSV file")
    common.add_argument("-v", "--verbose", action="store_true", default=False,
                        help="print progress and log to the console")

    parser = argparse.ArgumentParser(
        prog="lawsde",
        description="Stochastic Lawson integrators: convergence and invariant experiments.")
    parser.add_argument("--version", action="version", version=f"lawsde {__version__}")
    subparsers = parser.add_subparsers(dest="subcommand", required=True)
    subparsers.add_parser("converge", parents=[common],
                          help="strong convergence sweep on common paths")
    subparsers.add_parser("drift", parents=[common],
                          help="long-time trajectories and invariant drift on one path")
    subparsers.add_parser("invariant-order", parents=[common],
                          help="order of the invariant deviation in the step size")
    subparsers.add_parser("fput", parents=[common],
                          help="FPUT oscillatory energies and weak errors")
    subparsers.add_parser("validate", parents=[common],
                          help="check the structural assumptions of a problem")
    return parser.parse_args(args)


def build_run_config(ns: argparse.Namespace) -> RunConfig:
    """Merge the config file (if any) and the flags; flags take precedence."""
    cfg = RunConfig()
    if ns.config is not None:
        cfg.update(RunConfig.read(ns.config))
    flags = {k: v for k, v in vars(ns).items() if k in RunConfig.FIELDS}
    cfg.update(flags)
    return cfg.fill_defaults()


def _check_output(fname: str) -> None:
    directory = os.path.dirname(os.path.abspath(fname))
    os.makedirs(directory, exist_ok=True)
    if not os.access(directory, os.W_OK) or os.path.isdir(fname):
        msg = f"Cannot write to output path {fname}."
        logger_error(msg)
        raise OSError(msg)


def package_config(cfg: RunConfig) -> Config:
    """Hyperparameters of the run: the package defaults overridden by `cfg`."""
    config = Config().update({"fp_tol": cfg["fp_tol"],
                              "fp_max_iters": cfg["fp_max_iters"],
                              "num_cores": cfg["threads"]})
    config.check_values()
    return config


def execute(cfg: RunConfig, verbose: int = 0) -> str:
    """Run the subcommand described by `cfg`.

    Returns:
        The one-line summary of the run.
    """
    config = package_config(cfg)
    stepper_cfg = StepperConfig.from_config(config, "MFSL")
    threads = config["num_cores"]
    sub = cfg["subcommand"]
    output = cfg["output"]
    if sub != "validate":
        _check_output(output)
        cfg.save(f"{output}.cfg")

    if sub == "fput":
        options = {k: cfg[k] for k in ("omega", "sigma") if cfg[k] is not None}
        params = FputParams(**options)
        report = run_fput_energies(params, cfg["schemes"], cfg["h"], cfg["T"],
                                   cfg["paths"], cfg["seed"],
                                   (cfg["ref_scheme"], cfg["h_ref"]),
                                   stepper_cfg, threads, verbose)
        report.to_csv(output)
        return report.summary()

    bench = build_problem(cfg["problem"], cfg["omega"], cfg["sigma"], cfg["T"])
    sde = bench.sde
    if sub == "converge":
        report = run_convergence(sde, cfg["schemes"], parse_levels(cfg["levels"]),
                                 cfg["ref_level"], cfg["ref_scheme"], cfg["paths"],
                                 cfg["seed"], stepper_cfg, threads, verbose=verbose)
        report.to_csv(output)
        return report.summary()
    elif sub == "drift":
        trace = run_drift_trace(sde, cfg["schemes"], cfg["level"], cfg["T"], cfg["seed"],
                                bench.invariant, stepper_cfg, threads, verbose)
        trace.to_csv(output)
        if bench.invariant is not None:
            stem = os.path.splitext(output)[0]
            write_csv(trace.invariant_frame, f"{stem}_invariant.csv")
        return trace.summary()
    elif sub == "invariant-order":
        reports = [fit_invariant_order(sde, s, parse_levels(cfg["levels"]), cfg["paths"],
                                       cfg["seed"], bench.invariant, stepper_cfg,
                                       threads, verbose)
                   for s in expand_schemes(cfg["schemes"])]
        write_csv(InvariantOrderReport.combined_frame(reports), output)
        return "; ".join(r.summary() for r in reports)
    else:
        reports = [validate_commutativity(sde, config=config)]
        if bench.invariant is not None:
            reports.append(validate_quadratic_assumptions(sde, bench.invariant.D,
                                                          seed=cfg["seed"], config=config))
        for r in reports:
            print(r)
        status = "pass" if all(r.passed for r in reports) else "FAIL"
        return f"{bench.name} validation: {status}"


def main(args: List[str]) -> int:
    """Wrapper allowing the runs to be called from Python.

    Args:
        args: Command line parameters as list of strings.

    Returns:
        0 on success, 2 on a configuration or output error, 3 when an implicit
        solve fails in a way the experiment cannot flag.
    """
    try:
        ns = parse_args(args)
    except SystemExit as err:
        return int(err.code or 0)
    if ns.verbose:
        logger_enable_console(logging.INFO)
    try:
        cfg = build_run_config(ns)
        logger_info(f"Running lawsde {cfg['subcommand']} with configuration:\n{cfg.to_text()}")
        summary = execute(cfg, verbose=int(ns.verbose))
    except NonConvergenceError as err:
        logger_error(str(err))
        print(f"error: {err}", file=sys.stderr)
        return EXIT_SOLVER_FAILURE
    except (ValueError, OSError, MemoryError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    print(summary)
    sys.stdout.flush()
    return EXIT_OK


def run():
    """Calls :func:`main` passing the CLI arguments extracted from :obj:`sys.argv`.

    This function can be used as entry point to create console scripts with setuptools.
    """
    sys.exit(main(sys.argv[1:]))


if __name__ == "__main__":
    run()
