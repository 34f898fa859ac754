"""lawsde Config module."""
from typing import Optional, Dict, Any

import os
import sys
import multiprocessing
import numpy as np

from .logger import *
from .utils import *

__all__ = ["Config"]

def init_environment_variables(num_cores: Optional[int] = None):
    """Initializes the environment variables.

    The experiments already run one path per worker thread, so the BLAS
    libraries are kept single threaded unless stated otherwise.

    Args:
        num_cores: The number of cores BLAS may use. If None, it uses a
            single core. Default: None.
    """
    num_cores = 1 if num_cores is None else num_cores
    os.environ.setdefault("MKL_NUM_THREADS", str(num_cores))
    os.environ.setdefault("OMP_NUM_THREADS", str(num_cores))

class Config:
    """Configuration class for the lawsde package.

    This class stores the default solver, validation and parallelism settings
    shared by the steppers, the validators and the experiment drivers."""
    def __init__(self):
        """Constructor."""
        from lawsde import __version__
        self.info = {
            "python_version": sys.version,
            "lawsde_version": __version__,
            "directory": os.getcwd(),
        }
        self.hyperparameters = {
            "num_cores": multiprocessing.cpu_count(),
            "fp_tol": DEFAULT_FP_TOL,
            "fp_max_iters": DEFAULT_FP_MAX_ITERS,
            "fp_damping": 1.0,
            "struct_tol": DEFAULT_STRUCT_TOL,
            "sample_count": DEFAULT_SAMPLE_COUNT,
            "sample_box": DEFAULT_SAMPLE_BOX,
            "memory_budget": DEFAULT_MEMORY_BUDGET,
        }
        init_environment_variables()

    def __str__(self):
        rval = f"\nlawsde hyperparameters:\n---------------\n"
        for key, val in self.hyperparameters.items():
            rval += f" - {key:<24}: {val}\n"
        rval += "\n"
        return rval

    def __getitem__(self, name: str) -> Any:
        if name in self.hyperparameters:
            return self.hyperparameters[name]
        else:
            return None

    def __setitem__(self, name: str, val: Any) -> None:
        if name in self.hyperparameters:
            self.hyperparameters[name] = val
        else:
            msg = f"Hyperparameter {name} is not a valid option."
            logger_error(msg)
            raise NameError(msg)

    def __call__(self) -> Dict[str, Any]:
        return self.hyperparameters

    def set_hyperparameter(self, key: str, value: Any):
        """Helper method to set a hyperparameter.

        Args:
            key: The hyperparameter to set.
            value: The value to set the hyperparameter to.
        """
        self[key] = value
        logger_debug(f"Set hyperparameter {key} = {value}")

    def update(self, values: Dict[str, Any]) -> "Config":
        """Set several hyperparameters at once, skipping None values.

        Args:
            values: A dict with hyperparameter names and values.

        Returns:
            The Config object itself.
        """
        for key, value in values.items():
            if value is not None:
                self.set_hyperparameter(key, value)
        return self

    def check_values(self):
        """Checks validity of hyperparameter values. Raises an error if any
        of the hyperparameters is not valid.
        """
        if not isinstance(self["num_cores"], (int, np.integer)) or self["num_cores"] < 1:
            msg = "'num_cores' hyperparameter must be a positive integer."
            logger_error(msg)
            raise ValueError(msg)
        if not self["fp_tol"] > 0:
            msg = "'fp_tol' hyperparameter must be a positive number."
            logger_error(msg)
            raise ValueError(msg)
        if not isinstance(self["fp_max_iters"], (int, np.integer)) or self["fp_max_iters"] < 1:
            msg = "'fp_max_iters' hyperparameter must be an integer >= 1."
            logger_error(msg)
            raise ValueError(msg)
        if not 0 < self["fp_damping"] <= 1:
            msg = "'fp_damping' hyperparameter must lie in (0, 1]."
            logger_error(msg)
            raise ValueError(msg)
        if self["struct_tol"] < 0:
            msg = "'struct_tol' hyperparameter must be non-negative."
            logger_error(msg)
            raise ValueError(msg)
        if self["sample_count"] < 1 or self["sample_box"] <= 0:
            msg = "'sample_count' and 'sample_box' hyperparameters must be positive."
            logger_error(msg)
            raise ValueError(msg)
        if self["memory_budget"] <= 0:
            msg = "'memory_budget' hyperparameter must be a positive number of bytes."
            logger_error(msg)
            raise ValueError(msg)
