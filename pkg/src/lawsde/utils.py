"""lawsde utilities: constants, scheme names and formatting helpers."""
import numpy as np

from .logger import *

# Define constants
DEFAULT_DTYPE = np.float64
DEFAULT_FP_TOL = 1e-12
DEFAULT_FP_MAX_ITERS = 100
DEFAULT_STRUCT_TOL = 1e-12
DEFAULT_SAMPLE_COUNT = 256
DEFAULT_SAMPLE_BOX = 2.0
DEFAULT_MEMORY_BUDGET = 2**30  # Bytes
TIME_ATOL = 1e-12
CSV_FLOAT_FORMAT = "%.17g"

# Lawson schemes, underlying rules and the exponential Euler half steps
LAWSON_SCHEMES = ["TDSL", "TFSL", "MDSL", "MFSL"]
UNDERLYING_SCHEMES = ["Midpoint", "Trapezoidal"]
HALF_STEP_SCHEMES = ["ExpEulerFwd", "ExpEulerBwd"]
VALID_SCHEMES = LAWSON_SCHEMES + UNDERLYING_SCHEMES + HALF_STEP_SCHEMES
# The schemes compared throughout the numerical experiments (`--schemes all`)
COMPARED_SCHEMES = ["TDSL", "TFSL", "MDSL", "MFSL", "Midpoint"]

# Splitting modes: keep all linear parts, keep only the drift one, keep none
VALID_SPLITTING_MODES = ["full", "drift", "none"]

# Splitting mode and base rule of every scheme
scheme_to_splitting = {"TDSL": "drift",
                       "TFSL": "full",
                       "MDSL": "drift",
                       "MFSL": "full",
                       "Midpoint": "none",
                       "Trapezoidal": "none",
                       "ExpEulerFwd": "full",
                       "ExpEulerBwd": "full",
                       }
scheme_to_rule = {"TDSL": "trapezoidal",
                  "TFSL": "trapezoidal",
                  "MDSL": "midpoint",
                  "MFSL": "midpoint",
                  "Midpoint": "midpoint",
                  "Trapezoidal": "trapezoidal",
                  "ExpEulerFwd": "forward",
                  "ExpEulerBwd": "backward",
                  }

VALID_PROBLEMS = ["kubo", "rigid-body", "fput"]


def check_scheme(scheme: str) -> str:
    """Return `scheme` if it is a known scheme name, raise otherwise.

    Args:
        scheme: Name of the scheme.

    Returns:
        The same name.
    """
    if scheme not in VALID_SCHEMES:
        msg = (f"'scheme' = {scheme} is not a valid scheme.\n"
               f"Valid schemes are: {VALID_SCHEMES}.")
        logger_error(msg)
        raise ValueError(msg)
    return scheme


def expand_schemes(schemes) -> list:
    """Expand a scheme selection into a list of scheme names.

    Args:
        schemes: Either the string "all", a comma separated string or an
            iterable of names.

    Returns:
        The list of scheme names, in the given order and without duplicates.
    """
    if isinstance(schemes, str):
        if schemes.strip().lower() == "all":
            return list(COMPARED_SCHEMES)
        schemes = [s.strip() for s in schemes.split(",") if s.strip()]
    names = []
    for scheme in schemes:
        check_scheme(scheme)
        if scheme not in names:
            names.append(scheme)
    return names


def convert_size_bytes_to_human_readable(size_in_bytes):
    """ Convert the size from bytes to other units like KB, MB or GB.

    Args:
        size_in_bytes: Size in bytes.

    Returns:
        A tuple with the size and its unit: Bytes, KB, MB or GB."""
    if size_in_bytes < 1024:
        return (size_in_bytes, "Bytes")
    elif size_in_bytes < (1024*1024):
        return (np.round(size_in_bytes/1024, 2), "KB")
    elif size_in_bytes < (1024*1024*1024):
        return (np.round(size_in_bytes/(1024*1024), 2), "MB")
    else:
        return (np.round(size_in_bytes/(1024*1024*1024), 2), "GB")


def elapsed_time_to_str(elapsed_time_sec: float) -> str:
    """Convert the elapsed time in seconds to a string with the appropriate units.

    Args:
        elapsed_time_sec: Elapsed time in seconds

    Returns:
        A string with the elapsed time in seconds or minutes.
    """
    if elapsed_time_sec > 60:
        return f"{elapsed_time_sec/60:.2f} minutes"
    else:
        return f"{elapsed_time_sec:.2f} seconds"
