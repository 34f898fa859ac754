"""lawsde package

Stochastic Lawson integrators for split Stratonovich SDEs, invariant monitors
and the highly oscillatory benchmark problems they are tested on.
"""
import sys

from .logger import *
from .config import Config
from .linalg import *
from .brownian import *
from .model import *
from .stepper import *
from .schemes import *
from .problems import *
from .experiments import *

__author__ = """lawsde developers"""

if sys.version_info[:2] >= (3, 8):
    from importlib.metadata import PackageNotFoundError, version  # pragma: no cover
else:
    from importlib_metadata import PackageNotFoundError, version  # pragma: no cover

try:
    # Change here if project is renamed and does not equal the package name
    dist_name = __name__
    __version__ = version(dist_name)
except PackageNotFoundError:  # pragma: no cover
    __version__ = "unknown"
finally:
    del version, PackageNotFoundError

logger_debug("lawsde module initialized.")

def display_info():
    """Display lawsde module information."""
    print("\n" + "-"*33 + " lawsde info " + "-"*34)
    print(__doc__)
    print("Version: " + __version__)
    print("Author: " + __author__)
    print("-"*80)
