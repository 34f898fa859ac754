"""lawsde brownian module.

Reproducible Brownian increments on a dyadic grid. Increments are stored at
the finest level only and every coarser view is obtained by pairwise sums, so
all step sizes of an experiment see the same underlying path.
"""
from typing import Optional, Union

import os

import numpy as np
from scipy.special import ndtri
from pympler import asizeof

from .logger import *
from .utils import *
from .config import Config

__all__ = ["WienerGrid", "generate", "coarsen", "path_seed"]

GRID_MAGIC = b"LAWSDEWG"
GRID_HEADER_DTYPE = np.dtype([
    ("magic", "S8"),
    ("t0", "<f8"),
    ("T", "<f8"),
    ("levels", "<i8"),
    ("M", "<i8"),
    ("seed", "<u8"),
    ("source_levels", "<i8"),
])

_PHILOX_BLOCK = 4  # 64-bit words produced per Philox counter value
_UNIT_SCALE = 2.0**-53


def _channel_key(seed: int, channel: int) -> np.ndarray:
    """Philox key of a noise channel."""
    return np.random.SeedSequence([seed, channel]).generate_state(2, dtype=np.uint64)


def _raw_block(key: np.ndarray, start: int, count: int) -> np.ndarray:
    """Raw 64-bit words `start`, ..., `start + count - 1` of a keyed stream."""
    block, offset = divmod(start, _PHILOX_BLOCK)
    counter = np.array([block, 0, 0, 0], dtype=np.uint64)
    bitgen = np.random.Philox(key=key, counter=counter)
    return bitgen.random_raw(offset + count)[offset:]


def _standard_normal(raw: np.ndarray) -> np.ndarray:
    """Map raw 64-bit words to standard normal samples by inverse CDF."""
    u = ((raw >> np.uint64(11)).astype(DEFAULT_DTYPE) + 0.5) * _UNIT_SCALE
    return ndtri(u)


def _coarsen_pairwise(x: np.ndarray, steps: int) -> np.ndarray:
    """Halve the last axis of `x` `steps` times by summing neighbour pairs."""
    for _ in range(steps):
        x = x[..., 0::2] + x[..., 1::2]
    return x


class WienerGrid:
    """Brownian increments of M channels on a uniform dyadic grid.

    The grid over [t0, T] has 2**levels steps. Channel 0 is the deterministic
    channel W_0(t) = t whose increments equal the step size; it is never
    stored. Instances are treated as immutable.
    """

    def __init__(self,
                 t0: float,
                 T: float,
                 levels: int,
                 M: int,
                 seed: int,
                 increments: np.ndarray,
                 source_levels: Optional[int] = None,
    ) -> None:
        """Constructor.

        Args:
            t0: Initial time.
            T: Final time.
            levels: Dyadic exponent of the grid (2**levels steps).
            M: Number of noise channels.
            seed: Seed the increments were generated from.
            increments: Array of shape (M, 2**levels) with the increments of
                channels 1..M.
            source_levels: Level the increments were generated at. If None,
                `levels` is used. Default: None.
        """
        increments = np.asarray(increments, dtype=DEFAULT_DTYPE)
        if increments.shape != (M, 2**levels):
            msg = (f"Increments must have shape {(M, 2**levels)}, "
                   f"got {increments.shape}.")
            logger_error(msg)
            raise ValueError(msg)
        self.t0 = float(t0)
        self.T = float(T)
        self.levels = int(levels)
        self.M = int(M)
        self.seed = int(seed)
        self.source_levels = self.levels if source_levels is None else int(source_levels)
        increments = increments.copy()
        increments.flags.writeable = False
        self.increments = increments

    def __repr__(self) -> str:
        return (f"WienerGrid(t0={self.t0}, T={self.T}, levels={self.levels}, "
                f"M={self.M}, seed={self.seed})")

    def __eq__(self, other) -> bool:
        if not isinstance(other, WienerGrid):
            return NotImplemented
        return (self.t0 == other.t0 and self.T == other.T
                and self.levels == other.levels and self.M == other.M
                and self.seed == other.seed
                and np.array_equal(self.increments, other.increments))

    @property
    def h(self) -> float:
        """Step size of the grid."""
        return (self.T - self.t0) / 2**self.levels

    def step_size(self, level: Optional[int] = None) -> float:
        """Step size at `level` (the grid's own level if None)."""
        level = self.levels if level is None else self._check_level(level)
        return (self.T - self.t0) / 2**level

    def times(self, level: Optional[int] = None) -> np.ndarray:
        """Grid times t_0, ..., t_N at `level`."""
        level = self.levels if level is None else self._check_level(level)
        return self.t0 + self.step_size(level) * np.arange(2**level + 1)

    def _check_level(self, level: int) -> int:
        if level < 0 or level > self.levels:
            msg = (f"Level {level} is not available: it must lie in "
                   f"[0, {self.levels}].")
            logger_error(msg)
            raise ValueError(msg)
        return int(level)

    @classmethod
    def generate(cls,
                 t0: float,
                 T: float,
                 levels: int,
                 M: int,
                 seed: int,
                 memory_budget: Optional[int] = None,
                 config: Optional[Config] = None,
    ) -> "WienerGrid":
        """Draw the increments of M channels on a grid with 2**levels steps.

        Each increment is N(0, (T - t0)/2**levels). Increment `i` of channel
        `m` is a deterministic function of (seed, m, i), so the result does
        not depend on evaluation order.

        Args:
            t0: Initial time.
            T: Final time. Must be larger than `t0`.
            levels: Dyadic exponent. Must be non-negative.
            M: Number of noise channels. Must be non-negative.
            seed: Non-negative 64-bit integer seed.
            memory_budget: Maximum number of bytes the stored increments may
                take. If None, the "memory_budget" hyperparameter. Default: None.
            config: Hyperparameters supplying the memory budget. If None, a
                fresh Config. Default: None.

        Returns:
            The generated WienerGrid.
        """
        if not T > t0:
            msg = f"'T' = {T} must be larger than 't0' = {t0}."
            logger_error(msg)
            raise ValueError(msg)
        if levels < 0 or M < 0:
            msg = f"'levels' = {levels} and 'M' = {M} must be non-negative."
            logger_error(msg)
            raise ValueError(msg)
        if seed < 0 or seed >= 2**64:
            msg = f"'seed' = {seed} must be a 64-bit unsigned integer."
            logger_error(msg)
            raise ValueError(msg)
        if memory_budget is None:
            memory_budget = (Config() if config is None else config)["memory_budget"]
        n_bytes = M * 2**levels * np.dtype(DEFAULT_DTYPE).itemsize
        if n_bytes > memory_budget:
            size, unit = convert_size_bytes_to_human_readable(n_bytes)
            msg = (f"A grid with {M} channels and 2**{levels} steps needs "
                   f"{size} {unit}, which exceeds the memory budget of "
                   f"{memory_budget} bytes.")
            logger_error(msg)
            raise MemoryError(msg)

        n = 2**levels
        scale = np.sqrt((T - t0) / n)
        increments = np.empty((M, n), dtype=DEFAULT_DTYPE)
        for m in range(M):
            raw = _raw_block(_channel_key(seed, m + 1), 0, n)
            increments[m] = scale * _standard_normal(raw)
        grid = cls(t0, T, levels, M, seed, increments)
        size, unit = convert_size_bytes_to_human_readable(asizeof.asizeof(grid))
        logger_debug(f"Generated {grid!r} ({size} {unit}).")
        return grid

    def coarsen(self, target_level: int) -> "WienerGrid":
        """Return the grid with 2**target_level steps over the same path.

        Args:
            target_level: Dyadic exponent of the coarse grid. Must not exceed
                `levels`.

        Returns:
            A new WienerGrid whose increments are sums of the fine ones.
        """
        target_level = self._check_level(target_level)
        if target_level == self.levels:
            return self
        increments = _coarsen_pairwise(np.asarray(self.increments),
                                       self.levels - target_level)
        return WienerGrid(self.t0, self.T, target_level, self.M, self.seed,
                          increments, source_levels=self.source_levels)

    def dW(self, level: Optional[int] = None) -> np.ndarray:
        """Increments of all channels at `level`, channel 0 included.

        Args:
            level: Dyadic exponent. If None, the grid's own level is used.
                Default: None.

        Returns:
            Array of shape (M + 1, 2**level). Row 0 holds the step size.
        """
        level = self.levels if level is None else level
        coarse = self.coarsen(level)
        out = np.empty((self.M + 1, 2**level), dtype=DEFAULT_DTYPE)
        out[0] = self.step_size(level)
        out[1:] = coarse.increments
        return out

    def path(self, level: Optional[int] = None) -> np.ndarray:
        """Values W_m(t_n) of all channels at `level`.

        Row 0 is W_0(t_n) = t_n; rows 1..M start at zero.

        Returns:
            Array of shape (M + 1, 2**level + 1).
        """
        level = self.levels if level is None else level
        dW = self.dW(level)
        out = np.zeros((self.M + 1, 2**level + 1), dtype=DEFAULT_DTYPE)
        out[0] = self.times(level)
        out[1:, 1:] = np.cumsum(dW[1:], axis=1)
        return out

    def increment_at(self, channel: int, index: int) -> float:
        """Single increment of `channel` at step `index` of this grid.

        The value is computed from the seed without generating the stream and
        equals `dW()[channel, index]` bit for bit.

        Args:
            channel: Channel index in 0..M (0 is the time channel).
            index: Step index in 0..2**levels - 1.

        Returns:
            The increment.
        """
        if channel < 0 or channel > self.M or index < 0 or index >= 2**self.levels:
            msg = (f"Increment ({channel}, {index}) is out of range for "
                   f"{self!r}.")
            logger_error(msg)
            raise ValueError(msg)
        if channel == 0:
            return self.h
        block = 2**(self.source_levels - self.levels)
        raw = _raw_block(_channel_key(self.seed, channel), index * block, block)
        scale = np.sqrt((self.T - self.t0) / 2**self.source_levels)
        fine = scale * _standard_normal(raw)
        return float(_coarsen_pairwise(fine, self.source_levels - self.levels)[0])

    def dump(self, fname: Union[str, os.PathLike]) -> None:
        """Write the grid to a binary file.

        The file holds a fixed header (magic, t0, T, levels, M, seed and the
        generation level) followed by the increments as little-endian float64.

        Args:
            fname: Path of the output file.
        """
        header = np.zeros(1, dtype=GRID_HEADER_DTYPE)
        header["magic"] = GRID_MAGIC
        header["t0"] = self.t0
        header["T"] = self.T
        header["levels"] = self.levels
        header["M"] = self.M
        header["seed"] = self.seed
        header["source_levels"] = self.source_levels
        with open(fname, "wb") as f:
            header.tofile(f)
            np.asarray(self.increments, dtype="<f8").tofile(f)
        logger_debug(f"Saved {self!r} to {fname}.")

    @classmethod
    def load(cls, fname: Union[str, os.PathLike]) -> "WienerGrid":
        """Read a grid written by `dump`.

        Args:
            fname: Path of the input file.

        Returns:
            The stored WienerGrid.
        """
        with open(fname, "rb") as f:
            header = np.fromfile(f, dtype=GRID_HEADER_DTYPE, count=1)
            if header.size != 1 or header["magic"][0] != GRID_MAGIC:
                msg = f"File {fname} is not a lawsde Wiener grid."
                logger_error(msg)
                raise ValueError(msg)
            levels = int(header["levels"][0])
            M = int(header["M"][0])
            payload = np.fromfile(f, dtype="<f8")
        if payload.size != M * 2**levels:
            msg = (f"File {fname} is truncated: expected {M * 2**levels} "
                   f"increments, found {payload.size}.")
            logger_error(msg)
            raise ValueError(msg)
        return cls(float(header["t0"][0]), float(header["T"][0]), levels, M,
                   int(header["seed"][0]), payload.reshape(M, 2**levels),
                   source_levels=int(header["source_levels"][0]))


def generate(t0: float,
             T: float,
             levels: int,
             M: int,
             seed: int,
             memory_budget: Optional[int] = None,
             config: Optional[Config] = None,
) -> WienerGrid:
    """Module-level alias of `WienerGrid.generate`."""
    return WienerGrid.generate(t0, T, levels, M, seed, memory_budget, config)


def coarsen(grid: WienerGrid, target_level: int) -> WienerGrid:
    """Module-level alias of `WienerGrid.coarsen`."""
    return grid.coarsen(target_level)


def path_seed(seed: int, path: int) -> int:
    """Seed of the `path`-th independent Brownian path of an experiment."""
    return int(np.random.SeedSequence([seed, path]).generate_state(1, dtype=np.uint64)[0])
