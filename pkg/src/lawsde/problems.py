"""lawsde problems module.

Benchmark problems: the nonlinear Kubo oscillator, the stochastic rigid body
and the stochastic Fermi-Pasta-Ulam-Tsingou (FPUT) chain with three stiff and
three soft springs.
"""
from typing import Optional, Callable, Sequence, Dict, Any

import numpy as np

from .logger import *
from .utils import *
from .linalg import expm_skew2
from .model import SplitSde, InvariantSpec

__all__ = [
    "KuboParams",
    "RigidBodyParams",
    "FputParams",
    "Benchmark",
    "KUBO_GENERATOR",
    "RIGID_BODY_GENERATOR",
    "build_kubo",
    "build_rigid_body",
    "build_fput",
    "build_problem",
    "kubo_exact_solution",
    "oscillatory_energy",
    "fput_oscillatory_energies",
    "fput_hamiltonian",
    "fput_initial_state",
]

KUBO_GENERATOR = np.array([[0.0, -1.0], [1.0, 0.0]])
RIGID_BODY_GENERATOR = np.array([[0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
FPUT_SPRINGS = 3
FPUT_DIM = 4 * FPUT_SPRINGS

ScalarMap = Callable[[np.ndarray], float]


def kubo_potential_drift(x: np.ndarray) -> float:
    """U_0(x) = (x_1 + x_2)^5 / 5."""
    return (x[0] + x[1])**5 / 5.0


def kubo_potential_noise(x: np.ndarray) -> float:
    """U_2(x) = (x_1 + x_2)^3 / 3."""
    return (x[0] + x[1])**3 / 3.0


class KuboParams:
    """Parameters of the nonlinear Kubo oscillator.

    Channel m has the field omega_m S x + U_m(x) S x with S the planar rotation
    generator. A potential given as None is zero.
    """

    def __init__(self,
                 omega: Sequence[float],
                 U: Optional[Sequence[Optional[ScalarMap]]] = None,
                 x0=(1.0, 0.0),
                 t0: float = 0.0,
                 T: float = 1.0,
    ) -> None:
        """Constructor.

        Args:
            omega: The M + 1 frequencies omega_0..omega_M.
            U: The M + 1 potentials U_0..U_M. If None, all zero. Default: None.
            x0: Initial state. Default: (1, 0).
            t0: Initial time. Default: 0.0.
            T: Final time. Default: 1.0.
        """
        self.omega = [float(w) for w in omega]
        self.U = [None] * len(self.omega) if U is None else list(U)
        if len(self.U) != len(self.omega):
            msg = (f"Kubo oscillator needs one potential per frequency, got "
                   f"{len(self.U)} potentials and {len(self.omega)} frequencies.")
            logger_error(msg)
            raise ValueError(msg)
        self.x0 = np.array(x0, dtype=DEFAULT_DTYPE)
        self.t0 = t0
        self.T = T

    @property
    def M(self) -> int:
        return len(self.omega) - 1

    @classmethod
    def example(cls,
                omega: float = 10.0,
                sigma: float = 10.0,
                linear: bool = False,
                **kwargs,
    ) -> "KuboParams":
        """Two-channel oscillator with U_0 = (x_1+x_2)^5/5, U_1 = 0 and
        U_2 = (x_1+x_2)^3/3, frequencies (omega, sigma, 0).

        Args:
            omega: Drift frequency. Default: 10.0.
            sigma: Frequency of the first noise channel. Default: 10.0.
            linear: Drop all potentials. Default: False.
            **kwargs: x0, t0 and T.
        """
        U = None if linear else [kubo_potential_drift, None, kubo_potential_noise]
        return cls([omega, sigma, 0.0], U, **kwargs)


class RigidBodyParams:
    """Parameters of the stochastic rigid body."""

    def __init__(self,
                 omega: float = 1.0,
                 sigma: float = 1.0,
                 inertia=(2.0, 1.0, 2.0 / 3.0),
                 x0=None,
                 t0: float = 0.0,
                 T: float = 1.0,
    ) -> None:
        """Constructor.

        Args:
            omega: Frequency of the skew-symmetric drift. Default: 1.0.
            sigma: Noise amplitude. Default: 1.0.
            inertia: Moments of inertia (I_1, I_2, I_3). Default: (2, 1, 2/3).
            x0: Initial state. If None, (cos 1.1, 0, sin 1.1). Default: None.
            t0: Initial time. Default: 0.0.
            T: Final time. Default: 1.0.
        """
        self.omega = float(omega)
        self.sigma = float(sigma)
        self.inertia = tuple(float(i) for i in inertia)
        if len(self.inertia) != 3 or min(self.inertia) <= 0:
            msg = f"'inertia' must hold three positive moments, got {inertia}."
            logger_error(msg)
            raise ValueError(msg)
        if x0 is None:
            x0 = (np.cos(1.1), 0.0, np.sin(1.1))
        self.x0 = np.array(x0, dtype=DEFAULT_DTYPE)
        self.t0 = t0
        self.T = T


class FputParams:
    """Parameters of the stochastic FPUT chain (three stiff springs)."""

    def __init__(self,
                 omega: float = 50.0,
                 sigma: float = 0.02,
                 x0=None,
                 t0: float = 0.0,
                 T: float = 1.0,
    ) -> None:
        """Constructor.

        Args:
            omega: Stiff spring frequency. Default: 50.0.
            sigma: Noise amplitude. Default: 0.02.
            x0: Initial state. If None, `fput_initial_state(omega)`.
                Default: None.
            t0: Initial time. Default: 0.0.
            T: Final time. Default: 1.0.
        """
        if omega <= 0:
            msg = f"'omega' = {omega} must be positive."
            logger_error(msg)
            raise ValueError(msg)
        self.m = FPUT_SPRINGS
        self.omega = float(omega)
        self.sigma = float(sigma)
        self.x0 = fput_initial_state(omega) if x0 is None else np.array(x0, dtype=DEFAULT_DTYPE)
        self.t0 = t0
        self.T = T


class Benchmark:
    """A benchmark problem: the split SDE, its quadratic invariant (if any)
    and the parameters it was built from."""

    def __init__(self,
                 name: str,
                 sde: SplitSde,
                 params: Any,
                 invariant: Optional[InvariantSpec] = None,
    ) -> None:
        self.name = name
        self.sde = sde
        self.params = params
        self.invariant = invariant

    def __repr__(self) -> str:
        return f"Benchmark(name={self.name!r}, sde={self.sde!r})"


def _kubo_map(U_m: Optional[ScalarMap]):
    if U_m is None:
        return None

    def g_m(x):
        return U_m(x) * (KUBO_GENERATOR @ x)
    return g_m


def build_kubo(params: KuboParams) -> Benchmark:
    """Nonlinear Kubo oscillator: channel m field omega_m S x + U_m(x) S x.

    The unit circle x^T x = 1 is invariant.
    """
    A = [w * KUBO_GENERATOR for w in params.omega]
    g = [_kubo_map(U_m) for U_m in params.U]
    sde = SplitSde(A, g, params.x0, params.t0, params.T, name="kubo")
    return Benchmark("kubo", sde, params, InvariantSpec.quadratic(np.eye(2)))


def kubo_exact_solution(params: KuboParams, W) -> np.ndarray:
    """Exact solution of the linear Kubo oscillator (all U_m = 0).

    X(T) = exp((sum_m omega_m W_m) S) x0 with W_0 = T - t0.

    Args:
        params: Oscillator parameters; the potentials must all be None.
        W: The M + 1 Brownian path values W_m(T) - W_m(t0).

    Returns:
        The state at the end of the path.
    """
    if any(U_m is not None for U_m in params.U):
        msg = "The closed-form Kubo solution only exists without potentials."
        logger_error(msg)
        raise ValueError(msg)
    angle = float(np.dot(params.omega, np.asarray(W, dtype=DEFAULT_DTYPE)))
    return expm_skew2(angle * KUBO_GENERATOR) @ params.x0


def build_rigid_body(params: RigidBodyParams) -> Benchmark:
    """Stochastic rigid body with a skew-symmetric linear drift and noise.

    A_0 = omega S_3, A_1 = sigma S_3, g_0 the Euler term, g_1 = 0. The unit
    sphere x^T x = 1 is invariant.
    """
    I1, I2, I3 = params.inertia

    def euler_term(x):
        X1, X2, X3 = x
        K = np.array([[0.0, X3 / I3, -X2 / I2],
                      [-X3 / I3, 0.0, X1 / I1],
                      [X2 / I2, -X1 / I1, 0.0]])
        return K @ x

    A = [params.omega * RIGID_BODY_GENERATOR, params.sigma * RIGID_BODY_GENERATOR]
    sde = SplitSde(A, [euler_term, None], params.x0, params.t0, params.T,
                   name="rigid-body")
    return Benchmark("rigid-body", sde, params, InvariantSpec.quadratic(np.eye(3)))


def fput_initial_state(omega: float) -> np.ndarray:
    """Classical FPUT start: x_{0,1} = 1, y_{0,1} = 1, x_{1,1} = 1/omega,
    y_{1,1} = 1, all other coordinates zero."""
    x = np.zeros(FPUT_DIM, dtype=DEFAULT_DTYPE)
    x[0] = 1.0
    x[2 * FPUT_SPRINGS] = 1.0
    x[FPUT_SPRINGS] = 1.0 / omega
    x[3 * FPUT_SPRINGS] = 1.0
    return x


def fput_matrix(omega: float) -> np.ndarray:
    """Linear drift part of the FPUT chain.

    Coordinates are (x_0, x_1, y_0, y_1), three entries each: positions feed
    the momenta through an identity block and the stiff momenta carry
    -omega^2 on the stiff positions.
    """
    n = FPUT_SPRINGS
    A = np.zeros((FPUT_DIM, FPUT_DIM), dtype=DEFAULT_DTYPE)
    A[:2 * n, 2 * n:] = np.eye(2 * n)
    A[3 * n:, n:2 * n] = -omega**2 * np.eye(n)
    return A


def fput_nonlinearity(x: np.ndarray) -> np.ndarray:
    """Cubic coupling forces of the soft springs, acting on the momenta."""
    x01, x02, x03, x11, x12, x13 = x[:2 * FPUT_SPRINGS]
    g1 = (x01 - x11)**3
    g2 = (x02 - x12 - x01 - x11)**3
    g3 = (x03 - x13 - x02 - x12)**3
    g4 = (x03 + x13)**3
    out = np.zeros(FPUT_DIM, dtype=DEFAULT_DTYPE)
    out[6:] = (-g1 + g2, -g2 + g3, -g4 - g3, g1 + g2, g2 + g3, -g4 + g3)
    return out


def build_fput(params: FputParams) -> Benchmark:
    """Stochastic FPUT chain with A_1 = sigma A_0 and g_1 = 0.

    The oscillatory energies are only almost conserved, so no invariant is
    attached; see `fput_oscillatory_energies`.
    """
    A0 = fput_matrix(params.omega)
    sde = SplitSde([A0, params.sigma * A0], [fput_nonlinearity, None],
                   params.x0, params.t0, params.T, name="fput")
    return Benchmark("fput", sde, params, None)


def oscillatory_energy(j: int, x, omega: float) -> float:
    """Energy 1/2 (y_{1,j}^2 + omega^2 x_{1,j}^2) of the j-th stiff spring (j = 1, 2, 3)."""
    if j not in range(1, FPUT_SPRINGS + 1):
        msg = f"Spring index {j} must be 1, 2 or 3."
        logger_error(msg)
        raise ValueError(msg)
    x = np.asarray(x, dtype=DEFAULT_DTYPE)
    return float(0.5 * (x[8 + j]**2 + omega**2 * x[2 + j]**2))


def fput_oscillatory_energies(states, omega: float) -> np.ndarray:
    """Oscillatory energies I_1, I_2, I_3 of every state.

    Args:
        states: Array of shape (N, 12) or a single state.
        omega: Stiff spring frequency.

    Returns:
        Array of shape (N, 3), or (3,) for a single state.
    """
    states = np.asarray(states, dtype=DEFAULT_DTYPE)
    n = FPUT_SPRINGS
    x1 = states[..., n:2 * n]
    y1 = states[..., 3 * n:]
    return 0.5 * (y1**2 + omega**2 * x1**2)


def fput_hamiltonian(x, omega: float) -> float:
    """Hamiltonian of the deterministic FPUT chain (a diagnostic only)."""
    x = np.asarray(x, dtype=DEFAULT_DTYPE)
    n = FPUT_SPRINGS
    x0, x1, y0, y1 = x[:n], x[n:2 * n], x[2 * n:3 * n], x[3 * n:]
    kinetic = 0.5 * np.sum(y0**2 + y1**2)
    stiff = 0.5 * omega**2 * np.sum(x1**2)
    soft = 0.25 * ((x0[0] - x1[0])**4 + (x0[-1] + x1[-1])**4)
    soft += 0.25 * np.sum((x0[1:] - x1[1:] - x0[:-1] - x1[:-1])**4)
    return float(kinetic + stiff + soft)


def build_problem(name: str,
                  omega: Optional[float] = None,
                  sigma: Optional[float] = None,
                  T: Optional[float] = None,
                  t0: float = 0.0,
                  **kwargs,
) -> Benchmark:
    """Build a benchmark by name.

    Kubo problems use the two-channel oscillator of `KuboParams.example`.

    Args:
        name: One of VALID_PROBLEMS.
        omega: Drift frequency. If None, the problem default.
        sigma: Noise amplitude. If None, the problem default.
        T: Final time. Default: None (1.0).
        t0: Initial time. Default: 0.0.
        **kwargs: Problem specific options: `linear` (kubo), `inertia`
            (rigid-body) and `x0`.

    Returns:
        The benchmark.
    """
    options: Dict[str, Any] = {"t0": t0, "T": 1.0 if T is None else T}
    if omega is not None:
        options["omega"] = omega
    if sigma is not None:
        options["sigma"] = sigma
    x0 = kwargs.pop("x0", None)
    if x0 is not None:
        options["x0"] = x0
    if name == "kubo":
        return build_kubo(KuboParams.example(linear=kwargs.pop("linear", False), **options))
    elif name == "rigid-body":
        return build_rigid_body(RigidBodyParams(**options, **kwargs))
    elif name == "fput":
        return build_fput(FputParams(**options))
    else:
        msg = (f"'problem' = {name} is not a valid problem.\n"
               f"Valid problems are: {VALID_PROBLEMS}.")
        logger_error(msg)
        raise ValueError(msg)
