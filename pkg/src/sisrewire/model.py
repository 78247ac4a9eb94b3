"""Pairwise SIS model on an adaptive network.

State is the expected number of infected nodes and of SI, II and SS
edges. Pairs follow the ordered counting convention, so the mean degree
is ``(2*SI + SS + II) / N``. Triples are closed with the homogeneous
``(n - 1)/n`` closure.

Two controlled systems share everything except the SS-edge control term:

* ``constant``: ``u2 >= 0`` creates missing SS edges at rate u2.
* ``nmpc``: ``u2`` is signed; negative values delete existing SS edges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ConfigError, DegenerateState

N_GUARD = _kernels.N_GUARD

SYSTEMS = ("constant", "nmpc")


@dataclass(frozen=True)
class SystemParams:
    """Population and epidemic description.

    ``literal_ss`` switches the NMPC SS equation to the single ``gamma*SI``
    recovery term instead of the edge-conserving ``2*gamma*SI``.
    """

    N: int = 1000
    tau: float = 0.1
    gamma: float = 1.0
    I0: float = 10.0
    n0: float = 10.0
    literal_ss: bool = False

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 3:
            raise ConfigError(f"N must be an integer >= 3, got {self.N}")
        if not self.gamma > 0:
            raise ConfigError(f"gamma must be > 0, got {self.gamma}")
        if not self.tau >= 0:
            raise ConfigError(f"tau must be >= 0, got {self.tau}")
        if not 0 <= self.I0 <= self.N:
            raise ConfigError(f"I0 must lie in [0, N], got {self.I0}")
        if not 0 < self.n0 <= self.N - 1:
            raise ConfigError(f"n0 must lie in (0, N-1], got {self.n0}")

    def kernel_vector(self) -> np.ndarray:
        return np.array(
            [float(self.N), self.tau, self.gamma, 1.0 if self.literal_ss else 0.0]
        )


@dataclass(frozen=True)
class ModelState:
    I: float
    SI: float
    II: float
    SS: float

    def as_array(self) -> np.ndarray:
        return np.array([self.I, self.SI, self.II, self.SS], dtype=float)

    @classmethod
    def from_array(cls, x) -> "ModelState":
        return cls(float(x[0]), float(x[1]), float(x[2]), float(x[3]))

    def is_valid(self, params: SystemParams, tol: float | None = None) -> bool:
        tol = 1e-6 * params.N if tol is None else tol
        vals = (self.I, self.SI, self.II, self.SS)
        if not all(math.isfinite(v) and v >= 0 for v in vals):
            return False
        if self.I > params.N:
            return False
        n = mean_degree(self, params)
        return -tol <= n <= params.N - 1 + tol


@dataclass(frozen=True)
class ControlInput:
    u1: float = 0.0
    u2: float = 0.0

    def __post_init__(self):
        if not self.u1 >= 0:
            raise ConfigError(f"u1 must be >= 0, got {self.u1}")
        if not math.isfinite(self.u2):
            raise ConfigError(f"u2 must be finite, got {self.u2}")


@dataclass(frozen=True)
class Derivative:
    dI: float
    dSI: float
    dII: float
    dSS: float

    def as_array(self) -> np.ndarray:
        return np.array([self.dI, self.dSI, self.dII, self.dSS], dtype=float)


def initial_state(params: SystemParams) -> ModelState:
    """Mean-field pair counts ``[AB] = n0 [A][B] / N`` for the initial prevalence."""
    N, I0, n0 = float(params.N), float(params.I0), float(params.n0)
    S0 = N - I0
    return ModelState(I0, n0 * I0 * S0 / N, n0 * I0 * I0 / N, n0 * S0 * S0 / N)


def mean_degree(state: ModelState, params: SystemParams) -> float:
    return (2.0 * state.SI + state.SS + state.II) / params.N


def closure_triples(state: ModelState, params: SystemParams) -> tuple[float, float]:
    """Return the closed triple counts ``(SSI, ISI)``.

    Both triples carry a factor SI, so SI == 0 yields zeros on any network.
    Otherwise raises DegenerateState when the mean degree or the susceptible
    count is at or below the guard; rollouts use the kernel version, which
    returns zeros there instead.
    """
    if state.SI == 0.0:
        return 0.0, 0.0
    N = float(params.N)
    n = mean_degree(state, params)
    S = N - state.I
    if S <= N_GUARD or n <= N_GUARD:
        raise DegenerateState(f"closure undefined: N-I={S:g}, n={n:g}")
    f = (n - 1.0) / n / S
    return f * state.SS * state.SI, f * state.SI * state.SI


def _kernel_params(params: SystemParams, u: ControlInput, nmpc: bool) -> np.ndarray:
    p = np.empty(7)
    p[_kernels.P_N] = params.N
    p[_kernels.P_TAU] = params.tau
    p[_kernels.P_GAMMA] = params.gamma
    p[_kernels.P_U1] = u.u1
    p[_kernels.P_U2] = u.u2
    p[_kernels.P_MODE] = 1.0 if nmpc else 0.0
    p[_kernels.P_LITERAL] = 1.0 if (nmpc and params.literal_ss) else 0.0
    return p


def _rhs(state: ModelState, params: SystemParams, u: ControlInput, nmpc: bool) -> Derivative:
    closure_triples(state, params)
    d = _kernels.pairwise_rhs(state.as_array(), _kernel_params(params, u, nmpc))
    return Derivative(*map(float, d))


def rhs_constant(state: ModelState, params: SystemParams, u: ControlInput) -> Derivative:
    if u.u2 < 0:
        raise ConfigError("constant-control system requires u2 >= 0")
    return _rhs(state, params, u, nmpc=False)


def rhs_nmpc(state: ModelState, params: SystemParams, u: ControlInput) -> Derivative:
    return _rhs(state, params, u, nmpc=True)


def rhs(state: ModelState, params: SystemParams, u: ControlInput, system: str) -> Derivative:
    if system == "constant":
        return rhs_constant(state, params, u)
    if system == "nmpc":
        return rhs_nmpc(state, params, u)
    raise ConfigError(f"unknown system {system!r}; expected one of {SYSTEMS}")
