"""Fixed-step RK4 discretisation of the controlled pairwise systems.

``step_F`` is the one-interval map x(k+1) = F(x(k), u(k)) with the control
held constant, ``output_h`` the observation (I, n), and ``simulate`` runs a
piecewise-constant schedule from the initial state.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
import numpy as np

from . import _kernels
from .errors import ConfigError, IntegrationFailure
from .model import SYSTEMS, ControlInput, ModelState, SystemParams, initial_state, mean_degree

log = logging.getLogger(__name__)

MIN_SUBSTEPS = 20
MAX_SUBSTEP = 0.01


def substep_count(dt: float, min_substeps: int = MIN_SUBSTEPS, max_substep: float = MAX_SUBSTEP) -> int:
    """At least ``min_substeps``, and never a substep longer than ``max_substep``."""
    return max(int(min_substeps), int(math.ceil(dt / max_substep - 1e-9)))


@dataclass(frozen=True)
class ControlSchedule:
    dt: float
    steps: tuple[ControlInput, ...]

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigError(f"dt must be > 0, got {self.dt}")
        object.__setattr__(self, "steps", tuple(self.steps))

    @classmethod
    def constant(cls, u: ControlInput, dt: float, T: float) -> "ControlSchedule":
        k = round(T / dt)
        if k < 1 or abs(k * dt - T) > 1e-9 * max(1.0, T):
            raise ConfigError(f"T/dt must be a positive integer (T={T}, dt={dt})")
        return cls(dt, (u,) * k)

    @classmethod
    def from_array(cls, dt: float, arr) -> "ControlSchedule":
        return cls(dt, tuple(ControlInput(float(a), float(b)) for a, b in np.asarray(arr, float)))

    def as_array(self) -> np.ndarray:
        return np.array([[u.u1, u.u2] for u in self.steps], dtype=float).reshape(-1, 2)

    def __len__(self):
        return len(self.steps)


@dataclass
class Trajectory:
    """Recorded run; ``controls[k]`` acts on ``[times[k], times[k+1])``."""

    times: np.ndarray
    states: np.ndarray
    controls: np.ndarray
    outputs: np.ndarray = field(default=None)
    N: float = 1.0

    def __post_init__(self):
        self.times = np.asarray(self.times, float)
        self.states = np.asarray(self.states, float).reshape(-1, 4)
        self.controls = np.asarray(self.controls, float).reshape(-1, 2)
        if self.outputs is None:
            s = self.states
            self.outputs = np.column_stack([s[:, 0], (2 * s[:, 1] + s[:, 2] + s[:, 3]) / self.N])
        if not (len(self.times) == len(self.states) == len(self.outputs) == len(self.controls) + 1):
            raise ValueError("trajectory arrays have inconsistent lengths")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("trajectory times must be strictly increasing")

    @property
    def I(self) -> np.ndarray:
        return self.outputs[:, 0]

    @property
    def n(self) -> np.ndarray:
        return self.outputs[:, 1]

    @property
    def final_state(self) -> ModelState:
        return ModelState.from_array(self.states[-1])

    @property
    def final_output(self) -> tuple[float, float]:
        return float(self.outputs[-1, 0]), float(self.outputs[-1, 1])


def _check_system(system: str) -> bool:
    if system not in SYSTEMS:
        raise ConfigError(f"unknown system {system!r}; expected one of {SYSTEMS}")
    return system == "nmpc"


def _step_array(x, u1, u2, dt, params, nmpc, substeps):
    if nmpc is False and u2 < 0:
        raise ConfigError("constant-control system requires u2 >= 0")
    y, clamped = _kernels.step_pairwise(x, params.kernel_vector(), u1, u2, dt, substeps, nmpc)
    if not np.all(np.isfinite(y)):
        raise IntegrationFailure(f"non-finite state after step: {y}")
    if clamped > 1e-6 * params.N:
        log.info("clamped state by %.3g during integration step", clamped)
    return y


def step_F(
    x: ModelState,
    u: ControlInput,
    dt: float,
    params: SystemParams,
    system: str = "nmpc",
    substeps: int | None = None,
) -> ModelState:
    if not dt > 0:
        raise ConfigError(f"dt must be > 0, got {dt}")
    nmpc = _check_system(system)
    substeps = substep_count(dt) if substeps is None else int(substeps)
    return ModelState.from_array(_step_array(x.as_array(), u.u1, u.u2, dt, params, nmpc, substeps))


def rk4(f, x0, dt: float, substeps: int, p=None) -> np.ndarray:
    """Integrate a compiled right-hand side ``f(x, p)`` with the model's RK4 kernel."""
    p = np.zeros(7) if p is None else np.asarray(p, float)
    y, _ = _kernels.rk4_integrate(f, np.atleast_1d(np.asarray(x0, float)), p, dt, int(substeps), False)
    return y


def output_h(x: ModelState, params: SystemParams) -> tuple[float, float]:
    return x.I, mean_degree(x, params)


def simulate(
    params: SystemParams,
    schedule: ControlSchedule,
    system: str = "constant",
    substeps: int | None = None,
    dense: bool = False,
    x0: ModelState | None = None,
) -> Trajectory:
    """Run ``schedule`` from the initial state.

    Records at every control boundary, or at every RK4 substep with ``dense``.
    """
    if len(schedule) == 0:
        raise ConfigError("schedule must contain at least one step")
    nmpc = _check_system(system)
    dt = schedule.dt
    nsub = substep_count(dt) if substeps is None else int(substeps)
    x = (initial_state(params) if x0 is None else x0).as_array()
    states = [x]
    times = [0.0]
    controls = []
    for k, u in enumerate(schedule.steps):
        if dense:
            h = dt / nsub
            for i in range(nsub):
                x = _step_array(x, u.u1, u.u2, h, params, nmpc, 1)
                states.append(x)
                times.append(k * dt + (i + 1) * h)
                controls.append((u.u1, u.u2))
        else:
            x = _step_array(x, u.u1, u.u2, dt, params, nmpc, nsub)
            states.append(x)
            times.append((k + 1) * dt)
            controls.append((u.u1, u.u2))
    return Trajectory(np.array(times), np.array(states), np.array(controls), N=float(params.N))


def constant_run(
    params: SystemParams, u: ControlInput, T: float, dt: float = 0.1, system: str = "constant"
) -> Trajectory:
    return simulate(params, ControlSchedule.constant(u, dt, T), system=system)

