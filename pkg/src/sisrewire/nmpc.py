"""Receding-horizon control of the signed-u2 pairwise system.

At each sampling instant k the controller picks P future control pairs
minimising

    sum_j  l1*I(k+j+1)^2 + l2*du1(k+j)^2 + l3*(n(k+j+1) - n*)^2 + l4*du2(k+j)^2

subject to ``0 <= u1 <= M1`` and ``|u2| <= M2``, applies the first pair
and shifts the horizon. The objective is a sum of squared residuals, so
the inner solver is a projected Levenberg-Marquardt iteration with a
forward-difference Jacobian, warm started from the shifted previous plan
and restarted from a few random admissible plans.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _kernels
from .errors import ConfigError, OptimizationStalled
from .integrator import ControlSchedule, Trajectory, _step_array, substep_count
from .model import ControlInput, ModelState, SystemParams, initial_state

log = logging.getLogger(__name__)

COST_INDEXING = ("shifted", "literal")


@dataclass(frozen=True)
class NmpcConfig:
    """Controller settings.

    ``horizon_time``, when set, overrides ``P`` with
    ``max(1, round_half_up(horizon_time / dt))`` so the prediction window keeps its
    length in time units when the sampling step changes.
    """

    M1: float
    M2: float
    dt: float = 0.1
    T: float = 10.0
    P: int = 5
    horizon_time: float | None = None
    lambdas: tuple[float, float, float, float] = (1e4, 1.0, 1.0, 1.0)
    I_target: float = 0.0
    n_target: float = 10.0
    epsilon: float = 0.1
    cost_indexing: str = "shifted"
    seed: int = 42
    random_starts: int = 3
    max_iter: int = 500
    rtol: float = 1e-8

    def __post_init__(self):
        object.__setattr__(self, "lambdas", tuple(float(v) for v in self.lambdas))
        if not self.M1 > 0:
            raise ConfigError(f"M1 must be > 0, got {self.M1}")
        if not self.M2 >= 0:
            raise ConfigError(f"M2 must be >= 0, got {self.M2}")
        if not self.dt > 0 or not self.T > 0:
            raise ConfigError(f"dt and T must be > 0, got dt={self.dt}, T={self.T}")
        k = self.T / self.dt
        if abs(k - round(k)) > 1e-9 * max(1.0, k) or round(k) < 1:
            raise ConfigError(f"T/dt must be a positive integer, got {k}")
        if int(self.P) != self.P or self.P < 1:
            raise ConfigError(f"P must be an integer >= 1, got {self.P}")
        if self.horizon_time is not None and not self.horizon_time > 0:
            raise ConfigError(f"horizon_time must be > 0, got {self.horizon_time}")
        if len(self.lambdas) != 4 or any(not (v >= 0) for v in self.lambdas):
            raise ConfigError(f"lambdas must be four nonnegative weights, got {self.lambdas}")
        if not self.epsilon > 0:
            raise ConfigError(f"epsilon must be > 0, got {self.epsilon}")
        if self.cost_indexing not in COST_INDEXING:
            raise ConfigError(f"cost_indexing must be one of {COST_INDEXING}")
        if self.random_starts < 0 or self.max_iter < 1:
            raise ConfigError("random_starts must be >= 0 and max_iter >= 1")

    @property
    def steps(self) -> int:
        return int(round(self.T / self.dt))

    @property
    def horizon(self) -> int:
        if self.horizon_time is None:
            return int(self.P)
        return max(1, math.floor(self.horizon_time / self.dt + 0.5))

    def replace(self, **changes) -> "NmpcConfig":
        d = asdict(self)
        d.update(changes)
        return NmpcConfig(**d)


@dataclass
class HorizonSolution:
    controls: np.ndarray
    objective: float
    iterations: int
    stalled: bool = False


@dataclass
class ControlResult:
    trajectory: Trajectory
    applied_controls: ControlSchedule
    final_I: float
    final_n: float
    controllable: bool
    objective_history: list[float] = field(default_factory=list)
    dev_I: float = math.nan
    dev_n: float = math.nan
    stalled_steps: int = 0


class _Problem:
    """Horizon objective at one sampling instant, in kernel-ready arrays."""

    def __init__(self, x_k, u_prev, cfg: NmpcConfig, params: SystemParams, P: int):
        self.x = np.asarray(x_k, float)
        self.u_prev = np.asarray(u_prev, float)
        self.sysp = params.kernel_vector()
        self.dt = cfg.dt
        self.nsub = substep_count(cfg.dt)
        self.sqrt_lam = np.sqrt(np.asarray(cfg.lambdas, float))
        self.n_target = float(cfg.n_target)
        self.literal = cfg.cost_indexing == "literal"
        self.P = P
        self.lo = np.tile([0.0, -cfg.M2], P)
        self.hi = np.tile([cfg.M1, cfg.M2], P)
        self.width = self.hi - self.lo
        self.fixed = self.width <= 0

    def residuals(self, z):
        return _kernels.horizon_residuals(
            z.reshape(self.P, 2), self.x, self.u_prev, self.sysp, self.dt, self.nsub,
            self.sqrt_lam, self.n_target, self.literal,
        )

    def objective(self, z) -> float:
        r = self.residuals(z)
        return float(r @ r)

    def jacobian(self, z):
        steps = np.where(self.fixed, 1.0, 1e-7 * self.width)
        steps = np.where(z + steps > self.hi, -steps, steps)
        return _kernels.horizon_jacobian(
            z.reshape(self.P, 2), steps, self.x, self.u_prev, self.sysp, self.dt, self.nsub,
            self.sqrt_lam, self.n_target, self.literal,
        )

    def project(self, z):
        return np.clip(z, self.lo, self.hi)


def _descend(prob: _Problem, z0, max_iter: int, rtol: float):
    """Projected Levenberg-Marquardt from ``z0``; returns (z, f, iterations, converged)."""
    z = prob.project(np.asarray(z0, float))
    r, jac = prob.jacobian(z)
    f = float(r @ r)
    f0 = max(f, 1e-300)
    mu = 1e-3
    for it in range(1, max_iter + 1):
        if f == 0.0:
            return z, f, it, True
        g = jac.T @ r
        active = prob.fixed | ((z <= prob.lo) & (g > 0)) | ((z >= prob.hi) & (g < 0))
        free = ~active
        if not free.any():
            return z, f, it, True
        scale = prob.width[free]
        Js = jac[:, free] * scale
        A = Js.T @ Js
        b = -(Js.T @ r)
        damp = np.diag(A) + 1e-12 * max(np.trace(A), 1e-300)
        accepted = False
        while mu < 1e16:
            try:
                d = np.linalg.solve(A + mu * np.diag(damp), b)
            except np.linalg.LinAlgError:
                mu *= 4.0
                continue
            zn = z.copy()
            zn[free] += d * scale
            zn = prob.project(zn)
            fn = prob.objective(zn)
            if fn < f:
                accepted = True
                break
            mu *= 4.0
        if not accepted:
            return z, f, it, True
        improvement = (f - fn) / f
        moved = float(np.max(np.abs(zn - z) / np.where(prob.fixed, 1.0, prob.width)))
        z = zn
        mu = max(mu / 3.0, 1e-12)
        r, jac = prob.jacobian(z)
        f = float(r @ r)
        # near an exact zero the relative improvement stays large, so also stop
        # once the plan stops moving or f is at round-off level
        if improvement < rtol or moved < 1e-12 or f <= 1e-28 * f0:
            return z, f, it, True
    return z, f, max_iter, False


def objective_J(seq, x_k: ModelState, u_prev: ControlInput, cfg: NmpcConfig, params: SystemParams) -> float:
    seq = np.asarray([[u.u1, u.u2] if isinstance(u, ControlInput) else u for u in seq], float)
    prob = _Problem(x_k.as_array(), (u_prev.u1, u_prev.u2), cfg, params, len(seq))
    return prob.objective(seq.ravel())


def optimize_horizon(
    x_k: ModelState,
    u_prev: ControlInput,
    cfg: NmpcConfig,
    params: SystemParams,
    warm: np.ndarray | None = None,
    step_index: int = 0,
) -> HorizonSolution:
    """Best admissible plan over the horizon.

    Starts from ``warm`` (zeros if omitted) and ``cfg.random_starts``
    uniform admissible plans drawn from a generator seeded by
    ``(cfg.seed, step_index)``. The zero plan is kept as a fallback so the
    result never scores worse than doing nothing.
    """
    P = cfg.horizon
    prob = _Problem(x_k.as_array(), (u_prev.u1, u_prev.u2), cfg, params, P)
    zero = prob.project(np.zeros(2 * P))
    starts = [zero if warm is None else prob.project(np.asarray(warm, float).ravel())]
    rng = np.random.default_rng([cfg.seed, step_index])
    for _ in range(cfg.random_starts):
        starts.append(rng.uniform(prob.lo, prob.hi))

    best_z, best_f, total_it, stalled = zero, prob.objective(zero), 0, False
    for z0 in starts:
        z, f, it, converged = _descend(prob, z0, cfg.max_iter, cfg.rtol)
        total_it += it
        stalled |= not converged
        if f < best_f:
            best_z, best_f = z, f
    if stalled:
        warnings.warn(f"horizon optimizer hit max_iter at step {step_index}", OptimizationStalled)
    return HorizonSolution(best_z.reshape(P, 2), best_f, total_it, stalled)


def check_controllability(traj: Trajectory, cfg: NmpcConfig) -> tuple[bool, float, float]:
    I_T, n_T = traj.final_output
    dev_I = abs(I_T - cfg.I_target)
    dev_n = abs(n_T - cfg.n_target)
    return bool(dev_I <= cfg.epsilon and dev_n <= cfg.epsilon), dev_I, dev_n


def run_nmpc(params: SystemParams, cfg: NmpcConfig, x0: ModelState | None = None) -> ControlResult:
    x = (initial_state(params) if x0 is None else x0).as_array()
    u_prev = ControlInput(0.0, 0.0)
    warm = None
    states = [x]
    applied = []
    history = []
    stalled = 0
    for k in range(cfg.steps):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", OptimizationStalled)
            sol = optimize_horizon(ModelState.from_array(x), u_prev, cfg, params, warm, k)
        stalled += sol.stalled
        u1 = float(sol.controls[0, 0])
        u2 = float(sol.controls[0, 1])
        x = _step_array(x, u1, u2, cfg.dt, params, True, substep_count(cfg.dt))
        states.append(x)
        applied.append((u1, u2))
        history.append(sol.objective)
        u_prev = ControlInput(u1, u2)
        warm = np.vstack([sol.controls[1:], sol.controls[-1:]])
    if stalled:
        log.warning("optimizer stalled on %d of %d steps", stalled, cfg.steps)
    times = cfg.dt * np.arange(cfg.steps + 1)
    traj = Trajectory(times, np.array(states), np.array(applied), N=float(params.N))
    ok, dev_I, dev_n = check_controllability(traj, cfg)
    I_T, n_T = traj.final_output
    return ControlResult(
        trajectory=traj,
        applied_controls=ControlSchedule.from_array(cfg.dt, applied),
        final_I=I_T,
        final_n=n_T,
        controllable=ok,
        objective_history=history,
        dev_I=dev_I,
        dev_n=dev_n,
        stalled_steps=stalled,
    )
