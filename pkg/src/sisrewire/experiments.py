"""Parameter sweeps, controllability thresholds and named scenarios.

Every scenario writes CSV tables plus a ``summary.json`` recording the
effective parameters, seeds and verdicts. Independent runs can be farmed
out to a process pool; results always come back in input order.
"""

from __future__ import annotations

import dataclasses
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from . import io
from .equilibria import (
    RegionClass,
    classify_region,
    endemic_state,
    hopf_curve,
    region_map,
    transcritical_u1,
)
from .errors import BracketInvalid, ConfigError, NoAchievableTarget, SisRewireError, UnknownScenario
from .integrator import Trajectory, constant_run
from .model import ControlInput, SystemParams
from .nmpc import ControlResult, NmpcConfig, run_nmpc

log = logging.getLogger(__name__)

PARAM_FIELDS = tuple(f.name for f in dataclasses.fields(SystemParams))
CFG_FIELDS = tuple(f.name for f in dataclasses.fields(NmpcConfig))

DEFAULT_LAMBDAS = (1e4, 1.0, 1.0, 1.0)

# Damping sets for the three-curve comparison at tau=1, M1=7.8, M2=0.5.
DAMPING_SETS = {
    # increments penalised far more than prevalence and connectivity
    "solid": (10.0, 1e4, 1.0, 1e4),
    # prevalence only
    "dashed": (1e4, 0.0, 0.0, 0.0),
    # connectivity only
    "dotted": (0.0, 0.0, 1.0, 0.0),
}

RESURGENCE_CONTROL = ControlInput(20.0, 3e-3)


def parallel_map(fn: Callable, items: Sequence, workers: int = 1) -> list:
    """``[fn(x) for x in items]``, optionally on a process pool, in input order."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------- sweeps


@dataclass(frozen=True)
class SweepSpec:
    base_params: SystemParams
    base_cfg: NmpcConfig
    axis: str
    values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if self.axis not in PARAM_FIELDS + CFG_FIELDS:
            raise ConfigError(f"unknown sweep axis {self.axis!r}")
        if not self.values:
            raise ConfigError("sweep values must be nonempty")
        if any(b < a for a, b in zip(self.values, self.values[1:])):
            raise ConfigError("sweep values must be sorted ascending")

    def point(self, value: float) -> tuple[SystemParams, NmpcConfig]:
        if self.axis in PARAM_FIELDS:
            return dataclasses.replace(self.base_params, **{self.axis: value}), self.base_cfg
        return self.base_params, self.base_cfg.replace(**{self.axis: value})


@dataclass
class SweepRow:
    value: float
    I_T: float = math.nan
    n_T: float = math.nan
    controllable: bool | None = None
    error: str = ""


def _sweep_point(job) -> SweepRow:
    spec, value, controlled = job
    try:
        params, cfg = spec.point(value)
        if controlled:
            res = run_nmpc(params, cfg)
            return SweepRow(value, res.final_I, res.final_n, res.controllable)
        traj = constant_run(params, ControlInput(0.0, 0.0), cfg.T, cfg.dt)
        I_T, n_T = traj.final_output
        return SweepRow(value, I_T, n_T, None)
    except SisRewireError as exc:
        log.warning("sweep point %s=%g failed: %s", spec.axis, value, exc)
        return SweepRow(value, error=f"{type(exc).__name__}: {exc}")


def sweep(spec: SweepSpec, controlled: bool, workers: int = 1) -> list[SweepRow]:
    return parallel_map(_sweep_point, [(spec, v, controlled) for v in spec.values], workers)


def sweep_tau(spec: SweepSpec, controlled: bool, workers: int = 1) -> list[SweepRow]:
    """Final (I, n) for each tau; uncontrolled rows integrate with zero control."""
    if spec.axis != "tau":
        raise ConfigError(f"sweep_tau needs axis 'tau', got {spec.axis!r}")
    return sweep(spec, controlled, workers)


# ------------------------------------------------------ critical bounds


@dataclass(frozen=True)
class CriticalBoundResult:
    """Smallest controllable M1 to within ``bisection_tolerance``.

    ``lower`` is the largest tested bound that failed and ``upper`` the
    smallest that succeeded; ``M1_critical`` is their midpoint. When the
    system is already controllable at the bottom of the search interval,
    ``at_floor`` is set and ``lower`` is NaN.
    """

    tau: float
    M2: float
    M1_critical: float
    bisection_tolerance: float
    lower: float
    upper: float
    at_floor: bool = False
    verified: bool = True
    runs: int = 0


def _controllable(params: SystemParams, cfg: NmpcConfig) -> bool:
    return run_nmpc(params, cfg).controllable


def critical_M1(
    tau: float,
    M2: float,
    base_cfg: NmpcConfig,
    params: SystemParams,
    search: tuple[float, float, float] = (0.1, 20.0, 0.1),
) -> CriticalBoundResult:
    lo, hi, tol = search
    if not 0 < lo < hi or not tol > 0:
        raise ConfigError(f"search must satisfy 0 < lo < hi and tol > 0, got {search}")
    params = dataclasses.replace(params, tau=tau)
    pred = lambda m1: _controllable(params, base_cfg.replace(M1=m1, M2=M2))  # noqa: E731
    runs = 1
    if not pred(hi):
        raise BracketInvalid(f"not controllable at M1={hi} (tau={tau}, M2={M2})")
    runs += 1
    if pred(lo):
        # already controllable with the weakest bound searched
        return CriticalBoundResult(tau, M2, lo, tol, math.nan, lo, at_floor=True, runs=runs)
    a, b = lo, hi
    while b - a > tol:
        m = 0.5 * (a + b)
        runs += 1
        if pred(m):
            b = m
        else:
            a = m
    # the controllability predicate is deterministic; re-running both ends
    # guards against any hidden state leaking between runs
    verified = (not pred(a)) and pred(b)
    runs += 2
    if not verified:
        log.warning("critical M1 bracket [%g, %g] failed re-verification", a, b)
    return CriticalBoundResult(tau, M2, 0.5 * (a + b), tol, a, b, verified=verified, runs=runs)


def _critical_point(job):
    tau, M2, cfg, params, search, max_hi = job
    lo, hi, tol = search
    while True:
        try:
            return critical_M1(tau, M2, cfg, params, (lo, hi, tol))
        except BracketInvalid:
            if hi * 2 > max_hi:
                raise
            hi *= 2


def critical_curves(
    taus: Sequence[float],
    M2s: Sequence[float],
    cfg: NmpcConfig,
    params: SystemParams,
    search: tuple[float, float, float] = (0.1, 20.0, 0.1),
    max_hi: float = 320.0,
    workers: int = 1,
) -> list[dict[str, Any]]:
    """M1^c over the tau x M2 grid; the upper search bound doubles until it brackets."""
    jobs = [(float(t), float(m2), cfg, params, search, max_hi) for m2 in M2s for t in taus]
    return parallel_map(_safe_critical, jobs, workers)


def _safe_critical(job):
    try:
        r = _critical_point(job)
        return {"tau": r.tau, "M2": r.M2, "M1_critical": r.M1_critical, "lower": r.lower,
                "upper": r.upper, "at_floor": r.at_floor, "verified": r.verified, "error": ""}
    except SisRewireError as exc:
        return {"tau": job[0], "M2": job[1], "M1_critical": math.nan, "lower": math.nan,
                "upper": math.nan, "at_floor": False, "verified": False,
                "error": f"{type(exc).__name__}: {exc}"}


def nondecreasing_violations(xs: Sequence[float], ys: Sequence[float]) -> list[tuple[float, float]]:
    """Adjacent pairs (sorted by x) where y drops."""
    pts = sorted(zip(xs, ys))
    return [(a[0], b[0]) for a, b in zip(pts, pts[1:]) if b[1] < a[1]]


# ---------------------------------------------------- achievable targets


def achievable_target(
    M1: float,
    M2: float,
    tau: float,
    cfg: NmpcConfig,
    params: SystemParams | None = None,
    tol: float = 0.1,
    n_min: float = 0.1,
) -> float:
    """Highest target mean degree reachable (with I* unchanged) to within ``tol``."""
    params = dataclasses.replace(params or SystemParams(), tau=tau)
    base = cfg.replace(M1=M1, M2=M2)
    n_max = float(params.n0)
    pred = lambda n: _controllable(params, base.replace(n_target=n))  # noqa: E731
    if pred(n_max):
        return n_max
    if not pred(n_min):
        raise NoAchievableTarget(f"no target n* >= {n_min} reachable at M1={M1}, M2={M2}, tau={tau}")
    a, b = n_min, n_max
    while b - a > tol:
        m = 0.5 * (a + b)
        if pred(m):
            a = m
        else:
            b = m
    return a


def _table2_point(job):
    M1, M2, tau, cfg, params = job
    try:
        return achievable_target(M1, M2, tau, cfg, params)
    except NoAchievableTarget:
        return math.nan


def table2(
    M1s: Sequence[float] = (7.8, 6.0, 4.5, 3.5),
    M2: float = 0.5,
    tau: float = 1.0,
    cfg: NmpcConfig | None = None,
    params: SystemParams | None = None,
    workers: int = 1,
) -> list[tuple[float, float]]:
    cfg = cfg or NmpcConfig(M1=1.0, M2=M2)
    params = params or SystemParams()
    vals = parallel_map(_table2_point, [(m, M2, tau, cfg, params) for m in M1s], workers)
    return list(zip(map(float, M1s), vals))


# --------------------------------------------------- constant-control checks


@dataclass(frozen=True)
class SpotCheck:
    u1: float
    u2: float
    region: RegionClass
    agrees: bool
    I_final: float
    I_endemic: float
    early_amplitude: float
    late_amplitude: float


def spot_check_region(params: SystemParams, u: ControlInput, T: float = 200.0, dt: float = 0.1) -> SpotCheck:
    """Compare the linear classification with a long constant-control run.

    Amplitudes are ``max |I(t) - I_e|`` over the windows [T/2, 3T/4] and
    [3T/4, T]. Disease-free cells must end with I < 1e-3. Stable endemic
    cells must have settled (|I(T) - I(T - 10)| < 1e-3 N) or be shrinking
    towards I_e. Oscillatory cells must keep a sustained excursion: the late
    amplitude is at least half the early one, or at least half of I_e.
    """
    region = classify_region(params, u)
    traj = constant_run(params, u, T, dt)
    t, I = traj.times, traj.I
    x = endemic_state(params, u) if region is not RegionClass.DISEASE_FREE_STABLE else None
    Ie = x.I if x is not None else 0.0

    def amp(a, b):
        m = (t >= a) & (t <= b)
        return float(np.max(np.abs(I[m] - Ie)))

    early, late = amp(0.5 * T, 0.75 * T), amp(0.75 * T, T)
    if region is RegionClass.DISEASE_FREE_STABLE:
        ok = I[-1] < 1e-3
    elif region is RegionClass.ENDEMIC_STABLE:
        back = I[np.searchsorted(t, T - 10.0)]
        ok = abs(I[-1] - back) < 1e-3 * params.N or late < early
    else:
        ok = late >= 0.5 * early or late >= 0.5 * Ie
    return SpotCheck(float(u.u1), float(u.u2), region, bool(ok), float(I[-1]), Ie, early, late)


def spot_check_cells(cells: Sequence[tuple[float, float, RegionClass]], k: int = 10, seed: int = 42):
    """Pick ``k`` cells, at least one per class present, deterministically."""
    rng = np.random.default_rng(seed)
    by_class: dict[RegionClass, list[int]] = {}
    for i, c in enumerate(cells):
        by_class.setdefault(c[2], []).append(i)
    chosen = [int(rng.choice(idx)) for _, idx in sorted(by_class.items(), key=lambda kv: kv[0].value)]
    rest = [i for i in range(len(cells)) if i not in chosen]
    extra = rng.choice(rest, size=min(max(k - len(chosen), 0), len(rest)), replace=False)
    return [cells[i] for i in sorted(chosen + [int(e) for e in extra])]


@dataclass(frozen=True)
class ResurgenceReport:
    dip_time: float
    rise_time: float
    min_I: float

    @property
    def resurges(self) -> bool:
        return math.isfinite(self.dip_time) and math.isfinite(self.rise_time)


def resurgence_report(traj: Trajectory, dip: float = 1.0, rise: float = 5.0) -> ResurgenceReport:
    """First time I drops below ``dip`` and the first later time it exceeds ``rise``."""
    I, t = traj.I, traj.times
    below = np.nonzero(I < dip)[0]
    if below.size == 0:
        return ResurgenceReport(math.nan, math.nan, float(I.min()))
    k = below[0]
    above = np.nonzero(I[k:] > rise)[0]
    rise_t = float(t[k + above[0]]) if above.size else math.nan
    return ResurgenceReport(float(t[k]), rise_t, float(I[k:].min()))


# --------------------------------------------------------------- scenarios


@dataclass
class ScenarioContext:
    params: SystemParams
    cfg: NmpcConfig
    options: dict[str, Any]
    out_dir: Path
    workers: int
    plot: bool
    files: list[str] = field(default_factory=list)

    def csv(self, name: str, header, rows) -> None:
        io.write_csv(self.out_dir / name, header, rows)
        self.files.append(name)

    def trajectory(self, name: str, traj: Trajectory, title: str = "") -> None:
        io.write_trajectory(self.out_dir / name, traj)
        self.files.append(name)
        if self.plot:
            svg = name.rsplit(".", 1)[0] + ".svg"
            from .plot import line_plot

            line_plot(self.out_dir / svg, traj.times, {"I(t)": {"I": traj.I}, "n(t)": {"n": traj.n}}, title)
            self.files.append(svg)


def _nmpc_summary(res: ControlResult) -> dict[str, Any]:
    return {
        "final_I": res.final_I,
        "final_n": res.final_n,
        "controllable": res.controllable,
        "dev_I": res.dev_I,
        "dev_n": res.dev_n,
        "stalled_steps": res.stalled_steps,
    }


def _s_regionmap(ctx: ScenarioContext) -> dict:
    o = ctx.options
    u1s = np.linspace(o["u1_min"], o["u1_max"], int(o["u1_points"]))
    u2s = np.geomspace(o["u2_min"], o["u2_max"], int(o["u2_points"]))
    cells = region_map(ctx.params, u1s, u2s)
    ctx.csv("regions.csv", ("u1", "u2", "class"), cells)
    hopf_u1 = np.linspace(o["hopf_u1_min"], o["hopf_u1_max"], int(o["hopf_points"]))
    curve = hopf_curve(ctx.params, hopf_u1, (o["hopf_u2_min"], o["hopf_u2_max"]))
    ctx.csv("hopf.csv", ("u1", "u2"), curve)
    counts = {c.value: sum(1 for x in cells if x[2] is c) for c in RegionClass}
    checks = [spot_check_region(ctx.params, ControlInput(a, b), o["spot_T"]) for a, b, _ in
              spot_check_cells(cells, int(o["spot_checks"]), ctx.cfg.seed)]
    ctx.csv("spot_checks.csv", ("u1", "u2", "class", "agrees", "I_final", "I_endemic", "early_amp", "late_amp"),
            [(c.u1, c.u2, c.region, c.agrees, c.I_final, c.I_endemic, c.early_amplitude, c.late_amplitude)
             for c in checks])
    if ctx.plot:
        from .plot import region_plot

        region_plot(ctx.out_dir / "regions.svg", [(a, b, c.value) for a, b, c in cells], "regime map")
        ctx.files.append("regions.svg")
    return {
        "transcritical_u1": transcritical_u1(ctx.params),
        "region_counts": counts,
        "hopf_points": len(curve),
        "spot_checks_agree": all(c.agrees for c in checks),
    }


def _s_resurgence(ctx: ScenarioContext) -> dict:
    o = ctx.options
    u = ControlInput(o["u1"], o["u2"])
    traj = constant_run(ctx.params, u, o["T_sim"], ctx.cfg.dt)
    ctx.trajectory("trajectory.csv", traj, "resurgence")
    rep = resurgence_report(traj)
    return {"dip_time": rep.dip_time, "rise_time": rep.rise_time, "min_I": rep.min_I, "resurges": rep.resurges}


def _s_fig3(ctx: ScenarioContext) -> dict:
    taus = sorted(ctx.options["tau_grid"])
    spec = SweepSpec(ctx.params, ctx.cfg, "tau", taus)
    free = sweep_tau(spec, controlled=False, workers=ctx.workers)
    ctl = sweep_tau(spec, controlled=True, workers=ctx.workers)
    ctx.csv("tau_sweep.csv", ("tau", "I_T_uncontrolled", "n_T_uncontrolled", "I_T_controlled", "n_T_controlled",
                              "controllable", "error"),
            [(a.value, a.I_T, a.n_T, b.I_T, b.n_T, b.controllable, (a.error + " " + b.error).strip())
             for a, b in zip(free, ctl)])
    return {"controllable_taus": [r.value for r in ctl if r.controllable]}


def _single_nmpc(ctx: ScenarioContext, name: str, cfg: NmpcConfig, params: SystemParams | None = None):
    res = run_nmpc(params or ctx.params, cfg)
    ctx.trajectory(f"{name}.csv", res.trajectory, name)
    return res


def _s_fig4(ctx: ScenarioContext) -> dict:
    return _nmpc_summary(_single_nmpc(ctx, "trajectory", ctx.cfg))


def _s_fig6(ctx: ScenarioContext) -> dict:
    out = {}
    for n_star in ctx.options["n_targets"]:
        res = _single_nmpc(ctx, f"target_{n_star:g}", ctx.cfg.replace(n_target=n_star))
        out[f"{n_star:g}"] = _nmpc_summary(res)
    return {"by_target": out}


def _stepsize_job(job):
    params, cfg = job
    return run_nmpc(params, cfg)


def _s_stepsize(ctx: ScenarioContext) -> dict:
    dts = list(ctx.options["dt_grid"])
    cfgs = [ctx.cfg.replace(dt=dt) for dt in dts]
    results = parallel_map(_stepsize_job, [(ctx.params, c) for c in cfgs], ctx.workers)
    rows, out = [], {}
    for dt, cfg, res in zip(dts, cfgs, results):
        ctx.trajectory(f"dt_{dt:g}.csv", res.trajectory, f"dt={dt:g}")
        rows.append((dt, cfg.horizon, res.final_I, res.final_n, res.controllable))
        out[f"{dt:g}"] = _nmpc_summary(res) | {"P": cfg.horizon}
    ctx.csv("stepsize.csv", ("dt", "P", "I_T", "n_T", "controllable"), rows)
    return {"by_dt": out}


def _s_damping(ctx: ScenarioContext) -> dict:
    names = list(DAMPING_SETS)
    cfgs = [ctx.cfg.replace(lambdas=DAMPING_SETS[n]) for n in names]
    results = parallel_map(_stepsize_job, [(ctx.params, c) for c in cfgs], ctx.workers)
    rows, out = [], {}
    for name, res in zip(names, results):
        ctx.trajectory(f"damping_{name}.csv", res.trajectory, name)
        lam = DAMPING_SETS[name]
        rows.append((name, *lam, res.final_I, res.final_n, float(res.trajectory.I.max()), res.controllable))
        out[name] = _nmpc_summary(res) | {"lambdas": lam, "max_I": float(res.trajectory.I.max())}
    ctx.csv("damping.csv", ("set", "lambda1", "lambda2", "lambda3", "lambda4", "I_T", "n_T", "max_I", "controllable"),
            rows)
    return {"by_set": out}


def _s_table2(ctx: ScenarioContext) -> dict:
    rows = table2(ctx.options["M1_grid"], ctx.cfg.M2, ctx.params.tau, ctx.cfg, ctx.params, ctx.workers)
    ctx.csv("table2.csv", ("M1", "n_star"), rows)
    viol = nondecreasing_violations([r[0] for r in rows], [r[1] for r in rows])
    return {"rows": rows, "monotone_violations": viol}


def _curve_rows(curves):
    keys = ("tau", "M2", "M1_critical", "lower", "upper", "at_floor", "verified", "error")
    return keys, [tuple(c[k] for k in keys) for c in curves]


def _s_fig5_left(ctx: ScenarioContext) -> dict:
    o = ctx.options
    curves = critical_curves(o["tau_grid"], o["M2_grid"], ctx.cfg, ctx.params, workers=ctx.workers)
    ctx.csv("critical_curves.csv", *_curve_rows(curves))
    viol = {}
    for m2 in o["M2_grid"]:
        pts = [(c["tau"], c["M1_critical"]) for c in curves if c["M2"] == m2 and math.isfinite(c["M1_critical"])]
        viol[f"{m2:g}"] = nondecreasing_violations([p[0] for p in pts], [p[1] for p in pts])
    return {"monotone_violations": viol}


def _s_fig5_right(ctx: ScenarioContext) -> dict:
    o = ctx.options
    curves = critical_curves(o["tau_grid"], o["M2_grid"], ctx.cfg, ctx.params, workers=ctx.workers)
    ctx.csv("critical_vs_M2.csv", *_curve_rows(curves))
    return {"points": len(curves)}


def _s_critical(ctx: ScenarioContext) -> dict:
    o = ctx.options
    r = critical_M1(ctx.params.tau, ctx.cfg.M2, ctx.cfg, ctx.params, (o["lo"], o["hi"], o["tol"]))
    ctx.csv("critical.csv", ("tau", "M2", "M1_critical", "lower", "upper", "at_floor", "verified"),
            [(r.tau, r.M2, r.M1_critical, r.lower, r.upper, r.at_floor, r.verified)])
    return {"result": r}


_TAU_FIG3 = (0.01, 0.02, 0.04) + tuple(round(0.05 * k, 2) for k in range(1, 41))
_TAU_FIG5 = tuple(round(0.1 * k, 1) for k in range(1, 31))
_HOPF_DEFAULTS = {"hopf_u1_min": 2.0, "hopf_u1_max": 96.0, "hopf_points": 30, "hopf_u2_min": 1e-6, "hopf_u2_max": 100.0}


@dataclass(frozen=True)
class Scenario:
    run: Callable[[ScenarioContext], dict]
    params: Mapping[str, Any]
    cfg: Mapping[str, Any]
    options: Mapping[str, Any]


SCENARIOS: dict[str, Scenario] = {
    "regionmap": Scenario(
        _s_regionmap, {"tau": 0.1}, {"M1": 1.0, "M2": 0.0},
        {"u1_min": 1.0, "u1_max": 120.0, "u1_points": 20, "u2_min": 1e-3, "u2_max": 10.0, "u2_points": 20,
         "spot_checks": 10, "spot_T": 200.0, **_HOPF_DEFAULTS},
    ),
    "resurgence": Scenario(
        _s_resurgence, {"tau": 0.1}, {"M1": 1.0, "M2": 0.0},
        {"u1": RESURGENCE_CONTROL.u1, "u2": RESURGENCE_CONTROL.u2, "T_sim": 200.0},
    ),
    "fig3": Scenario(_s_fig3, {}, {"M1": 1.0, "M2": 0.001}, {"tau_grid": _TAU_FIG3}),
    "fig4": Scenario(_s_fig4, {"tau": 2.0}, {"M1": 18.0, "M2": 0.001}, {}),
    "fig5-left": Scenario(
        _s_fig5_left, {}, {"M1": 1.0, "M2": 0.5}, {"tau_grid": _TAU_FIG5, "M2_grid": (0.001, 0.1, 0.5)}
    ),
    "fig5-right": Scenario(
        _s_fig5_right, {}, {"M1": 1.0, "M2": 0.5},
        {"tau_grid": (0.5, 1.0, 2.0), "M2_grid": tuple(float(v) for v in np.geomspace(1e-3, 1.0, 7))},
    ),
    "fig6": Scenario(_s_fig6, {"tau": 1.0}, {"M1": 6.0, "M2": 0.5}, {"n_targets": (10.0, 7.5)}),
    "stepsize": Scenario(
        _s_stepsize, {"tau": 1.0}, {"M1": 7.8, "M2": 0.5, "horizon_time": 0.5}, {"dt_grid": (0.2, 1.0, 5.0, 10.0)}
    ),
    "damping": Scenario(_s_damping, {"tau": 1.0}, {"M1": 7.8, "M2": 0.5}, {}),
    "table2": Scenario(_s_table2, {"tau": 1.0}, {"M1": 7.8, "M2": 0.5}, {"M1_grid": (7.8, 6.0, 4.5, 3.5)}),
    "critical": Scenario(_s_critical, {"tau": 1.0}, {"M1": 7.8, "M2": 0.5}, {"lo": 0.1, "hi": 20.0, "tol": 0.1}),
}
ALIASES = {"fig1": "regionmap", "fig2": "resurgence", "fig7": "stepsize", "fig8": "damping"}


def scenario_names() -> list[str]:
    return sorted(SCENARIOS) + sorted(ALIASES)


def _split_overrides(sc: Scenario, overrides: Mapping[str, Any]):
    p, c, o = dict(sc.params), dict(sc.cfg), dict(sc.options)
    for key, val in overrides.items():
        if key in PARAM_FIELDS:
            p[key] = val
        elif key in CFG_FIELDS:
            c[key] = val
        elif key in o:
            o[key] = val
        else:
            raise ConfigError(f"unknown override {key!r} for this scenario")
    return p, c, o


def scenario_run(
    name: str,
    overrides: Mapping[str, Any] | None = None,
    out_dir: Path | str = "out",
    workers: int = 1,
    plot: bool = False,
) -> dict[str, Any]:
    """Run a named study and write its artifacts under ``out_dir``.

    ``overrides`` maps bare field names (``tau``, ``M1``, ``lambdas``, ...)
    or scenario options (``dt_grid``, ``tau_grid``, ...) to values.
    Returns the summary that is also written to ``summary.json``.
    """
    key = ALIASES.get(name, name)
    if key not in SCENARIOS:
        raise UnknownScenario(f"unknown scenario {name!r}; known: {', '.join(scenario_names())}")
    sc = SCENARIOS[key]
    p, c, o = _split_overrides(sc, overrides or {})
    params = SystemParams(**p)
    cfg = NmpcConfig(**c)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ctx = ScenarioContext(params, cfg, o, out, max(1, int(workers)), plot)
    t0 = time.perf_counter()
    result = sc.run(ctx)
    summary = {
        "scenario": key,
        "params": params,
        "nmpc": cfg,
        "options": o,
        "seed": cfg.seed,
        "results": result,
        "files": ctx.files + ["summary.json"],
        "elapsed_s": time.perf_counter() - t0,
    }
    io.write_json(out / "summary.json", summary)
    return io.to_jsonable(summary)

