"""Steady states and stability of the constant-control system.

The disease-free state is a complete susceptible graph. It is stable for
``u1 > tau*(N-2) - gamma``. The endemic state comes from reducing the four
steady-state equations to one scalar equation in I:

* ``SI = (gamma/tau) I`` from the I equation,
* ``SS = (N-I)(N-I-1) - 2 u1 gamma I / (u2 tau)`` from the edge balance,
* ``II`` from the quadratic given by the II equation,

and scanning the remaining SI equation for sign changes. Hopf points are
where the quartic characteristic coefficients satisfy
``b0 b3^2 = b1 (b2 b3 - b1)`` with ``sign b1 = sign b3``.
"""

from __future__ import annotations

import enum
import math
from decimal import Decimal
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigError, MultipleRoots
from .model import ControlInput, ModelState, SystemParams, rhs_constant

GRID_POINTS = 2000
ROOT_RTOL = 1e-10


class RegionClass(str, enum.Enum):
    ENDEMIC_STABLE = "endemic_stable"
    OSCILLATORY = "oscillatory"
    DISEASE_FREE_STABLE = "disease_free_stable"


@dataclass(frozen=True)
class StabilityReport:
    state: ModelState
    eigenvalues: np.ndarray
    char_coeffs: tuple[float, float, float, float]
    classification: str


@dataclass(frozen=True)
class HopfValue:
    g: float
    signs_agree: bool


def disease_free_state(params: SystemParams) -> ModelState:
    N = float(params.N)
    return ModelState(0.0, 0.0, 0.0, N * (N - 1.0))


def disease_free_jacobian(params: SystemParams, u: ControlInput) -> np.ndarray:
    N, tau, g = float(params.N), params.tau, params.gamma
    u1, u2 = u.u1, u.u2
    return np.array(
        [
            [-g, tau, 0.0, 0.0],
            [0.0, -g + tau * (N - 2) - (tau + u1), g, 0.0],
            [0.0, 2 * tau, -2 * g, 0.0],
            # d/dI of u2*(N-I)(N-I-1) at I=0 is -u2*(2N-1)
            [-u2 * (2 * N - 1), 2 * g - 2 * tau * (N - 2), 0.0, -u2],
        ]
    )


def transcritical_u1(params: SystemParams) -> float:
    """Cutting rate above which the disease-free state is stable.

    Evaluated in decimal arithmetic on the shortest decimal form of the
    inputs, so tau=0.1, N=1000, gamma=1 gives exactly 98.8 rather than the
    binary-rounded 98.80000000000001.
    """
    tau, gamma = Decimal(repr(float(params.tau))), Decimal(repr(float(params.gamma)))
    return max(float(tau * (int(params.N) - 2) - gamma), 0.0)


def char_coeffs(J) -> tuple[float, float, float, float]:
    """Coefficients of ``l^4 - b3 l^3 + b2 l^2 - b1 l + b0`` as ``(b0, b1, b2, b3)``.

    b3 is the trace, b2 and b1 the sums of 2x2 and 3x3 principal minors,
    b0 the determinant.
    """
    J = np.asarray(J, dtype=float)
    idx = range(4)
    b3 = float(np.trace(J))
    b2 = sum(
        float(np.linalg.det(J[np.ix_(s, s)]))
        for s in ([i, j] for i in idx for j in idx if i < j)
    )
    b1 = sum(
        float(np.linalg.det(J[np.ix_(s, s)]))
        for s in ([i, j, k] for i in idx for j in idx for k in idx if i < j < k)
    )
    b0 = float(np.linalg.det(J))
    return b0, b1, b2, b3


def char_poly(coeffs, lam):
    b0, b1, b2, b3 = coeffs
    return (((lam - b3) * lam + b2) * lam - b1) * lam + b0


def quartic_roots(coeffs, polish_iters: int = 3) -> np.ndarray:
    """Roots of the characteristic quartic, Newton-polished on the polynomial."""
    b0, b1, b2, b3 = coeffs
    poly = np.array([1.0, -b3, b2, -b1, b0])
    dpoly = np.polyder(poly)
    roots = np.roots(poly).astype(complex)
    for _ in range(polish_iters):
        d = np.polyval(dpoly, roots)
        ok = d != 0
        step = np.zeros_like(roots)
        step[ok] = np.polyval(poly, roots[ok]) / d[ok]
        cand = roots - step
        better = np.abs(np.polyval(poly, cand)) < np.abs(np.polyval(poly, roots))
        roots = np.where(better, cand, roots)
    return roots


def eigenvalues(J) -> np.ndarray:
    return np.linalg.eigvals(np.asarray(J, dtype=float))


def classify_spectrum(eigs, tol: float | None = None) -> str:
    eigs = np.asarray(eigs)
    rho = float(np.max(np.abs(eigs))) if eigs.size else 0.0
    tol = 1e-8 * rho if tol is None else tol
    re = eigs.real
    if np.any(np.abs(re) <= tol):
        return "marginal"
    return "stable" if np.all(re < -tol) else "unstable"


def numeric_jacobian(
    x: ModelState,
    params: SystemParams,
    u: ControlInput,
    f: Callable[[np.ndarray], np.ndarray] | None = None,
) -> np.ndarray:
    """Central-difference Jacobian of the constant-control right-hand side.

    ``f`` replaces the model right-hand side (array in, array out). Steps
    are ``max(1e-6 |x_i|, 1e-6)`` rounded to a power of two, so that
    ``x_i +- h`` is exact whenever x_i is a moderate dyadic number.
    """
    if f is None:
        def f(arr):
            return rhs_constant(ModelState.from_array(arr), params, u).as_array()
    x0 = x.as_array()
    J = np.empty((4, 4))
    for i in range(4):
        h = 2.0 ** round(math.log2(max(1e-6 * abs(x0[i]), 1e-6)))
        xp = x0.copy()
        xm = x0.copy()
        xp[i] += h
        xm[i] -= h
        J[:, i] = (np.asarray(f(xp)) - np.asarray(f(xm))) / (2 * h)
    return J


def _ss_of_I(I, params: SystemParams, u: ControlInput):
    N = float(params.N)
    kappa = 2 * u.u1 * params.gamma / (u.u2 * params.tau)
    return (N - I) * (N - I - 1) - kappa * I


def _ii_of_I(I, SI, SS, params: SystemParams):
    """Positive-branch root of the quadratic for II; NaN where it is not real."""
    N = float(params.N)
    A = (SI + N - I) / (N * SI)
    B = params.gamma * (N - I) / (params.tau * N * SI**2)
    C = 2 * SI + SS
    D = (A - B * C) ** 2 - 4 * B * (1 - A * C)
    with np.errstate(invalid="ignore"):
        return np.where(D >= 0, (A - B * C + np.sqrt(np.where(D >= 0, D, 0.0))) / (2 * B), np.nan)


def _reduced_state(I, params: SystemParams, u: ControlInput):
    I = np.asarray(I, dtype=float)
    SI = params.gamma / params.tau * I
    SS = _ss_of_I(I, params, u)
    II = _ii_of_I(I, SI, SS, params)
    return SI, II, SS


def reduced_residual(I, params: SystemParams, u: ControlInput):
    """SI-equation residual along the reduced curve; NaN where the point is inadmissible."""
    N = float(params.N)
    tau, g = params.tau, params.gamma
    I = np.asarray(I, dtype=float)
    SI, II, SS = _reduced_state(I, params, u)
    tot = 2 * SI + II + SS
    with np.errstate(invalid="ignore", divide="ignore"):
        closure = (1 - N / tot) / (N - I)
        res = g * (II - SI) + tau * closure * (SS * SI - SI**2) - (tau + u.u1) * SI
    bad = ~np.isfinite(res) | ~(II >= 0) | ~(SS >= 0) | ~(tot > 0) | ~(I > 0) | ~(I < N)
    return np.where(bad, np.nan, res)


def _max_admissible_I(params: SystemParams, u: ControlInput) -> float:
    # SS(I) >= 0  <=>  s^2 + (k-1) s - k N <= 0 with s = N - I
    N = float(params.N)
    k = 2 * u.u1 * params.gamma / (u.u2 * params.tau)
    s = 0.5 * (-(k - 1) + math.sqrt((k - 1) ** 2 + 4 * k * N))
    return min(N - s, N - 1.0)


def _scan_grid(hi: float, npts: int = GRID_POINTS) -> np.ndarray:
    # half geometric (small-prevalence roots), half linear
    geo = np.geomspace(hi * 1e-12, hi, npts // 2, endpoint=False)
    lin = np.linspace(0.0, hi, npts - npts // 2 + 1, endpoint=False)[1:]
    return np.unique(np.concatenate([geo, lin]))


def _bisect(fun, a, b, fa, rtol=ROOT_RTOL, maxiter=200):
    for _ in range(maxiter):
        m = 0.5 * (a + b)
        fm = fun(m)
        if not np.isfinite(fm):
            break
        if fm == 0:
            return m
        if np.sign(fm) == np.sign(fa):
            a, fa = m, fm
        else:
            b = m
        if b - a <= rtol * max(abs(m), 1e-300):
            break
    return 0.5 * (a + b)


def state_scale(x: ModelState) -> float:
    return max(float(np.max(np.abs(x.as_array()))), 1.0)


def _polish(x: ModelState, params: SystemParams, u: ControlInput) -> ModelState:
    # a few Newton steps on the full 4-d system; keep only improvements
    best = x
    best_res = np.linalg.norm(rhs_constant(x, params, u).as_array())
    for _ in range(3):
        J = numeric_jacobian(best, params, u)
        F = rhs_constant(best, params, u).as_array()
        try:
            step = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            break
        cand = ModelState.from_array(best.as_array() + step)
        if min(cand.as_array()) <= 0:
            break
        res = np.linalg.norm(rhs_constant(cand, params, u).as_array())
        if not res < best_res:
            break
        best, best_res = cand, res
    return best


def endemic_state(params: SystemParams, u: ControlInput, residual_rtol: float = 1e-6) -> ModelState | None:
    """Unique all-positive endemic equilibrium, or None when there is none."""
    if not params.tau > 0 or not u.u2 > 0:
        raise ConfigError("endemic_state requires tau > 0 and u2 > 0")
    hi = _max_admissible_I(params, u)
    if not hi > 0:
        return None
    grid = _scan_grid(hi)
    vals = reduced_residual(grid, params, u)

    def fun(I):
        return float(reduced_residual(I, params, u))

    found = []
    for i in range(len(grid) - 1):
        fa, fb = vals[i], vals[i + 1]
        if not (np.isfinite(fa) and np.isfinite(fb)) or np.sign(fa) == np.sign(fb):
            continue
        I = _bisect(fun, grid[i], grid[i + 1], fa)
        SI, II, SS = (float(v) for v in _reduced_state(I, params, u))
        x = ModelState(float(I), SI, II, SS)
        if min(x.as_array()) <= 0:
            continue
        x = _polish(x, params, u)
        res = np.max(np.abs(rhs_constant(x, params, u).as_array()))
        if res <= residual_rtol * state_scale(x):
            found.append(x)
    if len(found) > 1:
        raise MultipleRoots(f"{len(found)} endemic states at u={u}: {found}")
    return found[0] if found else None


def stability_report(x: ModelState, params: SystemParams, u: ControlInput) -> StabilityReport:
    J = numeric_jacobian(x, params, u)
    eigs = eigenvalues(J)
    return StabilityReport(x, eigs, char_coeffs(J), classify_spectrum(eigs))


def hopf_function(J) -> HopfValue:
    b0, b1, b2, b3 = char_coeffs(J)
    g = b0 * b3**2 - b1 * (b2 * b3 - b1)
    return HopfValue(g, bool(np.sign(b1) == np.sign(b3)))


def hopf_residual(params: SystemParams, u: ControlInput) -> HopfValue | None:
    x = endemic_state(params, u)
    if x is None:
        return None
    return hopf_function(numeric_jacobian(x, params, u))


def _hopf_g(params, u1, u2):
    try:
        hv = hopf_residual(params, ControlInput(u1, u2))
    except MultipleRoots:
        return None
    if hv is None or not hv.signs_agree:
        return None
    return hv.g


def hopf_curve(
    params: SystemParams,
    u1_grid: Sequence[float],
    u2_range: tuple[float, float],
    scan_points: int = 40,
    rtol: float = 1e-8,
) -> list[tuple[float, float]]:
    """Hopf points ``(u1, u2*)``: one per u1 whose log-spaced u2 scan brackets a zero of g."""
    lo, hi = u2_range
    if not 0 < lo < hi:
        raise ConfigError(f"u2 range must satisfy 0 < lo < hi, got {u2_range}")
    u2s = np.geomspace(lo, hi, scan_points)
    curve = []
    for u1 in u1_grid:
        gs = [_hopf_g(params, u1, u2) for u2 in u2s]
        for i in range(len(u2s) - 1):
            ga, gb = gs[i], gs[i + 1]
            if ga is None or gb is None or np.sign(ga) == np.sign(gb):
                continue
            a, b = u2s[i], u2s[i + 1]
            while b - a > rtol * b:
                m = math.sqrt(a * b)
                gm = _hopf_g(params, u1, m)
                if gm is None:
                    break
                if np.sign(gm) == np.sign(ga):
                    a, ga = m, gm
                else:
                    b = m
            curve.append((float(u1), float(math.sqrt(a * b))))
            break
    return curve


def classify_region(params: SystemParams, u: ControlInput) -> RegionClass:
    if not u.u2 > 0:
        raise ConfigError("classify_region requires u2 > 0")
    if u.u1 > transcritical_u1(params):
        return RegionClass.DISEASE_FREE_STABLE
    x = endemic_state(params, u)
    if x is None:
        # disease-free state unstable and no endemic state to settle on
        return RegionClass.OSCILLATORY
    if stability_report(x, params, u).classification == "stable":
        return RegionClass.ENDEMIC_STABLE
    return RegionClass.OSCILLATORY


def region_map(
    params: SystemParams, u1_values: Sequence[float], u2_values: Sequence[float]
) -> list[tuple[float, float, RegionClass]]:
    return [(float(a), float(b), classify_region(params, ControlInput(a, b))) for a in u1_values for b in u2_values]
