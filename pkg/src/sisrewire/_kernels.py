"""Compiled inner loops: pairwise right-hand side, RK4 stepping, horizon rollouts.

Parameter vectors are plain float arrays so the kernels stay monomorphic.
Functions that hand ``pairwise_rhs`` to ``rk4_integrate`` cannot be cached
on disk by numba and compile once per process.

    p = [N, tau, gamma, u1, u2, nmpc_mode, literal_ss]
"""

import numpy as np
from numba import njit

N_GUARD = 1e-9

P_N, P_TAU, P_GAMMA, P_U1, P_U2, P_MODE, P_LITERAL = range(7)


@njit(cache=True)
def closures(I, SI, II, SS, N):
    n = (2.0 * SI + SS + II) / N
    S = N - I
    if n <= N_GUARD or S <= N_GUARD:
        return 0.0, 0.0
    f = (n - 1.0) / n / S
    return f * SS * SI, f * SI * SI


@njit(cache=True)
def pairwise_rhs(x, p):
    N = p[P_N]
    tau = p[P_TAU]
    gamma = p[P_GAMMA]
    u1 = p[P_U1]
    u2 = p[P_U2]
    I, SI, II, SS = x[0], x[1], x[2], x[3]
    SSI, ISI = closures(I, SI, II, SS, N)
    S = N - I
    out = np.empty(4)
    out[0] = tau * SI - gamma * I
    out[1] = gamma * (II - SI) + tau * (SSI - ISI - SI) - u1 * SI
    out[2] = -2.0 * gamma * II + 2.0 * tau * (ISI + SI)
    if p[P_LITERAL] != 0.0 and p[P_MODE] != 0.0:
        recovery = gamma * SI
    else:
        recovery = 2.0 * gamma * SI
    if p[P_MODE] != 0.0:
        ctl = max(u2, 0.0) * (S * (S - 1.0) - SS) + min(u2, 0.0) * SS
    else:
        ctl = u2 * (S * (S - 1.0) - SS)
    out[3] = recovery - 2.0 * tau * SSI + ctl
    return out


@njit(cache=True)
def decay_rhs(x, p):
    # dx/dt = -x, used to sanity-check the integrator
    return -x


@njit(cache=True)
def rk4_integrate(f, x, p, dt, nsub, clamp):
    """Advance ``x`` by ``dt`` with ``nsub`` classical RK4 substeps.

    Returns the new state and the largest clamping correction applied.
    """
    h = dt / nsub
    y = x.copy()
    clamped = 0.0
    for _ in range(nsub):
        k1 = f(y, p)
        k2 = f(y + 0.5 * h * k1, p)
        k3 = f(y + 0.5 * h * k2, p)
        k4 = f(y + h * k3, p)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if clamp:
            for i in range(y.shape[0]):
                if y[i] < 0.0:
                    clamped = max(clamped, -y[i])
                    y[i] = 0.0
            N = p[P_N]
            if y[0] > N:
                clamped = max(clamped, y[0] - N)
                y[0] = N
    return y, clamped


@njit
def step_pairwise(x, sysp, u1, u2, dt, nsub, nmpc):
    p = np.empty(7)
    p[P_N] = sysp[0]
    p[P_TAU] = sysp[1]
    p[P_GAMMA] = sysp[2]
    p[P_U1] = u1
    p[P_U2] = u2
    p[P_MODE] = 1.0 if nmpc else 0.0
    p[P_LITERAL] = sysp[3]
    return rk4_integrate(pairwise_rhs, x, p, dt, nsub, True)


@njit(cache=True)
def _fill_residuals(r, j, x, u1, u2, prev1, prev2, N, sqrt_lam, n_target):
    n = (2.0 * x[1] + x[2] + x[3]) / N
    r[4 * j] = sqrt_lam[0] * x[0]
    r[4 * j + 1] = sqrt_lam[1] * (u1 - prev1)
    r[4 * j + 2] = sqrt_lam[2] * (n - n_target)
    r[4 * j + 3] = sqrt_lam[3] * (u2 - prev2)


@njit
def horizon_residuals(useq, x0, uprev, sysp, dt, nsub, sqrt_lam, n_target, literal_cost):
    """Residual vector whose squared norm is the horizon objective.

    ``sysp = [N, tau, gamma, literal_ss]``. With ``literal_cost`` the output
    term at slot j is taken before applying u(k+j|k) rather than after.
    """
    P = useq.shape[0]
    N = sysp[0]
    r = np.empty(4 * P)
    x = x0.copy()
    prev1 = uprev[0]
    prev2 = uprev[1]
    for j in range(P):
        u1 = useq[j, 0]
        u2 = useq[j, 1]
        if literal_cost:
            _fill_residuals(r, j, x, u1, u2, prev1, prev2, N, sqrt_lam, n_target)
            x, _ = step_pairwise(x, sysp, u1, u2, dt, nsub, True)
        else:
            x, _ = step_pairwise(x, sysp, u1, u2, dt, nsub, True)
            _fill_residuals(r, j, x, u1, u2, prev1, prev2, N, sqrt_lam, n_target)
        prev1 = u1
        prev2 = u2
    return r


@njit
def horizon_jacobian(useq, steps, x0, uprev, sysp, dt, nsub, sqrt_lam, n_target, literal_cost):
    """Residuals plus their forward-difference Jacobian w.r.t. the flattened controls.

    ``steps`` holds one signed increment per flattened control entry
    (order u1(0), u2(0), u1(1), ...). Perturbing step j only changes the
    rollout from j onward, so the unperturbed prefix states are reused.
    """
    P = useq.shape[0]
    N = sysp[0]
    m = 4 * P
    states = np.empty((P + 1, 4))
    states[0] = x0
    x = x0.copy()
    for j in range(P):
        x, _ = step_pairwise(x, sysp, useq[j, 0], useq[j, 1], dt, nsub, True)
        states[j + 1] = x
    r = np.empty(m)
    prev1 = uprev[0]
    prev2 = uprev[1]
    for j in range(P):
        xo = states[j] if literal_cost else states[j + 1]
        _fill_residuals(r, j, xo, useq[j, 0], useq[j, 1], prev1, prev2, N, sqrt_lam, n_target)
        prev1 = useq[j, 0]
        prev2 = useq[j, 1]

    jac = np.zeros((m, 2 * P))
    rp = np.empty(m)
    for col in range(2 * P):
        j0 = col // 2
        pert = useq.copy()
        pert[j0, col % 2] += steps[col]
        rp[:] = r
        if j0 == 0:
            prev1 = uprev[0]
            prev2 = uprev[1]
        else:
            prev1 = pert[j0 - 1, 0]
            prev2 = pert[j0 - 1, 1]
        x = states[j0].copy()
        for j in range(j0, P):
            u1 = pert[j, 0]
            u2 = pert[j, 1]
            if literal_cost:
                _fill_residuals(rp, j, x, u1, u2, prev1, prev2, N, sqrt_lam, n_target)
                x, _ = step_pairwise(x, sysp, u1, u2, dt, nsub, True)
            else:
                x, _ = step_pairwise(x, sysp, u1, u2, dt, nsub, True)
                _fill_residuals(rp, j, x, u1, u2, prev1, prev2, N, sqrt_lam, n_target)
            prev1 = u1
            prev2 = u2
        for i in range(m):
            jac[i, col] = (rp[i] - r[i]) / steps[col]
    return r, jac
