"""Hot numeric loops.

Every function here is plain numpy/Python source wrapped in ``njit``. With
``SIQRCTL_DISABLE_JIT=1`` the decorator is the identity and the same source
runs in the interpreter, so both paths perform identical floating-point work.

Kernels report failures through an integer status (-1 means success,
otherwise the index of the step that produced a non-finite state) because
raising rich exceptions from nopython code is awkward.
"""

import numpy as np

from ._jit import njit

# Parameter vector layout shared by the SIQR kernels.
DELTA, ALPHA, GAMMA, MU, ETA, EPSILON, RHO, V = range(8)


@njit(cache=True)
def siqr_rhs(t, x, p):
    s = x[0]
    i = x[1]
    q = x[2]
    r = x[3]
    out = np.empty(4)
    out[0] = p[DELTA] - p[ALPHA] * s * i - p[MU] * s - p[V] * s
    out[1] = p[ALPHA] * s * i - (p[GAMMA] + p[MU] + p[ETA]) * i
    out[2] = (p[ETA] - p[EPSILON]) * i - (p[RHO] + p[MU]) * q
    out[3] = p[GAMMA] * i + p[RHO] * q - p[MU] * r
    return out


def _all_finite(x):
    for v in x.ravel():
        if not np.isfinite(v):
            return False
    return True


_all_finite = njit(cache=True)(_all_finite)


def rk4_run(rhs, t0, x0, h, n, h_last, args):
    """Take ``n`` RK4 steps of size ``h`` and, if ``h_last != 0``, one more of
    size ``h_last``. Returns ``(states, status)``."""
    m = n + 1 if h_last == 0.0 else n + 2
    out = np.empty((m, x0.shape[0]))
    out[0] = x0
    x = x0.copy()
    status = -1
    for k in range(m - 1):
        hk = h if k < n else h_last
        t = t0 + k * h
        k1 = rhs(t, x, args)
        k2 = rhs(t + 0.5 * hk, x + 0.5 * hk * k1, args)
        k3 = rhs(t + 0.5 * hk, x + 0.5 * hk * k2, args)
        k4 = rhs(t + hk, x + hk * k3, args)
        x = x + (hk / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not _all_finite(x):
            status = k
            break
        out[k + 1] = x
    return out, status


# Takes a jitted rhs as an argument, so it cannot be cached on disk.
rk4_run_jit = njit(rk4_run)


def _controlled_rhs(x, p, gain, bias):
    d = siqr_rhs(0.0, x, p)
    u0 = bias[0] - (gain[0, 0] * x[0] + gain[0, 1] * x[1] + gain[0, 2] * x[2] + gain[0, 3] * x[3])
    u1 = bias[1] - (gain[1, 0] * x[0] + gain[1, 1] * x[1] + gain[1, 2] * x[2] + gain[1, 3] * x[3])
    d[0] = d[0] + u0
    d[1] = d[1] + u1
    return d


_controlled_rhs = njit(cache=True)(_controlled_rhs)


@njit(cache=True)
def siqr_controlled_run(p, x0, h, n, h_last, gains, gain_index, bias):
    """SIQR with ``u = bias - K x`` entering dS/dt and dI/dt.

    ``gains[gain_index[k]]`` is held over step ``k`` (zero-order hold).
    Returns ``(states, controls, status)``.
    """
    m = n + 1 if h_last == 0.0 else n + 2
    out = np.empty((m, 4))
    ctl = np.zeros((m, 2))
    out[0] = x0
    x = x0.copy()
    status = -1
    for k in range(m - 1):
        hk = h if k < n else h_last
        g = gains[gain_index[k]]
        ctl[k, 0] = bias[0] - (g[0, 0] * x[0] + g[0, 1] * x[1] + g[0, 2] * x[2] + g[0, 3] * x[3])
        ctl[k, 1] = bias[1] - (g[1, 0] * x[0] + g[1, 1] * x[1] + g[1, 2] * x[2] + g[1, 3] * x[3])
        k1 = _controlled_rhs(x, p, g, bias)
        k2 = _controlled_rhs(x + 0.5 * hk * k1, p, g, bias)
        k3 = _controlled_rhs(x + 0.5 * hk * k2, p, g, bias)
        k4 = _controlled_rhs(x + hk * k3, p, g, bias)
        x = x + (hk / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not _all_finite(x):
            status = k
            break
        out[k + 1] = x
    if status == -1:
        g = gains[gain_index[m - 1]]
        ctl[m - 1, 0] = bias[0] - (g[0, 0] * x[0] + g[0, 1] * x[1] + g[0, 2] * x[2] + g[0, 3] * x[3])
        ctl[m - 1, 1] = bias[1] - (g[1, 0] * x[0] + g[1, 1] * x[1] + g[1, 2] * x[2] + g[1, 3] * x[3])
    return out, ctl, status


def _riccati_flow(P, A, S, G, sign):
    # sign * (A^T P + P A - P S P + G)
    return sign * (A.T @ P + P @ A - P @ S @ P + G)


_riccati_flow = njit(cache=True)(_riccati_flow)


@njit(cache=True)
def riccati_run(A, S, G, P0, h, n, sign):
    """RK4 on ``dP/ds = sign * (A^T P + P A - P S P + G)`` with the state
    re-symmetrized after every step. Returns ``(P_samples, status)``."""
    dim = P0.shape[0]
    out = np.empty((n + 1, dim, dim))
    P = 0.5 * (P0 + P0.T)
    out[0] = P
    status = -1
    for k in range(n):
        k1 = _riccati_flow(P, A, S, G, sign)
        k2 = _riccati_flow(P + 0.5 * h * k1, A, S, G, sign)
        k3 = _riccati_flow(P + 0.5 * h * k2, A, S, G, sign)
        k4 = _riccati_flow(P + h * k3, A, S, G, sign)
        P = P + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        P = 0.5 * (P + P.T)
        if not _all_finite(P):
            status = k
            break
        out[k + 1] = P
    return out, status


@njit(cache=True)
def poly_eval(coeffs, z):
    acc = 0.0 + 0.0j
    for c in coeffs:
        acc = acc * z + c
    return acc


@njit(cache=True)
def durand_kerner(coeffs, max_iter, step_tol):
    """Simultaneous root iteration for a monic polynomial (highest degree
    first). Returns ``(roots, iterations, converged)``."""
    n = coeffs.shape[0] - 1
    radius = 1.0 + np.max(np.abs(coeffs[1:]))
    roots = np.empty(n, dtype=np.complex128)
    for k in range(n):
        # offset angle keeps the start off the real axis
        ang = 2.0 * np.pi * k / n + 0.4
        roots[k] = radius * (np.cos(ang) + 1j * np.sin(ang))
    it = 0
    converged = False
    steps = np.empty(n, dtype=np.complex128)
    while it < max_iter:
        it += 1
        biggest = 0.0
        # total-step (Jacobi) update: preserves the sum of the iterates
        for k in range(n):
            denom = 1.0 + 0.0j
            for j in range(n):
                if j != k:
                    denom *= roots[k] - roots[j]
            if denom == 0.0:
                denom = 1e-300 + 0.0j
            steps[k] = poly_eval(coeffs, roots[k]) / denom
            a = abs(steps[k])
            if a > biggest:
                biggest = a
        for k in range(n):
            roots[k] -= steps[k]
        if biggest < step_tol:
            converged = True
            break
    return roots, it, converged
