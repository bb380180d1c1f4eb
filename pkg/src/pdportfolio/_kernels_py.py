"""NumPy implementations of the elementwise prox kernels.

Each function takes a 1-D float64 array ``t`` and returns a new array of the
same length. ``_kernels.pyx`` implements the same signatures in Cython; the
two must agree to rounding.
"""

import numpy as np

_BISECT_MAX = 2100


def prox_piecewise_linear(t, gamma, g1, g2):
    lo = gamma * g2
    hi = gamma * g1
    out = np.zeros_like(t)
    below = t < lo
    above = t > hi
    out[below] = t[below] - lo
    out[above] = t[above] - hi
    return out


def prox_halfline(t):
    return np.maximum(t, 0.0)


def prox_quadratic(t, gamma, beta):
    return np.where(t <= 1.0 / beta, (t + gamma) / (1.0 + gamma * beta), t)


def prox_logarithmic(t, gamma, theta):
    # s + theta = a + sqrt(a^2 + c); rationalized when a < 0 to avoid cancellation
    a = 0.5 * (t + theta)
    c = theta * gamma
    r = np.sqrt(a * a + c)
    with np.errstate(divide="ignore", invalid="ignore"):
        shift = np.where(a >= 0.0, a + r, c / (r - a))
    return shift - theta


def _bisect_exponential(t, gamma):
    lo = t.copy()
    hi = np.maximum(t, 0.0) + 1.0 + np.log1p(gamma)
    with np.errstate(over="ignore"):
        tight = t + gamma * np.exp(-t)
    hi = np.where(np.isfinite(tight) & (tight < hi), tight, hi)
    active = np.ones(t.shape, dtype=bool)
    with np.errstate(over="ignore"):
        for _ in range(_BISECT_MAX):
            if not active.any():
                break
            mid = 0.5 * (lo + hi)
            active &= (mid > lo) & (mid < hi)
            phi = mid - t - gamma * np.exp(-mid)
            left = active & (phi < 0.0)
            right = active & ~(phi < 0.0)
            lo = np.where(left, mid, lo)
            hi = np.where(right, mid, hi)
        # one Newton step from the left end stays left of the root (phi is concave)
        e = gamma * np.exp(-lo)
        step = lo - (lo - t - e) / (1.0 + e)
    return np.where(np.isfinite(step) & (step >= lo) & (step <= hi), step, lo)


def prox_exponential(t, gamma, x0, newton_iters, tol):
    s = x0.copy()
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(newton_iters):
            e = gamma * np.exp(-s)
            s = s - (s - t - e) / (1.0 + e)
        resid = s - t - gamma * np.exp(-s)
    bad = ~(np.abs(resid) <= tol)
    # Accepted Newton points get one more step so the result sits at rounding
    # level rather than just inside the acceptance tolerance.
    with np.errstate(over="ignore", invalid="ignore"):
        e = gamma * np.exp(-s)
        polished = s - resid / (1.0 + e)
        better = np.abs(polished - t - gamma * np.exp(-polished)) <= np.abs(resid)
    s = np.where(~bad & better, polished, s)
    if bad.any():
        s[bad] = _bisect_exponential(t[bad], gamma)
    return s
