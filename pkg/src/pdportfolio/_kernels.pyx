# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled elementwise prox kernels (same signatures as ``_kernels_py``)."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log1p, sqrt, fabs, isfinite

cnp.import_array()

cdef int _BISECT_MAX = 2100


def prox_piecewise_linear(const double[::1] t, double gamma, double g1, double g2):
    cdef Py_ssize_t i, n = t.shape[0]
    cdef double lo = gamma * g2, hi = gamma * g1, ti
    out = np.empty(n)
    cdef double[::1] o = out
    for i in range(n):
        ti = t[i]
        if ti < lo:
            o[i] = ti - lo
        elif ti > hi:
            o[i] = ti - hi
        else:
            o[i] = 0.0
    return out


def prox_halfline(const double[::1] t):
    cdef Py_ssize_t i, n = t.shape[0]
    out = np.empty(n)
    cdef double[::1] o = out
    for i in range(n):
        o[i] = t[i] if t[i] > 0.0 else 0.0
    return out


def prox_quadratic(const double[::1] t, double gamma, double beta):
    cdef Py_ssize_t i, n = t.shape[0]
    cdef double kink = 1.0 / beta, denom = 1.0 + gamma * beta
    out = np.empty(n)
    cdef double[::1] o = out
    for i in range(n):
        if t[i] <= kink:
            o[i] = (t[i] + gamma) / denom
        else:
            o[i] = t[i]
    return out


def prox_logarithmic(const double[::1] t, double gamma, double theta):
    cdef Py_ssize_t i, n = t.shape[0]
    cdef double a, r, c = theta * gamma
    out = np.empty(n)
    cdef double[::1] o = out
    for i in range(n):
        a = 0.5 * (t[i] + theta)
        r = sqrt(a * a + c)
        if a >= 0.0:
            o[i] = (a + r) - theta
        else:
            o[i] = c / (r - a) - theta
    return out


cdef double _bisect_exponential(double t, double gamma) nogil:
    cdef double lo = t, hi, tight, mid, phi, e, step
    cdef int k
    hi = (t if t > 0.0 else 0.0) + 1.0 + log1p(gamma)
    tight = t + gamma * exp(-t)
    if isfinite(tight) and tight < hi:
        hi = tight
    for k in range(_BISECT_MAX):
        mid = 0.5 * (lo + hi)
        if not (mid > lo and mid < hi):
            break
        phi = mid - t - gamma * exp(-mid)
        if phi < 0.0:
            lo = mid
        else:
            hi = mid
    e = gamma * exp(-lo)
    step = lo - (lo - t - e) / (1.0 + e)
    if isfinite(step) and step >= lo and step <= hi:
        return step
    return lo


def prox_exponential(const double[::1] t, double gamma, const double[::1] x0,
                     int newton_iters, double tol):
    cdef Py_ssize_t i, n = t.shape[0]
    cdef int k
    cdef double s, e, ti, resid, polished
    out = np.empty(n)
    cdef double[::1] o = out
    with nogil:
        for i in range(n):
            ti = t[i]
            s = x0[i]
            for k in range(newton_iters):
                e = gamma * exp(-s)
                polished = (s - ti - e) / (1.0 + e)
                s = s - polished
                if fabs(polished) <= 4e-16 * (1.0 + fabs(s)):
                    # further steps only move s at rounding level
                    break
            resid = s - ti - gamma * exp(-s)
            if not (fabs(resid) <= tol):
                s = _bisect_exponential(ti, gamma)
            else:
                # one extra step takes an accepted point down to rounding level
                e = gamma * exp(-s)
                polished = s - resid / (1.0 + e)
                if fabs(polished - ti - gamma * exp(-polished)) <= fabs(resid):
                    s = polished
            o[i] = s
    return out
