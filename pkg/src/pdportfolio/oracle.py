"""Brute-force reference implementations for testing.

Nothing here is used on the solve path and nothing here calls the fast
implementations in :mod:`.prox`, :mod:`.risk` or :mod:`.portfolio`. Every
oracle refuses inputs too large for exhaustive treatment.

The golden-section prox oracle compares candidate points through the
*difference* of the prox objective, ``phi(a) - phi(b)``, written in a
cancellation-free form for each utility. Comparing plain function values
would limit the minimizer's accuracy to about ``sqrt(eps)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, StructuralError

__all__ = [
    "GridSpec",
    "simplex_grid",
    "grid_search_simplex",
    "cvar_batch",
    "weighted_cvar_batch",
    "prox_numeric",
    "prox_conjugate",
    "prox_support_halfspace",
    "prox_support_sum",
    "prox_support_box",
    "prox_support_nonneg",
    "proj_affine_numeric",
    "proj_halfspace_numeric",
    "proj_box_numeric",
    "prox_f_oce_numeric",
    "oce_grid",
    "dense_operator_norm",
    "cvar_vertex_enum",
]

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
GOLDEN_ITERS = 200


class OracleRefusal(ConfigurationError):
    """Input too large for an exhaustive oracle."""


# ---------------------------------------------------------------- simplex grid


@dataclass(frozen=True)
class GridSpec:
    resolution: float = 1e-3
    max_dim: int = 4
    max_points: int = 3_000_000

    def __post_init__(self):
        if not self.resolution > 0:
            raise ConfigurationError("grid resolution must be positive")
        if not 1 <= self.max_dim <= 4:
            raise ConfigurationError("max_dim must lie in 1..4")


def simplex_grid(n_assets, steps):
    """All ``x >= 0`` with ``sum x = 1`` and every ``x_i`` a multiple of ``1/steps``."""
    if n_assets == 1:
        return np.ones((1, 1))
    rows = []
    for head in itertools.product(range(steps + 1), repeat=n_assets - 2):
        used = sum(head)
        if used > steps:
            continue
        k = np.arange(steps - used + 1)
        block = np.empty((k.size, n_assets), dtype=np.int64)
        block[:, : n_assets - 2] = head
        block[:, n_assets - 2] = k
        block[:, n_assets - 1] = steps - used - k
        rows.append(block)
    return np.concatenate(rows) / steps


def grid_search_simplex(returns, mu_star, risk_eval, grid=GridSpec(), chunk=50_000):
    """Exhaustive minimization of ``risk_eval`` over the simplex grid.

    Parameters
    ----------
    returns : ReturnsMatrix
    mu_star : float
        Grid points with ``x^T mu < mu_star`` are discarded.
    risk_eval : callable
        Maps a ``(M, |Omega|)`` array of portfolio payoffs to ``M`` risks.
    grid : GridSpec

    Returns
    -------
    (weights, value)
    """
    n = returns.n_assets
    if n > grid.max_dim:
        raise OracleRefusal(f"grid search refuses N={n} > {grid.max_dim}")
    steps = int(round(1.0 / grid.resolution))
    count = math.comb(steps + n - 1, n - 1)
    if count > grid.max_points:
        raise OracleRefusal(f"grid of {count} points exceeds the limit {grid.max_points}")
    pts = simplex_grid(n, steps)
    pts = pts[pts @ returns.mu >= mu_star]
    if pts.shape[0] == 0:
        raise OracleRefusal("no grid point satisfies the return constraint")
    best_val = np.inf
    best_x = None
    R = returns.values
    for start in range(0, pts.shape[0], chunk):
        block = pts[start : start + chunk]
        vals = np.asarray(risk_eval(block @ R.T), dtype=float)
        k = int(np.argmin(vals))
        if vals[k] < best_val:
            best_val = float(vals[k])
            best_x = block[k].copy()
    return best_x, best_val


def cvar_batch(alpha, payoffs, probs):
    """CVaR of each row of ``payoffs``: mean loss over the worst ``1-alpha`` mass."""
    payoffs = np.atleast_2d(np.asarray(payoffs, dtype=float))
    probs = np.asarray(probs, dtype=float)
    tail = 1.0 - alpha
    order = np.argsort(payoffs, axis=1, kind="stable")
    xs = np.take_along_axis(payoffs, order, axis=1)
    ps = probs[order]
    start = np.cumsum(ps, axis=1) - ps
    take = np.clip(tail - start, 0.0, ps)
    return -(take * xs).sum(axis=1) / tail


def weighted_cvar_batch(terms, payoffs, probs):
    return sum(w * cvar_batch(a, payoffs, probs) for a, w in terms)


# ------------------------------------------------------------ utility algebra


def _uvalue(u, s):
    s = np.asarray(s, dtype=float)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        if u.kind == "piecewise_linear":
            return u.gamma1 * np.maximum(s, 0.0) + u.gamma2 * np.minimum(s, 0.0)
        if u.kind == "exponential":
            return np.exp(-s) - 1.0
        if u.kind == "indicator":
            return np.where(s >= 0.0, 0.0, np.inf)
        if u.kind == "quadratic":
            m = np.minimum(s, 1.0 / u.beta)
            return 0.5 * u.beta * m * m - m
        th = u.theta
        return np.where(s > -th, -th * np.log((th + s) / th), np.inf)


def _udiff(u, a, b):
    """``u(a) - u(b)`` without cancellation between large equal terms."""
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        if u.kind == "piecewise_linear":
            return u.gamma1 * (np.maximum(a, 0.0) - np.maximum(b, 0.0)) + u.gamma2 * (
                np.minimum(a, 0.0) - np.minimum(b, 0.0)
            )
        if u.kind == "exponential":
            lo = np.minimum(a, b)
            sign = np.where(a <= b, 1.0, -1.0)
            # e^{-a} - e^{-b} = sign * e^{-lo} * (1 - e^{-|a-b|})
            return sign * np.exp(-lo) * -np.expm1(-np.abs(a - b))
        if u.kind == "indicator":
            ina = a >= 0.0
            inb = b >= 0.0
            return np.where(ina & inb, 0.0, np.where(ina, -np.inf, np.where(inb, np.inf, 0.0)))
        if u.kind == "quadratic":
            c = 1.0 / u.beta
            ma = np.minimum(a, c)
            mb = np.minimum(b, c)
            return (ma - mb) * (0.5 * u.beta * (ma + mb) - 1.0)
        th = u.theta
        ina = a > -th
        inb = b > -th
        d = -th * np.log1p((a - b) / (th + b))
        return np.where(ina & inb, d, np.where(ina, -np.inf, np.where(inb, np.inf, 0.0)))


def _golden(diff, lo, hi, iters=GOLDEN_ITERS):
    """Vectorized golden-section search driven by ``diff(a, b) = phi(a) - phi(b)``."""
    lo = lo.copy()
    hi = hi.copy()
    for _ in range(iters):
        width = hi - lo
        c = hi - _INV_PHI * width
        d = lo + _INV_PHI * width
        left = diff(c, d) < 0.0
        hi = np.where(left, d, hi)
        lo = np.where(left, lo, c)
    return 0.5 * (lo + hi)


def _bracket(diff, t, width, dom_lo):
    """Expand ``[t - width, t + width]`` (clipped to the domain) until it holds the minimizer."""
    lo = np.maximum(t - width, dom_lo)
    hi = np.maximum(t + width, dom_lo + width)
    for _ in range(200):
        h = 1e-3 * (hi - lo)
        grow_hi = diff(hi, hi - h) < 0.0
        grow_lo = (lo > dom_lo) & (diff(lo, lo + h) < 0.0)
        if not (grow_hi.any() or grow_lo.any()):
            return lo, hi
        span = hi - lo
        hi = np.where(grow_hi, hi + 2.0 * span, hi)
        lo = np.where(grow_lo, np.maximum(lo - 2.0 * span, dom_lo), lo)
    raise ArithmeticError("could not bracket the prox minimizer")


def prox_numeric(u, gamma, t, iters=GOLDEN_ITERS):
    """Minimize ``gamma*u(s) + (s-t)^2/2`` by golden-section search."""
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    g = np.broadcast_to(np.asarray(gamma, dtype=float), t_arr.shape)
    if np.any(g <= 0):
        raise ConfigurationError("gamma must be positive")

    def diff(a, b):
        return g * _udiff(u, a, b) + 0.5 * (a - b) * ((a - t_arr) + (b - t_arr))

    dom_lo = {"indicator": 0.0, "logarithmic": -getattr(u, "theta", 0.0)}.get(u.kind, -np.inf)
    width = 10.0 * g * (1.0 + np.abs(t_arr))
    lo, hi = _bracket(diff, t_arr, width, dom_lo)
    out = _golden(diff, lo, hi, iters)
    return float(out[0]) if np.ndim(t) == 0 else out.reshape(np.shape(t))


def _exp_conjugate_prox(gamma, y):
    # minimizer z < 0 of gamma*u*(z) + (z-y)^2/2 with u*(z) = -z ln(-z) + z + 1;
    # stationarity -gamma ln(-z) + z - y = 0, solved in w = ln(-z)
    G_lo = -(np.abs(y) + 1.0) / gamma - 1.0
    G_hi = np.log(np.abs(y) + 1.0) + 1.0
    lo, hi = G_lo.copy(), G_hi.copy()
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        g = -np.exp(mid) - y - gamma * mid
        pos = g > 0.0
        lo = np.where(pos, mid, lo)
        hi = np.where(pos, hi, mid)
    return -np.exp(0.5 * (lo + hi))


def prox_conjugate(u, gamma, y):
    """Prox of ``gamma * u*`` from closed forms of the conjugate.

    ``u*`` for the five utilities (``y`` the dual variable):

    * piecewise linear: indicator of ``[gamma2, gamma1]``
    * exponential: ``-y ln(-y) + y + 1`` on ``y <= 0``
    * indicator of ``[0, inf)``: indicator of ``(-inf, 0]``
    * quadratic: ``(1 + y)^2 / (2 beta)`` on ``y <= 0``
    * logarithmic: ``-theta - theta y - theta ln(-y)`` on ``y < 0``
    """
    y_arr = np.atleast_1d(np.asarray(y, dtype=float))
    k = u.kind
    if k == "piecewise_linear":
        out = np.clip(y_arr, u.gamma2, u.gamma1)
    elif k == "indicator":
        out = np.minimum(y_arr, 0.0)
    elif k == "quadratic":
        b = u.beta
        out = np.minimum((b * y_arr - gamma) / (b + gamma), 0.0)
    elif k == "logarithmic":
        c = gamma * u.theta
        bb = y_arr + c
        root = np.sqrt(bb * bb + 4.0 * c)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(bb <= 0.0, 0.5 * (bb - root), -2.0 * c / (bb + root))
    else:
        out = _exp_conjugate_prox(gamma, y_arr)
    return float(out[0]) if np.ndim(y) == 0 else out.reshape(np.shape(y))


# --------------------------------------------- support functions of the sets
#
# The conjugate of an indicator delta_C is the support function
# sigma_C(y) = sup_{x in C} <x, y>. Each prox below minimizes
# gamma*sigma_C(z) + |z - y|^2/2 directly from the form of sigma_C.


def prox_support_halfspace(mu, mu_star, gamma, y):
    """``C = {x : mu^T x >= mu_star}``: ``sigma_C(-t mu) = -t mu_star`` for ``t >= 0``, else ``+inf``."""
    mu = np.asarray(mu, dtype=float)
    y = np.asarray(y, dtype=float)
    t = max(0.0, (gamma * mu_star - float(mu @ y)) / float(mu @ mu))
    return -t * mu


def prox_support_sum(target, gamma, y):
    """``C = {x : sum x = target}``: ``sigma_C(s 1) = s * target``, else ``+inf``."""
    y = np.asarray(y, dtype=float)
    s = (y.sum() - gamma * target) / y.size
    return np.full_like(y, s)


def prox_support_box(lower, upper, gamma, y):
    """``C = [lower, upper]``: ``sigma_C(z) = sum max(z_i upper_i, z_i lower_i)``."""
    y = np.asarray(y, dtype=float)
    lo = np.broadcast_to(np.asarray(lower, dtype=float), y.shape)
    up = np.broadcast_to(np.asarray(upper, dtype=float), y.shape)
    # slope gamma*upper on z > 0 and gamma*lower on z < 0
    return np.where(y > gamma * up, y - gamma * up, np.where(y < gamma * lo, y - gamma * lo, 0.0))


def prox_support_nonneg(gamma, y):
    """``C = [0, inf)^n``: ``sigma_C`` is the indicator of ``(-inf, 0]^n``."""
    return np.minimum(np.asarray(y, dtype=float), 0.0)


# ----------------------------------------------------------------- projections


def proj_affine_numeric(A, b, x):
    """Projection onto ``{y : A y = b}`` through an orthonormal null-space basis."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    x = np.asarray(x, dtype=float)
    y0 = np.linalg.lstsq(A, b, rcond=None)[0]
    _, sv, vt = np.linalg.svd(A)
    rank = int((sv > 1e-12 * sv.max()).sum())
    Q = vt[rank:].T
    return y0 + Q @ (Q.T @ (x - y0))


def proj_halfspace_numeric(mu, mu_star, x):
    x = np.asarray(x, dtype=float)
    if float(np.dot(mu, x)) >= mu_star:
        return x.copy()
    return proj_affine_numeric(np.asarray(mu)[None, :], [mu_star], x)


def proj_box_numeric(lower, upper, x):
    """Coordinatewise golden-section minimization of ``(y - x)^2 / 2`` on ``[lower, upper]``."""
    x = np.asarray(x, dtype=float)
    lo = np.broadcast_to(np.asarray(lower, dtype=float), x.shape).astype(float)
    hi = np.broadcast_to(np.asarray(upper, dtype=float), x.shape).astype(float)

    def diff(a, b):
        return 0.5 * (a - b) * ((a - x) + (b - x))

    out = _golden(diff, lo, hi)
    # golden section never returns the end points exactly
    out = np.where(x <= lo, lo, np.where(x >= hi, hi, out))
    return out


def prox_f_oce_numeric(gamma, x, lam):
    """Coordinatewise golden-section prox of ``(y, nu) -> delta_{y>=0} + nu``.

    ``x`` may be a stack of points of shape ``(..., n)`` with ``lam`` of
    shape ``(...)``; ``nu`` then comes back with that shape.
    """
    x = np.asarray(x, dtype=float)
    big = np.abs(x).max(axis=-1, keepdims=True) + 1.0
    y = proj_box_numeric(np.zeros_like(x), np.broadcast_to(big, x.shape), x)
    lam_arr = np.atleast_1d(np.asarray(lam, dtype=float))

    def diff(a, b):
        return gamma * (a - b) + 0.5 * (a - b) * ((a - lam_arr) + (b - lam_arr))

    nu = _golden(diff, lam_arr - 10.0 * gamma - 1.0, lam_arr + 1.0)
    return y, (float(nu[0]) if np.ndim(lam) == 0 else nu)


# ------------------------------------------------------------------ risk / OCE


def oce_grid(u, X, lambda_grid, probs=None):
    """``min over lambda_grid of lam + E[u(X + lam)]``."""
    X = np.asarray(X, dtype=float)
    p = np.full(X.size, 1.0 / X.size) if probs is None else np.asarray(probs, dtype=float)
    lams = np.asarray(lambda_grid, dtype=float)
    vals = _uvalue(u, X[None, :] + lams[:, None])
    with np.errstate(invalid="ignore"):
        h = lams + (vals * p).sum(axis=1)
    h = np.where(np.isnan(h), np.inf, h)
    return float(h.min())


def dense_operator_norm(op, max_entries=4_000_000):
    """Largest singular value of ``op`` from its materialized Gram matrix.

    The Gram matrix is formed with ``op.inner_codomain`` so the weighted
    L^2 geometry of the codomain is respected.
    """
    n = op.domain_dim
    m = op.codomain_dim
    if n * m > max_entries or n > 400:
        raise OracleRefusal(f"operator of size {m}x{n} is too large to materialize")
    cols = [op.apply(np.eye(n)[k]) for k in range(n)]
    G = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            G[i, j] = G[j, i] = op.inner_codomain(cols[i], cols[j])
    top = float(np.linalg.eigvalsh(G)[-1])
    return math.sqrt(max(top, 0.0))


def cvar_vertex_enum(alpha, X, probs=None, tol=1e-12):
    """``max -q^T X`` over the vertices of ``{sum q = 1, 0 <= q_i <= p_i/(1-alpha)}``.

    A vertex has every coordinate at a bound except at most one, so all
    vertices are reached by choosing the set at the upper bound and one
    free coordinate.
    """
    X = np.asarray(X, dtype=float)
    n = X.size
    if n > 12:
        raise OracleRefusal(f"vertex enumeration refuses |Omega|={n} > 12")
    if not 0.0 < alpha < 1.0:
        raise ConfigurationError("alpha must lie in (0, 1)")
    p = np.full(n, 1.0 / n) if probs is None else np.asarray(probs, dtype=float)
    if p.shape != X.shape:
        raise StructuralError("probabilities and scenarios differ in length")
    cap = p / (1.0 - alpha)
    masks = (np.arange(2**n)[:, None] >> np.arange(n)[None, :]) & 1
    upper_mass = masks @ cap
    upper_val = masks @ (cap * X)
    best = -np.inf
    # no free coordinate
    exact = np.abs(upper_mass - 1.0) <= tol
    if exact.any():
        best = max(best, float((-upper_val[exact]).max()))
    for j in range(n):
        free = masks[:, j] == 0
        qj = 1.0 - upper_mass
        ok = free & (qj >= -tol) & (qj <= cap[j] + tol)
        if ok.any():
            vals = -(upper_val[ok] + np.clip(qj[ok], 0.0, cap[j]) * X[j])
            best = max(best, float(vals.max()))
    return best
