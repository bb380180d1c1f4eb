"""Direct evaluators for OCE risk measures, CVaR and VaR.

Random variables are payoffs (larger is better). All evaluators take the
scenario values ``X`` and an optional :class:`DiscreteSpace` (uniform when
omitted). Scenarios of probability zero are ignored.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, ModelError
from .probspace import DiscreteSpace
from .utility import Utility

__all__ = [
    "RiskReport",
    "oce_evaluate",
    "cvar_sort",
    "cvar_dual",
    "var_evaluate",
    "risk_value",
    "weighted_cvar",
    "axiom_check",
]

# cumulative probabilities are compared to alpha with this slack
_CUM_TOL = 1e-12


@dataclass(frozen=True)
class RiskReport:
    rho: float
    minimizer_lambda: float
    method: str
    interval: tuple | None = None


def _support(X, space):
    X = np.asarray(X, dtype=float)
    if space is None:
        space = DiscreteSpace.uniform(X.size)
    X = space.check(X)
    keep = space.probs > 0
    return X[keep], space.probs[keep]


def _check_alpha(alpha):
    if not 0.0 < alpha < 1.0:
        raise ConfigurationError(f"confidence level must lie in (0, 1), got {alpha}")


def oce_evaluate(u: Utility, X, space=None, tol=1e-10):
    """Minimize ``h(lam) = lam + E[u(X + lam)]`` by bisection on its right derivative.

    Returns the left end of the argmin set (to within ``tol``) and the
    attained value.
    """
    if not tol > 0:
        raise ConfigurationError("tol must be positive")
    x, p = _support(X, space)

    def slope(lam):
        return 1.0 + float(np.dot(p, u.right_derivative(x + lam)))

    def h(lam):
        with np.errstate(invalid="ignore"):
            return lam + float(np.dot(p, u.value(x + lam)))

    lo = -float(x.max()) - 1.0
    hi = -float(x.min()) + 1.0
    for _ in range(64):
        if slope(lo) < 0.0:
            break
        lo -= 2.0 * (hi - lo)
    else:
        raise ModelError(f"OCE objective for {u.label()} has no lower bracket")
    for _ in range(64):
        if slope(hi) >= 0.0:
            break
        hi += 2.0 * (hi - lo)
    else:
        raise ModelError(f"OCE objective for {u.label()} is unbounded below")

    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if slope(mid) >= 0.0:
            hi = mid
        else:
            lo = mid
    h_hi = h(hi)
    h_lo = h(lo)
    if np.isfinite(h_lo) and h_lo < h_hi:
        return RiskReport(h_lo, lo, "oce_1d")
    return RiskReport(h_hi, hi, "oce_1d")


def cvar_sort(alpha, X, space=None):
    """Exact CVaR via the sorted loss distribution.

    ``minimizer_lambda`` is the left end of the argmin interval of
    ``lam + E[(X + lam)_-] / (1 - alpha)`` (the VaR); ``interval`` holds both ends.
    """
    _check_alpha(alpha)
    x, p = _support(X, space)
    loss = -x
    order = np.argsort(loss, kind="stable")
    ls = loss[order]
    cum = np.cumsum(p[order])
    k_left = int(np.searchsorted(cum, alpha - _CUM_TOL, side="left"))
    k_left = min(k_left, ls.size - 1)
    k_right = int(np.searchsorted(cum, alpha + _CUM_TOL, side="right"))
    k_right = min(k_right, ls.size - 1)
    var = float(ls[k_left])
    rho = var + float(np.dot(p, np.maximum(loss - var, 0.0))) / (1.0 - alpha)
    return RiskReport(rho, var, "cvar_sort", (var, float(ls[k_right])))


def cvar_dual(alpha, X, space=None, return_weights=False):
    """``max -q^T X`` over ``{sum q = 1, 0 <= q_i <= p_i/(1-alpha)}`` by the greedy rule.

    Mass is poured into the scenarios with the smallest payoff first.
    """
    _check_alpha(alpha)
    X = np.asarray(X, dtype=float)
    if space is None:
        space = DiscreteSpace.uniform(X.size)
    X = space.check(X)
    caps = space.probs / (1.0 - alpha)
    order = np.argsort(X, kind="stable")
    before = np.concatenate(([0.0], np.cumsum(caps[order])[:-1]))
    q = np.zeros_like(X)
    q[order] = np.clip(1.0 - before, 0.0, caps[order])
    value = -float(np.dot(q, X))
    return (value, q) if return_weights else value


def var_evaluate(alpha, X, space=None):
    return cvar_sort(alpha, X, space).minimizer_lambda


def risk_value(u: Utility, X, space=None):
    """Risk of payoff ``X``: exact sort for CVaR, 1-D OCE minimization otherwise."""
    if u.is_cvar:
        return cvar_sort(u.alpha, X, space).rho
    return oce_evaluate(u, X, space).rho


def weighted_cvar(terms, X, space=None):
    """``sum_j w_j CVaR_{alpha_j}(X)`` for ``terms = [(alpha_j, w_j), ...]``."""
    return float(sum(w * cvar_sort(a, X, space).rho for a, w in terms))


def axiom_check(evaluator, pairs, cash=3.0, scale=2.5, homogeneous=False, rng=None):
    """Largest observed violation of each risk-measure axiom.

    Parameters
    ----------
    evaluator : callable
        Maps a payoff array to its risk.
    pairs : iterable of (X, Y)
        Sample payoffs. Monotonicity is tested on ``max(X, Y) >= Y``.
    cash, scale : float
        Shift for cash invariance, factor for positive homogeneity.
    homogeneous : bool
        Also test ``rho(scale X) = scale rho(X)``.
    rng : numpy.random.Generator, optional
        Draws the convex-combination weight; the midpoint is used when omitted.

    Returns
    -------
    dict
        ``{"convexity", "monotonicity", "cash_invariance"[, "homogeneity"]}``
        mapped to the worst violation (0 means never violated).
    """
    worst = {"convexity": 0.0, "monotonicity": 0.0, "cash_invariance": 0.0}
    if homogeneous:
        worst["homogeneity"] = 0.0
    for X, Y in pairs:
        X = np.asarray(X, dtype=float)
        Y = np.asarray(Y, dtype=float)
        t = 0.5 if rng is None else float(rng.uniform(0.05, 0.95))
        rx, ry = evaluator(X), evaluator(Y)
        mix = evaluator(t * X + (1 - t) * Y)
        worst["convexity"] = max(worst["convexity"], mix - (t * rx + (1 - t) * ry))
        worst["monotonicity"] = max(worst["monotonicity"], evaluator(np.maximum(X, Y)) - ry)
        worst["cash_invariance"] = max(worst["cash_invariance"], abs(evaluator(X + cash) - (rx - cash)))
        if homogeneous:
            worst["homogeneity"] = max(worst["homogeneity"], abs(evaluator(scale * X) - scale * rx))
    return worst
