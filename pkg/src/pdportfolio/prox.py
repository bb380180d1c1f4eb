"""Proximal operators and projections used by the splitting solver.

Scalar proxes accept a float or an array and act elementwise; a float in
gives a float out. The elementwise work is delegated to :mod:`.kernels`.
"""

from __future__ import annotations

import numpy as np

from . import kernels
from .errors import ConfigurationError, StructuralError
from .utility import Utility

__all__ = [
    "prox_piecewise_linear",
    "prox_exponential",
    "prox_indicator_halfline",
    "prox_quadratic",
    "prox_logarithmic",
    "prox_scalar",
    "prox_expectation",
    "moreau_conjugate_prox",
    "proj_nonneg",
    "proj_halfspace",
    "proj_hyperplane_sum",
    "proj_box",
    "proj_mean",
    "prox_f_oce",
]

EXP_NEWTON_ITERS = 5
EXP_RESIDUAL_TOL = 1e-9


def _flat(t):
    arr = np.asarray(t, dtype=float)
    return np.ascontiguousarray(arr.ravel()), arr.ndim == 0, arr.shape


def _restore(out, scalar, shape):
    return float(out[0]) if scalar else out.reshape(shape)


def _check_gamma(gamma):
    if not gamma > 0:
        raise ConfigurationError(f"prox step gamma must be positive, got {gamma}")


def prox_piecewise_linear(gamma1, gamma2, gamma, t):
    """``[t - gamma*gamma1]_+ - [t - gamma*gamma2]_-`` (dead zone in between)."""
    if not (gamma2 < -1.0 < gamma1 <= 0.0):
        raise ConfigurationError(f"need gamma2 < -1 < gamma1 <= 0, got {gamma1}, {gamma2}")
    _check_gamma(gamma)
    arr, scalar, shape = _flat(t)
    return _restore(kernels.prox_piecewise_linear(arr, float(gamma), float(gamma1), float(gamma2)), scalar, shape)


def prox_exponential(gamma, t, newton_iters=EXP_NEWTON_ITERS, x0=None, tol=EXP_RESIDUAL_TOL):
    """Prox of ``gamma * (exp(-s) - 1)``.

    Solves ``s - t - gamma*exp(-s) = 0`` with ``newton_iters`` Newton steps
    from ``x0`` (default ``t``). Entries whose residual still exceeds ``tol``
    are recomputed by bisection on ``[t, max(t,0) + 1 + log1p(gamma)]``,
    which always brackets the root.
    """
    _check_gamma(gamma)
    arr, scalar, shape = _flat(t)
    if x0 is None:
        start = arr.copy()
    else:
        start = np.ascontiguousarray(np.broadcast_to(np.asarray(x0, dtype=float).ravel(), arr.shape), dtype=float)
    out = kernels.prox_exponential(arr, float(gamma), start, int(newton_iters), float(tol))
    return _restore(out, scalar, shape)


def prox_indicator_halfline(gamma, t):
    """Projection onto ``[0, inf)``; ``gamma`` does not matter for an indicator."""
    _check_gamma(gamma)
    arr, scalar, shape = _flat(t)
    return _restore(kernels.prox_halfline(arr), scalar, shape)


def prox_quadratic(beta, gamma, t):
    if not beta > 0:
        raise ConfigurationError(f"beta must be positive, got {beta}")
    _check_gamma(gamma)
    arr, scalar, shape = _flat(t)
    return _restore(kernels.prox_quadratic(arr, float(gamma), float(beta)), scalar, shape)


def prox_logarithmic(theta, gamma, t):
    """Positive root of ``s^2 + (theta - t) s - theta (t + gamma) = 0``; always ``> -theta``."""
    if not theta > 0:
        raise ConfigurationError(f"theta must be positive, got {theta}")
    _check_gamma(gamma)
    arr, scalar, shape = _flat(t)
    return _restore(kernels.prox_logarithmic(arr, float(gamma), float(theta)), scalar, shape)


def prox_scalar(u: Utility, gamma, t, x0=None, newton_iters=EXP_NEWTON_ITERS):
    """Dispatch to the closed-form (or Newton) prox of ``gamma * u``."""
    k = u.kind
    if k == "piecewise_linear":
        return prox_piecewise_linear(u.gamma1, u.gamma2, gamma, t)
    if k == "exponential":
        return prox_exponential(gamma, t, newton_iters=newton_iters, x0=x0)
    if k == "indicator":
        return prox_indicator_halfline(gamma, t)
    if k == "quadratic":
        return prox_quadratic(u.beta, gamma, t)
    return prox_logarithmic(u.theta, gamma, t)


def prox_expectation(u: Utility, gamma, X, x0=None):
    """Prox of ``gamma * E[u]`` on weighted L^2: the scalar prox per scenario.

    The probability weights multiply both terms of the prox objective, so
    they drop out of the pointwise minimization.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 1:
        raise StructuralError("expected a 1-D random variable")
    return prox_scalar(u, gamma, X, x0=x0)


def moreau_conjugate_prox(prox_of_f, gamma, x):
    """``Prox_{gamma f*}(x) = x - gamma * Prox_{f/gamma}(x/gamma)``.

    ``prox_of_f(g, y)`` must evaluate ``Prox_{g f}(y)``.
    """
    _check_gamma(gamma)
    x = np.asarray(x, dtype=float)
    return x - gamma * np.asarray(prox_of_f(1.0 / gamma, x / gamma))


def proj_nonneg(x):
    return np.maximum(np.asarray(x, dtype=float), 0.0)


def proj_halfspace(mu, mu_star, x):
    """Projection onto ``{y : y^T mu >= mu_star}``."""
    mu = np.asarray(mu, dtype=float)
    x = np.asarray(x, dtype=float)
    if mu.shape != x.shape:
        raise StructuralError(f"mu has shape {mu.shape}, point has {x.shape}")
    mm = float(np.dot(mu, mu))
    if mm == 0.0:
        raise ConfigurationError("half-space normal mu must be nonzero")
    gap = mu_star - float(np.dot(x, mu))
    if gap <= 0.0:
        return x.copy()
    return x + (gap / mm) * mu


def proj_hyperplane_sum(target, x):
    """Projection onto ``{y : sum(y) = target}``."""
    x = np.asarray(x, dtype=float)
    if x.size < 1:
        raise StructuralError("cannot project an empty vector")
    return x + (target - x.sum()) / x.size


def proj_mean(probs, target, x):
    """Projection onto ``{y : E_p[y] = target}`` in the ``p``-weighted inner product."""
    probs = np.asarray(probs, dtype=float)
    x = np.asarray(x, dtype=float)
    if probs.shape != x.shape:
        raise StructuralError(f"probabilities have shape {probs.shape}, point has {x.shape}")
    total = float(probs.sum())
    if not total > 0.0:
        raise ConfigurationError("probabilities must not all be zero")
    return x + (target - float(np.dot(probs, x))) / total


def proj_box(lower, upper, x):
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    if np.any(lower > upper):
        raise ConfigurationError("box lower bound exceeds upper bound")
    return np.clip(np.asarray(x, dtype=float), lower, upper)


def prox_f_oce(gamma, x, lam):
    """Prox of ``(y, nu) -> delta_{y >= 0} + nu``: clamp the weights, shift ``nu`` by ``-gamma``."""
    _check_gamma(gamma)
    return proj_nonneg(x), float(lam) - gamma
