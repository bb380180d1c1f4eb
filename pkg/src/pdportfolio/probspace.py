"""Discrete probability spaces and the linear operators of the portfolio models.

Random variables on a finite scenario set are plain 1-D float arrays of
length ``|Omega|``; the space they live on supplies the probability-weighted
inner product ``<X, Y> = sum_w p_w X_w Y_w``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, OperatorNormError, StructuralError

__all__ = [
    "DiscreteSpace",
    "ReturnsMatrix",
    "OceOperatorK",
    "DrOperatorR",
    "weighted_inner",
    "expectation",
    "apply_K",
    "adjoint_K",
    "apply_R",
    "adjoint_R",
    "operator_norm",
]


@dataclass(frozen=True, eq=False)
class DiscreteSpace:
    """Finite scenario set with probability weights.

    Parameters
    ----------
    probs : array_like
        Nonnegative weights summing to one (within 1e-12).
    """

    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=float).ravel()
        if p.size < 1:
            raise ConfigurationError("a probability space needs at least one scenario")
        if not np.all(np.isfinite(p)) or np.any(p < 0):
            raise ConfigurationError("probabilities must be finite and nonnegative")
        if abs(p.sum() - 1.0) > 1e-12:
            raise ConfigurationError(f"probabilities sum to {float(p.sum())!r}, not 1")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @classmethod
    def uniform(cls, n):
        return cls(np.full(n, 1.0 / n))

    @property
    def size(self):
        return self.probs.size

    def check(self, X):
        X = np.asarray(X, dtype=float)
        if X.shape != (self.size,):
            raise StructuralError(
                f"random variable has shape {X.shape}, space has {self.size} scenarios"
            )
        return X

    def inner(self, X, Y):
        return weighted_inner(self, X, Y)

    def norm(self, X):
        X = self.check(X)
        return float(np.sqrt(np.dot(self.probs, X * X)))

    def expectation(self, X):
        return expectation(self, X)


def weighted_inner(space, X, Y):
    """Probability-weighted inner product ``sum_w p_w X_w Y_w``."""
    X = space.check(X)
    Y = space.check(Y)
    return float(np.dot(space.probs, X * Y))


def expectation(space, X):
    X = space.check(X)
    return float(np.dot(space.probs, X))


@dataclass(frozen=True, eq=False)
class ReturnsMatrix:
    """Asset returns, one column per asset and one row per scenario.

    ``values[w, i]`` is the return of asset ``i`` in scenario ``w``; ``mu``
    holds the expected returns under ``space``.
    """

    values: np.ndarray
    space: DiscreteSpace
    names: tuple = ()
    mu: np.ndarray = field(init=False)

    def __post_init__(self):
        R = np.array(self.values, dtype=float)
        if R.ndim == 1:
            R = R[:, None]
        if R.ndim != 2 or R.shape[0] != self.space.size:
            raise StructuralError(
                f"returns of shape {R.shape} do not match {self.space.size} scenarios"
            )
        if R.shape[1] < 1:
            raise StructuralError("at least one asset is required")
        if not np.all(np.isfinite(R)):
            raise StructuralError("returns must be finite")
        names = tuple(self.names) if self.names else tuple(f"asset_{i + 1}" for i in range(R.shape[1]))
        if len(names) != R.shape[1]:
            raise StructuralError(f"{len(names)} names for {R.shape[1]} assets")
        mu = self.space.probs @ R
        R.setflags(write=False)
        mu.setflags(write=False)
        object.__setattr__(self, "values", R)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "mu", mu)

    @classmethod
    def from_array(cls, values, probs=None, names=()):
        values = np.asarray(values, dtype=float)
        n = values.shape[0]
        space = DiscreteSpace.uniform(n) if probs is None else DiscreteSpace(probs)
        return cls(values, space, tuple(names))

    @property
    def n_assets(self):
        return self.values.shape[1]

    @property
    def n_scenarios(self):
        return self.values.shape[0]

    def column(self, i):
        return self.values[:, i]

    def payoff(self, weights):
        """Portfolio payoff ``sum_i x_i R_i`` per scenario."""
        weights = np.asarray(weights, dtype=float)
        if weights.shape != (self.n_assets,):
            raise StructuralError(f"expected {self.n_assets} weights, got shape {weights.shape}")
        return self.values @ weights


class _LinearOperator:
    """Shared plumbing: domain is Euclidean, codomain has ``inner``/``norm``."""

    scale: float

    def inner_codomain(self, a, b):
        raise NotImplementedError

    def norm_codomain(self, a):
        return float(np.sqrt(max(self.inner_codomain(a, a), 0.0)))

    def inner_domain(self, a, b):
        return float(np.dot(a, b))


@dataclass(frozen=True, eq=False)
class OceOperatorK(_LinearOperator):
    """``(x, lam) -> scale * (sum_i x_i R_i + lam)`` into weighted L^2.

    Points of the domain are flat arrays of length ``N + 1`` holding the
    weights followed by the scalar ``lam``.
    """

    returns: ReturnsMatrix
    scale: float = 1.0

    @property
    def domain_dim(self):
        return self.returns.n_assets + 1

    @property
    def codomain_dim(self):
        return self.returns.n_scenarios

    def apply(self, v):
        v = np.asarray(v, dtype=float)
        if v.shape != (self.domain_dim,):
            raise StructuralError(f"K expects a point of length {self.domain_dim}, got {v.shape}")
        out = self.returns.values @ v[:-1] + v[-1]
        return out * self.scale if self.scale != 1.0 else out

    def adjoint(self, Z):
        Z = self.returns.space.check(Z)
        pz = self.returns.space.probs * Z
        out = np.empty(self.domain_dim)
        out[:-1] = pz @ self.returns.values
        out[-1] = pz.sum()
        return out * self.scale if self.scale != 1.0 else out

    def inner_codomain(self, a, b):
        return weighted_inner(self.returns.space, a, b)

    def norm_codomain(self, a):
        return self.returns.space.norm(a)

    def scaled(self, c):
        return OceOperatorK(self.returns, self.scale * c)


@dataclass(frozen=True, eq=False)
class DrOperatorR(_LinearOperator):
    """``x -> -scale * sum_i x_i R_i`` into weighted L^2.

    Paired with a dual density ``q`` this gives ``<q, -X>_p = -E[q X]``; the
    scenario masses of the dual measure are ``p_i q_i``.
    """

    returns: ReturnsMatrix
    scale: float = 1.0

    @property
    def domain_dim(self):
        return self.returns.n_assets

    @property
    def codomain_dim(self):
        return self.returns.n_scenarios

    def apply(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.domain_dim,):
            raise StructuralError(f"R expects {self.domain_dim} weights, got shape {x.shape}")
        return self.returns.values @ x * (-self.scale)

    def adjoint(self, Z):
        Z = self.returns.space.check(Z)
        return (self.returns.space.probs * Z) @ self.returns.values * (-self.scale)

    def inner_codomain(self, a, b):
        return weighted_inner(self.returns.space, a, b)

    def norm_codomain(self, a):
        return self.returns.space.norm(a)

    def scaled(self, c):
        return DrOperatorR(self.returns, self.scale * c)


def apply_K(op, x, lam):
    x = np.asarray(x, dtype=float)
    return op.apply(np.append(x, lam))


def adjoint_K(op, Z):
    """Return ``(<R_1, Z>, ..., <R_N, Z>)`` and ``E[Z]`` (both times ``op.scale``)."""
    out = op.adjoint(Z)
    return out[:-1], float(out[-1])


def apply_R(op, x):
    return op.apply(x)


def adjoint_R(op, Z):
    return op.adjoint(Z)


def operator_norm(op, tol=1e-10, max_iter=5000):
    """Operator norm of ``op`` by power iteration on ``op* op``.

    The norm is taken with respect to the Euclidean inner product on the
    domain and the operator's own codomain inner product.

    Raises
    ------
    OperatorNormError
        If the Rayleigh quotient has not settled to relative accuracy
        ``tol`` after ``max_iter`` steps. The last estimate is attached.
    """
    if tol <= 0:
        raise ConfigurationError("tol must be positive")
    n = op.domain_dim
    v = 1.0 + 1e-4 * np.arange(n) / max(n, 1)
    v /= np.linalg.norm(v)
    theta = 0.0
    for _ in range(max_iter):
        w = op.adjoint(op.apply(v))
        wn = np.linalg.norm(w)
        if wn == 0.0:
            return 0.0
        theta_new = float(np.dot(v, w))
        v = w / wn
        if abs(theta_new - theta) <= tol * abs(theta_new):
            return float(np.sqrt(theta_new))
        theta = theta_new
    raise OperatorNormError(
        f"power iteration did not converge in {max_iter} steps", float(np.sqrt(max(theta, 0.0)))
    )
