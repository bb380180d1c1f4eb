"""Error-tolerant primal-dual proximal splitting for sums of composed functions.

Solves ``min_x f(x) + sum_i (g_i [] l_i)(L_i x)`` together with its
Fenchel-type dual. ``[]`` is infimal convolution; a block without ``l_i``
uses ``l_i = delta_{0}`` so that ``g_i [] l_i = g_i`` and the prox of
``l_i*`` is the identity.

One iteration, for step sizes ``tau``, ``sigma_i`` and relaxation ``lam``::

    p1  = prox_{tau f}(x - tau/2 sum_i L_i* v_i)
    w1  = 2 p1 - x
    p2i = prox_{sigma_i g_i*}(v_i + sigma_i/2 L_i w1)
    w2i = 2 p2i - v_i
    z1  = w1 - tau/2 sum_i L_i* w2i
    x  <- x + lam (z1 - p1)
    z2i = prox_{sigma_i l_i*}(w2i + sigma_i/2 L_i (2 z1 - w1))
    v_i <- v_i + lam (z2i - p2i)

The steps ``lam (z1 - p1)`` and ``lam (z2i - p2i)`` tend to zero and are
used as the stopping residuals.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ConfigurationError, DivergenceError

__all__ = [
    "Block",
    "SolverConfig",
    "SolverState",
    "Solution",
    "Status",
    "validate_config",
    "iterate",
    "solve",
    "recover_solutions",
]


class Status(str, enum.Enum):
    CONVERGED = "converged"
    MAX_ITER = "max_iter"
    INFEASIBLE = "infeasible_detected"


def _euclid(a):
    return float(np.linalg.norm(a))


@dataclass
class Block:
    """One term ``(g_i [] l_i) o L_i`` of the objective.

    ``prox_g_star(sigma, v)`` and ``prox_l_star(sigma, v)`` evaluate the
    proxes of the conjugates; ``norm`` measures points of the block's
    codomain and must match the inner product ``adjoint_L`` was derived from.
    """

    prox_g_star: Callable[[float, np.ndarray], np.ndarray]
    apply_L: Callable[[np.ndarray], np.ndarray]
    adjoint_L: Callable[[np.ndarray], np.ndarray]
    norm_L: float
    sigma: float
    prox_l_star: Optional[Callable[[float, np.ndarray], np.ndarray]] = None
    norm: Callable[[np.ndarray], float] = _euclid
    dim: Optional[int] = None
    name: str = ""


@dataclass(frozen=True)
class SolverConfig:
    tau: float
    lambda_relax: float = 1.99
    max_iter: int = 20000
    stop_tol: float = 1e-6
    stall_window: int = 10


@dataclass
class SolverState:
    x: np.ndarray
    v: list
    iteration: int = 0
    residual_primal: float = np.inf
    residual_dual: float = np.inf


@dataclass
class Solution:
    primal: np.ndarray
    dual: list
    objective: float
    iterations: int
    status: Status
    residual_history: np.ndarray
    state: SolverState = field(repr=False, default=None)

    @property
    def converged(self):
        return self.status is Status.CONVERGED

    @property
    def residual_primal(self):
        return float(self.residual_history[-1, 0]) if len(self.residual_history) else np.inf

    @property
    def residual_dual(self):
        return float(self.residual_history[-1, 1]) if len(self.residual_history) else np.inf


def validate_config(config: SolverConfig, blocks):
    """Check the step-size condition ``tau * sum sigma_i ||L_i||^2 < 4``.

    Returns the margin ``4 - lhs``.

    Raises
    ------
    ConfigurationError
        On any violated condition; the message carries the computed left-hand side.
    """
    if not config.tau > 0:
        raise ConfigurationError(f"tau must be positive, got {config.tau}")
    if not 0.0 < config.lambda_relax < 2.0:
        raise ConfigurationError(f"relaxation must lie in (0, 2), got {config.lambda_relax}")
    if config.max_iter < 1 or config.stall_window < 1 or not config.stop_tol > 0:
        raise ConfigurationError("max_iter, stall_window and stop_tol must be positive")
    if not blocks:
        raise ConfigurationError("at least one block is required")
    for b in blocks:
        if not b.sigma > 0:
            raise ConfigurationError(f"sigma of block {b.name!r} must be positive, got {b.sigma}")
    lhs = config.tau * sum(b.sigma * b.norm_L**2 for b in blocks)
    if not lhs < 4.0:
        raise ConfigurationError(f"step sizes violate tau*sum(sigma_i*||L_i||^2) < 4: lhs = {float(lhs)!r}")
    return 4.0 - lhs


def _adjoint_sum(blocks, points):
    total = blocks[0].adjoint_L(points[0])
    for b, p in zip(blocks[1:], points[1:]):
        total = total + b.adjoint_L(p)
    return total


def iterate(state: SolverState, blocks, f_prox, config: SolverConfig):
    """Advance one iteration; returns a new :class:`SolverState`."""
    tau = config.tau
    lam = config.lambda_relax
    x, v = state.x, state.v

    p1 = f_prox(tau, x - 0.5 * tau * _adjoint_sum(blocks, v))
    w1 = 2.0 * p1 - x
    p2 = []
    w2 = []
    for b, vi in zip(blocks, v):
        p = b.prox_g_star(b.sigma, vi + 0.5 * b.sigma * b.apply_L(w1))
        p2.append(p)
        w2.append(2.0 * p - vi)
    z1 = w1 - 0.5 * tau * _adjoint_sum(blocks, w2)
    step_x = lam * (z1 - p1)
    x_new = x + step_x
    d = 2.0 * z1 - w1
    v_new = []
    res_dual = 0.0
    for b, vi, pi, wi in zip(blocks, v, p2, w2):
        arg = wi + 0.5 * b.sigma * b.apply_L(d)
        z2 = arg if b.prox_l_star is None else b.prox_l_star(b.sigma, arg)
        step = lam * (z2 - pi)
        v_new.append(vi + step)
        res_dual = max(res_dual, b.norm(step))
    res_primal = float(np.linalg.norm(step_x))
    n = state.iteration + 1
    if not (np.isfinite(res_primal) and np.isfinite(res_dual)):
        raise DivergenceError("non-finite iterate", n)
    return SolverState(x_new, v_new, n, res_primal, res_dual)


def recover_solutions(x, v, blocks, f_prox, config: SolverConfig):
    """Primal and dual points attached to a (limit) pair ``(x, v)``::

        p1  = prox_{tau f}(x - tau/2 sum L_i* v_i)
        p2i = prox_{sigma_i g_i*}(v_i + sigma_i/2 L_i (2 p1 - x))
    """
    tau = config.tau
    p1 = f_prox(tau, x - 0.5 * tau * _adjoint_sum(blocks, v))
    w = 2.0 * p1 - x
    p2 = [b.prox_g_star(b.sigma, vi + 0.5 * b.sigma * b.apply_L(w)) for b, vi in zip(blocks, v)]
    return p1, p2


def solve(blocks, f_prox, config: SolverConfig, x0, v0=None, objective=None, callback=None):
    """Run the iteration until both residuals stay below ``stop_tol``.

    Convergence is declared once ``residual_primal`` and ``residual_dual``
    have both been at most ``config.stop_tol`` for ``config.stall_window``
    consecutive iterations. Reaching ``max_iter`` is not an error: the
    returned :class:`Solution` then has ``status == Status.MAX_ITER``.

    Parameters
    ----------
    blocks : list of Block
    f_prox : callable
        ``f_prox(tau, x)`` evaluates ``prox_{tau f}(x)``.
    config : SolverConfig
    x0 : array
        Initial primal point.
    v0 : list of arrays, optional
        Initial dual points; zeros of dimension ``block.dim`` by default.
    objective : callable, optional
        Maps the recovered primal point to the reported objective value.
    callback : callable, optional
        Called with each new :class:`SolverState`.
    """
    validate_config(config, blocks)
    x0 = np.array(x0, dtype=float)
    if v0 is None:
        v0 = [np.zeros(b.dim if b.dim is not None else x0.size) for b in blocks]
    state = SolverState(x0, [np.array(vi, dtype=float) for vi in v0])

    history = np.empty((config.max_iter, 2))
    streak = 0
    status = Status.MAX_ITER
    tol = config.stop_tol
    while state.iteration < config.max_iter:
        state = iterate(state, blocks, f_prox, config)
        history[state.iteration - 1] = (state.residual_primal, state.residual_dual)
        if callback is not None:
            callback(state)
        if state.residual_primal <= tol and state.residual_dual <= tol:
            streak += 1
            if streak >= config.stall_window:
                status = Status.CONVERGED
                break
        else:
            streak = 0

    primal, dual = recover_solutions(state.x, state.v, blocks, f_prox, config)
    value = float(objective(primal)) if objective is not None else float("nan")
    return Solution(
        primal=primal,
        dual=dual,
        objective=value,
        iterations=state.iteration,
        status=status,
        residual_history=history[: state.iteration].copy(),
        state=state,
    )
