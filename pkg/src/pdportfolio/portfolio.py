"""Portfolio models wired into the splitting solver, plus frontier sweeps.

Three formulations of ``min rho(sum x_i R_i)`` subject to ``x >= 0``,
``sum x = 1`` and ``x^T mu >= mu_star``:

``oce``
    Variables ``(x, lam)``; objective ``lam + E[u(K(x, lam))]`` with the
    budget and return constraints as two extra indicator blocks.
``dr``
    CVaR only. Variables ``x``; the risk term is the infimal convolution of
    the support functions of ``U = {sum q = 1}`` and
    ``V = {0 <= q_i <= p_i/(1-alpha)}`` composed with ``x -> -sum x_i R_i``,
    so every prox is a projection.
``wdr``
    A positive combination of CVaRs at several levels, one ``U``/``V`` block
    per level.
"""

from __future__ import annotations

import logging
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from . import prox as px
from .errors import ConfigurationError, ModelError, OperatorNormError
from .probspace import DrOperatorR, OceOperatorK, ReturnsMatrix, operator_norm
from .risk import risk_value, weighted_cvar
from .solver import Block, Solution, SolverConfig, Status, solve
from .utility import Utility

__all__ = [
    "PortfolioProblem",
    "SplitProblem",
    "PortfolioSolution",
    "FrontierPoint",
    "PRESETS",
    "build_oce_problem",
    "build_dr_problem",
    "build_weighted_cvar_problem",
    "build_problem",
    "solve_portfolio",
    "frontier",
    "feasibility_residual",
    "dual_density_bounds",
]

log = logging.getLogger(__name__)

FORMULATIONS = ("oce", "dr", "wdr")

# (sigma_S, sigma_T, c for sigma_risk = c / ||L||, numerator of tau)
PRESETS = {
    "oce-default": (50.0, 50.0, 70.0, 3.0),
    "dr-small": (2.0, 2.0, 0.1, 2.0),
    "dr-large": (0.1, 0.1, 0.001, 2.0),
}
DR_LARGE_THRESHOLD = 5000


@dataclass(frozen=True)
class PortfolioProblem:
    """Inputs of one portfolio model.

    ``terms`` is only used by the ``wdr`` formulation and lists
    ``(alpha_j, w_j)`` pairs.
    """

    returns: ReturnsMatrix
    mu_star: float
    risk: Utility | None = None
    formulation: str = "oce"
    terms: tuple = ()

    def __post_init__(self):
        if self.formulation not in FORMULATIONS:
            raise ConfigurationError(f"unknown formulation {self.formulation!r}")
        if self.formulation == "wdr":
            if not self.terms:
                raise ConfigurationError("weighted CVaR needs at least one (alpha, weight) term")
            terms = tuple((float(a), float(w)) for a, w in self.terms)
            for a, w in terms:
                if not (0.0 < a < 1.0 and w > 0.0):
                    raise ConfigurationError(f"bad weighted CVaR term ({a}, {w})")
            object.__setattr__(self, "terms", terms)
        elif self.risk is None:
            raise ConfigurationError(f"formulation {self.formulation!r} needs a risk utility")
        if self.formulation == "dr" and not self.risk.is_cvar:
            raise ConfigurationError(
                "the dual-representation formulation exists only for CVaR; "
                f"got {self.risk.label()}"
            )

    def check(self):
        mu = self.returns.mu
        if not np.any(mu != 0.0):
            raise ModelError("expected returns are all zero")
        if self.mu_star > mu.max():
            raise ModelError(
                f"required return {float(self.mu_star)!r} exceeds the largest "
                f"expected return {float(mu.max())!r}"
            )

    def risk_of(self, weights):
        X = self.returns.payoff(weights)
        if self.formulation == "wdr":
            return weighted_cvar(self.terms, X, self.returns.space)
        return risk_value(self.risk, X, self.returns.space)

    def label(self):
        if self.formulation == "wdr":
            return "wcvar:" + ",".join(f"{a:g}:{w:g}" for a, w in self.terms)
        return self.risk.label()


@dataclass
class SplitProblem:
    """Solver-facing bundle for one model."""

    blocks: list
    f_prox: Callable
    x0: np.ndarray
    tau: float
    n_assets: int
    has_lambda: bool
    preset: str
    problem: PortfolioProblem

    def weights(self, primal):
        return np.asarray(primal[: self.n_assets], dtype=float)

    def lam(self, primal):
        return float(primal[-1]) if self.has_lambda else None


def _norm(op):
    try:
        return operator_norm(op)
    except OperatorNormError as err:
        warnings.warn(f"operator norm: {err}; using the last estimate", RuntimeWarning)
        return err.estimate


def _default_preset(problem):
    if problem.formulation == "oce":
        return "oce-default"
    return "dr-large" if problem.returns.n_scenarios >= DR_LARGE_THRESHOLD else "dr-small"


def _steps(preset, norms, sigma, tau):
    """Per-block sigmas and tau from a preset, with optional overrides.

    ``norms`` lists the operator norms of the risk blocks; the two
    constraint blocks always have norm 1.
    """
    if preset not in PRESETS:
        raise ConfigurationError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
    s1, s2, c, num = PRESETS[preset]
    m = 2 + len(norms)
    if sigma is None:
        sigmas = [s1, s2] + [c / n for n in norms]
    else:
        sigmas = [float(s) for s in sigma]
        if len(sigmas) == 3 and m > 3:
            sigmas = sigmas[:2] + [sigmas[2]] * (m - 2)
        if len(sigmas) != m:
            raise ConfigurationError(f"expected {m} sigma values, got {len(sigmas)}")
    if tau is None:
        tau = num / (sigmas[0] + sigmas[1] + sum(s * n**2 for s, n in zip(sigmas[2:], norms)))
    return sigmas, float(tau)


def _constraint_blocks(mu, mu_star, sigmas, with_lambda):
    n = mu.size
    dim = n + 1 if with_lambda else n

    def lifted(proj):
        if not with_lambda:
            return lambda g, y: proj(y)
        return lambda g, y: np.append(proj(y[:-1]), y[-1])

    proj_s = lifted(lambda y: px.proj_halfspace(mu, mu_star, y))
    proj_t = lifted(lambda y: px.proj_hyperplane_sum(1.0, y))

    def identity(y):
        return y

    return [
        Block(
            prox_g_star=lambda s, v: px.moreau_conjugate_prox(proj_s, s, v),
            apply_L=identity,
            adjoint_L=identity,
            norm_L=1.0,
            sigma=sigmas[0],
            dim=dim,
            name="return",
        ),
        Block(
            prox_g_star=lambda s, v: px.moreau_conjugate_prox(proj_t, s, v),
            apply_L=identity,
            adjoint_L=identity,
            norm_L=1.0,
            sigma=sigmas[1],
            dim=dim,
            name="budget",
        ),
    ]


def build_oce_problem(problem: PortfolioProblem, preset=None, sigma=None, tau=None):
    """Variables ``(x, lam)``; ``f = delta_{x>=0} + lam`` and three blocks.

    Blocks: ``delta_{S x R}`` and ``delta_{T x R}`` with identity operators,
    and ``E[u]`` composed with ``K``. The conjugate proxes come from
    Moreau's decomposition.
    """
    if problem.formulation != "oce":
        raise ConfigurationError(f"expected formulation 'oce', got {problem.formulation!r}")
    problem.check()
    R = problem.returns
    u = problem.risk
    K = OceOperatorK(R)
    norm_k = _norm(K)
    preset = preset or _default_preset(problem)
    sigmas, tau = _steps(preset, [norm_k], sigma, tau)
    blocks = _constraint_blocks(R.mu, problem.mu_star, sigmas, with_lambda=True)

    warm = {"s": None}

    def prox_eu(g, y):
        s = px.prox_expectation(u, g, y, x0=warm["s"])
        if u.kind == "exponential":
            warm["s"] = s
        return s

    blocks.append(
        Block(
            prox_g_star=lambda s, v: px.moreau_conjugate_prox(prox_eu, s, v),
            apply_L=K.apply,
            adjoint_L=K.adjoint,
            norm_L=norm_k,
            sigma=sigmas[2],
            norm=K.norm_codomain,
            dim=R.n_scenarios,
            name="risk",
        )
    )

    def f_prox(t, z):
        x, lam = px.prox_f_oce(t, z[:-1], z[-1])
        return np.append(x, lam)

    n = R.n_assets
    x0 = np.append(np.full(n, 1.0 / n), 0.0)
    return SplitProblem(blocks, f_prox, x0, tau, n, True, preset, problem)


def dual_density_bounds(alpha):
    """Box for the CVaR dual density: ``0 <= q <= 1/(1-alpha)``.

    In scenario masses ``p_i q_i`` this is ``0 <= mass_i <= p_i/(1-alpha)``.
    """
    return 0.0, 1.0 / (1.0 - alpha)


def _cvar_blocks(R, terms, sigmas, norms):
    """One ``U``/``V`` block per ``(alpha, weight)`` term.

    The dual variable is a density in weighted L^2: ``U = {E[q] = 1}`` and
    ``V = {0 <= q <= 1/(1-alpha)}``.
    """
    probs = R.space.probs
    out = []
    for (alpha, w), s, nrm in zip(terms, sigmas, norms):
        op = DrOperatorR(R, w)
        lo, up = dual_density_bounds(alpha)
        out.append(
            Block(
                prox_g_star=lambda s_, v: px.proj_mean(probs, 1.0, v),
                prox_l_star=lambda s_, v, lo=lo, up=up: np.clip(v, lo, up),
                apply_L=op.apply,
                adjoint_L=op.adjoint,
                norm_L=nrm,
                sigma=s,
                norm=op.norm_codomain,
                dim=R.n_scenarios,
                name=f"cvar@{alpha:g}",
            )
        )
    return out


def _dr_like(problem, terms, preset, sigma, tau):
    problem.check()
    R = problem.returns
    base_norm = _norm(DrOperatorR(R))
    norms = [w * base_norm for _, w in terms]
    preset = preset or _default_preset(problem)
    sigmas, tau = _steps(preset, norms, sigma, tau)
    blocks = _constraint_blocks(R.mu, problem.mu_star, sigmas, with_lambda=False)
    blocks.extend(_cvar_blocks(R, terms, sigmas[2:], norms))

    def f_prox(t, x):
        return px.proj_nonneg(x)

    n = R.n_assets
    return SplitProblem(blocks, f_prox, np.full(n, 1.0 / n), tau, n, False, preset, problem)


def build_dr_problem(problem: PortfolioProblem, preset=None, sigma=None, tau=None):
    """CVaR through its dual representation.

    ``f = delta_{x>=0}``; blocks ``delta_S``, ``delta_T`` and
    ``delta_U* [] delta_V*`` composed with ``R``. The conjugate proxes are
    the projections onto ``U`` (a hyperplane) and ``V`` (a box).
    """
    if problem.formulation != "dr":
        raise ConfigurationError(f"expected formulation 'dr', got {problem.formulation!r}")
    return _dr_like(problem, [(problem.risk.alpha, 1.0)], preset, sigma, tau)


def build_weighted_cvar_problem(problem: PortfolioProblem, preset=None, sigma=None, tau=None):
    if problem.formulation != "wdr":
        raise ConfigurationError(f"expected formulation 'wdr', got {problem.formulation!r}")
    return _dr_like(problem, list(problem.terms), preset, sigma, tau)


_BUILDERS = {"oce": build_oce_problem, "dr": build_dr_problem, "wdr": build_weighted_cvar_problem}


def build_problem(problem: PortfolioProblem, preset=None, sigma=None, tau=None):
    return _BUILDERS[problem.formulation](problem, preset=preset, sigma=sigma, tau=tau)


def feasibility_residual(weights, returns, mu_star):
    """``(max(0, -min x), |sum x - 1|, max(0, mu_star - x^T mu))``."""
    x = np.asarray(weights, dtype=float)
    mu = returns.mu if isinstance(returns, ReturnsMatrix) else np.asarray(returns, dtype=float)
    return (
        max(0.0, -float(x.min())),
        abs(float(x.sum()) - 1.0),
        max(0.0, float(mu_star) - float(x @ mu)),
    )


def _tidy(weights):
    w = np.maximum(weights, 0.0)
    total = w.sum()
    return w / total if total > 0 else w


@dataclass
class PortfolioSolution:
    """Result of one portfolio solve.

    ``weights`` are the solver weights clamped at zero and renormalized to
    sum one; ``raw_weights`` is the untouched primal output. ``risk`` is
    evaluated at ``weights`` by the direct risk evaluators.
    """

    weights: np.ndarray
    raw_weights: np.ndarray
    lam: float | None
    risk: float
    solution: Solution
    split: SplitProblem
    wall_time: float

    @property
    def status(self):
        return self.solution.status

    @property
    def iterations(self):
        return self.solution.iterations

    @property
    def converged(self):
        return self.solution.converged

    @property
    def feasibility(self):
        p = self.split.problem
        return feasibility_residual(self.raw_weights, p.returns, p.mu_star)


def solve_portfolio(
    problem: PortfolioProblem,
    preset=None,
    sigma=None,
    tau=None,
    relax=1.99,
    max_iter=20000,
    stop_tol=1e-6,
    stall_window=10,
):
    """Build the requested formulation and run the solver on it."""
    start = time.perf_counter()
    split = build_problem(problem, preset=preset, sigma=sigma, tau=tau)
    config = SolverConfig(
        tau=split.tau,
        lambda_relax=relax,
        max_iter=max_iter,
        stop_tol=stop_tol,
        stall_window=stall_window,
    )
    sol = solve(
        split.blocks,
        split.f_prox,
        config,
        split.x0,
        objective=lambda z: problem.risk_of(_tidy(split.weights(z))),
    )
    raw = split.weights(sol.primal)
    elapsed = time.perf_counter() - start
    log.debug("%s %s mu*=%g: %s after %d iterations", problem.formulation, problem.label(),
              problem.mu_star, sol.status.value, sol.iterations)
    return PortfolioSolution(_tidy(raw), raw, split.lam(sol.primal), sol.objective, sol, split, elapsed)


@dataclass(frozen=True)
class FrontierPoint:
    mu_star: float
    risk_value: float
    weights: np.ndarray
    status: Status
    iterations: int
    raw_weights: np.ndarray = None

    @property
    def converged(self):
        return self.status is Status.CONVERGED


def _frontier_point(args):
    problem, kwargs = args
    try:
        res = solve_portfolio(problem, **kwargs)
    except ModelError:
        n = problem.returns.n_assets
        nan = np.full(n, np.nan)
        return FrontierPoint(problem.mu_star, float("nan"), nan, Status.INFEASIBLE, 0, nan)
    return FrontierPoint(problem.mu_star, res.risk, res.weights, res.status, res.iterations, res.raw_weights)


def frontier(problem: PortfolioProblem, mu_star_grid, jobs=1, **solve_kwargs):
    """Solve once per required return in ``mu_star_grid``.

    Points that hit ``max_iter`` are kept with their status; grid values above
    the largest expected return give ``Status.INFEASIBLE`` points.
    """
    tasks = [(replace(problem, mu_star=float(m)), solve_kwargs) for m in mu_star_grid]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_frontier_point, tasks))
    return [_frontier_point(t) for t in tasks]
