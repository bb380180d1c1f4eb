"""Command-line interface.

Subcommands::

    solve      one portfolio solve, writes a JSON solution document
    frontier   one solve per required return, writes a CSV and an SVG chart
    gen        synthetic returns CSV
    eval-risk  risk of a fixed weight vector
    compare    OCE path, DR path and exhaustive grid on one instance

Exit status: 0 when every solve converged, 2 when a solve stopped at the
iteration cap, 1 on usage, data or model errors.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import dataio, oracle
from .errors import PortfolioError
from .portfolio import PRESETS, PortfolioProblem, frontier, solve_portfolio
from .risk import risk_value, weighted_cvar
from .solver import Status
from .utility import cvar, exponential, indicator, logarithmic, piecewise_linear, quadratic

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_MAX_ITER = 2

log = logging.getLogger("pdportfolio")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit with status 1 instead of 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


# ------------------------------------------------------------------ parsing


def _floats(text, what):
    try:
        return [float(s) for s in text.split(",")]
    except ValueError:
        raise UsageError(f"{what}: expected comma-separated numbers, got {text!r}") from None


def parse_risk(text):
    """Parse a risk flag into ``(utility, terms)``; ``terms`` is empty except for ``wcvar``."""
    kind, _, arg = text.strip().partition(":")
    kind = kind.lower()
    try:
        if kind == "cvar":
            return cvar(float(arg)), ()
        if kind == "linear":
            g1, g2 = _floats(arg, "linear")
            return piecewise_linear(g1, g2), ()
        if kind == "exponential" and not arg:
            return exponential(), ()
        if kind == "indicator" and not arg:
            return indicator(), ()
        if kind == "quadratic":
            return quadratic(float(arg)), ()
        if kind == "logarithmic":
            return logarithmic(float(arg)), ()
        if kind == "wcvar":
            terms = []
            for item in arg.split(","):
                a, w = item.split(":")
                terms.append((float(a), float(w)))
            if not terms:
                raise ValueError
            return None, tuple(terms)
    except ValueError as err:
        raise UsageError(f"cannot parse risk {text!r}: {err}") from None
    raise UsageError(
        f"unknown risk {text!r}; use cvar:A, linear:G1,G2, exponential, indicator, "
        "quadratic:B, logarithmic:T or wcvar:A1:W1,A2:W2"
    )


def parse_grid(text):
    """``a:b:step`` to the list ``a, a+step, ...`` up to ``b`` inclusive."""
    try:
        a, b, step = (float(s) for s in text.split(":"))
    except ValueError:
        raise UsageError(f"grid must be a:b:step, got {text!r}") from None
    if not step > 0 or b < a:
        return []
    count = int(math.floor((b - a) / step + 1e-9)) + 1
    return [round(a + k * step, 12) for k in range(count)]


def load_data(path):
    """Price CSV (header starting with ``date``) or returns CSV."""
    with open(path, encoding="utf-8") as fh:
        first = fh.readline().split(",")[0].strip().lower()
    if first == "date":
        return dataio.prices_to_returns(dataio.load_prices_csv(path))
    return dataio.load_returns_csv(path)


def make_problem(returns, args):
    risk, terms = parse_risk(args.risk)
    formulation = args.formulation or ("wdr" if terms else "oce")
    if formulation == "wdr" and not terms:
        if risk is None or not risk.is_cvar:
            raise UsageError("formulation wdr needs --risk cvar:A or wcvar:...")
        terms = ((risk.alpha, 1.0),)
    if terms and formulation != "wdr":
        raise UsageError("wcvar risks need --formulation wdr")
    problem = PortfolioProblem(returns, args.mu_star, risk, formulation, terms)
    problem.check()
    return problem


def solve_kwargs(args):
    sigma = _floats(args.sigma, "--sigma") if args.sigma else None
    return dict(
        preset=args.preset,
        sigma=sigma,
        tau=args.tau,
        relax=args.relax,
        max_iter=args.max_iter,
        stop_tol=args.tol,
    )


# --------------------------------------------------------------- commands


def cmd_solve(args):
    returns = load_data(args.data)
    problem = make_problem(returns, args)
    result = solve_portfolio(problem, **solve_kwargs(args))
    record = dataio.solution_record(result, problem)
    if args.out:
        dataio.write_solution(args.out, record)
    print(f"status      {record['status']}")
    print(f"objective   {record['objective']:.10g}")
    print(f"iterations  {record['iterations']}")
    print(f"wall time   {record['wall_time_s']:.3f} s")
    return EXIT_OK if result.status is Status.CONVERGED else EXIT_MAX_ITER


def cmd_frontier(args):
    grid = parse_grid(args.mu_star_grid)
    if not grid:
        raise UsageError(f"empty grid {args.mu_star_grid!r}")
    returns = load_data(args.data)
    args.mu_star = min(grid)
    base = make_problem(returns, args)
    points = frontier(base, grid, jobs=args.jobs, **solve_kwargs(args))
    if args.out:
        dataio.write_frontier_csv(args.out, points)
        chart = Path(args.chart) if args.chart else Path(args.out).with_suffix(".svg")
        chart.write_text(dataio.frontier_svg(points, title=f"Efficient frontier, {base.label()}"), encoding="utf-8")
    print(f"{'mu_star':>10} {'risk':>14} {'status':>20} {'iterations':>10}")
    for p in points:
        print(f"{p.mu_star:>10.4g} {p.risk_value:>14.8g} {p.status.value:>20} {p.iterations:>10}")
    return EXIT_OK if all(p.converged for p in points) else EXIT_MAX_ITER


def _distribution(text):
    kind, _, rest = text.partition(":")
    if kind == "uniform":
        a, b = _floats(rest, "uniform") if rest else (-1.0, 1.0)
        return dataio.Uniform(a, b)
    if kind == "gaussian":
        if not rest:
            return dataio.Gaussian()
        means, _, vols = rest.partition(":")
        return dataio.Gaussian(tuple(_floats(means, "gaussian means")), tuple(_floats(vols, "gaussian vols")))
    raise UsageError(f"unknown distribution {text!r}; use uniform:A,B or gaussian:M1,M2:V1,V2")


def cmd_gen(args):
    spec = dataio.SyntheticSpec(args.seed, args.omega, args.n_assets, _distribution(args.dist))
    returns = dataio.gen_synthetic(spec)
    dataio.save_returns_csv(args.out, returns)
    print(f"wrote {returns.n_scenarios} scenarios x {returns.n_assets} assets to {args.out}")
    return EXIT_OK


def cmd_eval_risk(args):
    returns = load_data(args.data)
    weights = np.array(_floats(args.weights, "--weights"))
    if weights.size != returns.n_assets:
        raise UsageError(f"--weights has {weights.size} entries for {returns.n_assets} assets")
    risk, terms = parse_risk(args.risk)
    X = returns.payoff(weights)
    rho = weighted_cvar(terms, X, returns.space) if terms else risk_value(risk, X, returns.space)
    print(repr(float(rho)))
    return EXIT_OK


def cmd_compare(args):
    if args.data:
        returns = load_data(args.data)
    else:
        dist = _distribution(args.dist)
        returns = dataio.gen_synthetic(dataio.SyntheticSpec(args.seed, args.omega, args.n_assets, dist))
    risk, terms = parse_risk(args.risk)
    if terms or not risk.is_cvar:
        raise UsageError("compare needs --risk cvar:A")
    if args.mu_star is None:
        args.mu_star = 0.5 * (float(returns.mu.min()) + float(returns.mu.max()))
    kwargs = solve_kwargs(args)
    kwargs.pop("preset")
    rows = []
    worst = EXIT_OK
    for form in ("oce", "dr"):
        problem = PortfolioProblem(returns, args.mu_star, risk, form)
        problem.check()
        res = solve_portfolio(problem, **kwargs)
        rows.append((form.upper(), res.risk, res.status.value, res.iterations, res.wall_time))
        if res.status is not Status.CONVERGED:
            worst = EXIT_MAX_ITER
    if returns.n_assets <= 4:
        start = time.perf_counter()
        probs = returns.space.probs
        _, best = oracle.grid_search_simplex(
            returns,
            args.mu_star,
            lambda P: oracle.cvar_batch(risk.alpha, P, probs),
            oracle.GridSpec(args.grid_resolution),
        )
        rows.append(("grid", best, "exhaustive", 0, time.perf_counter() - start))
    ref = rows[-1][1]
    print(f"instance: |Omega|={returns.n_scenarios} N={returns.n_assets} mu*={args.mu_star:.6g} {risk.label()}")
    print(f"{'method':<6} {'objective':>14} {'rel.diff':>10} {'status':>12} {'iterations':>10} {'time[s]':>9}")
    for name, val, status, its, wall in rows:
        rel = abs(val - ref) / max(abs(ref), 1e-300)
        print(f"{name:<6} {val:>14.8g} {rel:>10.2e} {status:>12} {its:>10} {wall:>9.2f}")
    return worst


# ------------------------------------------------------------------- wiring


def _solver_flags(p):
    p.add_argument("--preset", choices=sorted(PRESETS), help="step-size recipe (default by formulation and size)")
    p.add_argument("--tau", type=float, help="primal step size (overrides the preset)")
    p.add_argument("--sigma", help="dual step sizes s1,s2,s3 (overrides the preset)")
    p.add_argument("--relax", type=float, default=1.99, help="relaxation parameter in (0, 2)")
    p.add_argument("--max-iter", type=int, default=20000)
    p.add_argument("--tol", type=float, default=1e-6, help="stopping tolerance on both residuals")


def _model_flags(p, data_required=True):
    p.add_argument("--data", required=data_required, help="price or returns CSV")
    p.add_argument("--risk", default="cvar:0.95")
    p.add_argument("--formulation", choices=("oce", "dr", "wdr"))


def build_parser():
    parser = _Parser(prog="pdportfolio", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="solve one portfolio problem")
    _model_flags(p)
    p.add_argument("--mu-star", type=float, required=True)
    _solver_flags(p)
    p.add_argument("--out", help="JSON solution document")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("frontier", help="sweep the required return")
    _model_flags(p)
    p.add_argument("--mu-star-grid", required=True, help="a:b:step, both ends included")
    _solver_flags(p)
    p.add_argument("--jobs", type=int, default=1, help="parallel frontier points")
    p.add_argument("--out", help="frontier CSV")
    p.add_argument("--chart", help="SVG chart (default: --out with suffix .svg)")
    p.set_defaults(func=cmd_frontier)

    p = sub.add_parser("gen", help="write synthetic returns")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--omega", type=int, required=True)
    p.add_argument("--n-assets", type=int, required=True)
    p.add_argument("--dist", default="uniform:-1,1", help="uniform:A,B or gaussian:M1,M2:V1,V2")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("eval-risk", help="risk of given weights")
    _model_flags(p)
    p.add_argument("--weights", required=True, help="comma-separated weights")
    p.set_defaults(func=cmd_eval_risk)

    p = sub.add_parser("compare", help="OCE vs DR vs grid on one instance")
    _model_flags(p, data_required=False)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--omega", type=int, default=50)
    p.add_argument("--n-assets", type=int, default=3)
    p.add_argument("--dist", default="gaussian")
    p.add_argument("--mu-star", type=float, help="default: midpoint of the expected returns")
    p.add_argument("--grid-resolution", type=float, default=1e-3)
    _solver_flags(p)
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return args.func(args)
    except (PortfolioError, UsageError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
