"""Risk-averse portfolio selection by primal-dual proximal splitting.

The solver handles optimized-certainty-equivalent risk measures directly
and CVaR (plain or a weighted combination of levels) through its dual
representation, where every proximal step is a projection.
"""

from .errors import (
    ConfigurationError,
    DataError,
    DivergenceError,
    ModelError,
    OperatorNormError,
    PortfolioError,
    StructuralError,
)
from .kernels import BACKEND
from .portfolio import (
    PRESETS,
    FrontierPoint,
    PortfolioProblem,
    PortfolioSolution,
    build_problem,
    feasibility_residual,
    frontier,
    solve_portfolio,
)
from .probspace import DiscreteSpace, DrOperatorR, OceOperatorK, ReturnsMatrix, operator_norm
from .risk import cvar_dual, cvar_sort, oce_evaluate, risk_value, var_evaluate, weighted_cvar
from .solver import Block, Solution, SolverConfig, Status, solve
from .utility import Utility, cvar, exponential, indicator, logarithmic, piecewise_linear, quadratic

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Block",
    "ConfigurationError",
    "DataError",
    "DiscreteSpace",
    "DivergenceError",
    "DrOperatorR",
    "FrontierPoint",
    "ModelError",
    "OceOperatorK",
    "OperatorNormError",
    "PRESETS",
    "PortfolioError",
    "PortfolioProblem",
    "PortfolioSolution",
    "ReturnsMatrix",
    "Solution",
    "SolverConfig",
    "Status",
    "StructuralError",
    "Utility",
    "build_problem",
    "cvar",
    "cvar_dual",
    "cvar_sort",
    "exponential",
    "feasibility_residual",
    "frontier",
    "indicator",
    "logarithmic",
    "oce_evaluate",
    "operator_norm",
    "piecewise_linear",
    "quadratic",
    "risk_value",
    "solve",
    "solve_portfolio",
    "var_evaluate",
    "weighted_cvar",
]
