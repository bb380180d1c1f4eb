"""Exception types raised across the package."""


class PortfolioError(Exception):
    """Base class for all package errors."""


class StructuralError(PortfolioError, ValueError):
    """Dimension or shape mismatch between arrays that must agree."""


class ConfigurationError(PortfolioError, ValueError):
    """Invalid parameters (utility constants, step sizes, bounds)."""


class ModelError(PortfolioError, ValueError):
    """The optimization model itself is ill-posed (e.g. infeasible return bound)."""


class DataError(PortfolioError, ValueError):
    """Malformed input data. Carries the offending line/row when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DivergenceError(PortfolioError, ArithmeticError):
    """Non-finite iterate encountered in the splitting iteration."""

    def __init__(self, message, iteration):
        super().__init__(f"{message} (iteration {iteration})")
        self.iteration = iteration


class OperatorNormError(PortfolioError, ArithmeticError):
    """Power iteration did not reach the requested relative accuracy."""

    def __init__(self, message, estimate):
        super().__init__(f"{message}; last estimate {float(estimate)!r}")
        self.estimate = estimate
