"""Convex, nonincreasing utility functions normalized by u(0) = 0, -1 in du(0)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError

__all__ = [
    "Utility",
    "UtilitySpec",
    "ScalarProxSpec",
    "piecewise_linear",
    "cvar",
    "exponential",
    "indicator",
    "quadratic",
    "logarithmic",
]

KINDS = ("piecewise_linear", "exponential", "indicator", "quadratic", "logarithmic")


@dataclass(frozen=True)
class Utility:
    """Tagged parameterization of one of the five supported utilities.

    ``alpha`` is set only when the utility was built by :func:`cvar`; it
    records the confidence level behind ``gamma2 = -1 / (1 - alpha)``.
    """

    kind: str
    gamma1: float = 0.0
    gamma2: float = -2.0
    beta: float = 1.0
    theta: float = 1.0
    alpha: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"unknown utility kind {self.kind!r}")
        if self.kind == "piecewise_linear" and not (self.gamma2 < -1.0 < self.gamma1 <= 0.0):
            raise ConfigurationError(
                f"piecewise linear utility needs gamma2 < -1 < gamma1 <= 0, "
                f"got gamma1={self.gamma1}, gamma2={self.gamma2}"
            )
        if self.kind == "quadratic" and not self.beta > 0:
            raise ConfigurationError(f"quadratic utility needs beta > 0, got {self.beta}")
        if self.kind == "logarithmic" and not self.theta > 0:
            raise ConfigurationError(f"logarithmic utility needs theta > 0, got {self.theta}")

    @property
    def is_cvar(self):
        return self.alpha is not None

    @property
    def positively_homogeneous(self):
        return self.kind in ("piecewise_linear", "indicator")

    @property
    def domain_lower(self):
        """Infimum of the effective domain (``-inf`` when it is all of R)."""
        if self.kind == "indicator":
            return 0.0
        if self.kind == "logarithmic":
            return -self.theta
        return -np.inf

    def value(self, t):
        """Evaluate u elementwise; ``+inf`` outside the domain."""
        t = np.asarray(t, dtype=float)
        k = self.kind
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            if k == "piecewise_linear":
                out = np.where(t > 0, self.gamma1 * t, self.gamma2 * t)
            elif k == "exponential":
                out = np.expm1(-t)
            elif k == "indicator":
                out = np.where(t >= 0, 0.0, np.inf)
            elif k == "quadratic":
                b = self.beta
                out = np.where(t <= 1.0 / b, 0.5 * b * t * t - t, -0.5 / b)
            else:
                th = self.theta
                out = np.where(t > -th, -th * np.log1p(t / th), np.inf)
        return out

    def right_derivative(self, t):
        """Right derivative of u; ``-inf`` left of the domain."""
        t = np.asarray(t, dtype=float)
        k = self.kind
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            if k == "piecewise_linear":
                out = np.where(t >= 0, self.gamma1, self.gamma2)
            elif k == "exponential":
                out = -np.exp(-t)
            elif k == "indicator":
                out = np.where(t >= 0, 0.0, -np.inf)
            elif k == "quadratic":
                b = self.beta
                out = np.where(t < 1.0 / b, b * t - 1.0, 0.0)
            else:
                th = self.theta
                out = np.where(t > -th, -th / (th + t), -np.inf)
        return out * 1.0

    def label(self):
        if self.is_cvar:
            return f"cvar:{self.alpha:g}"
        return {
            "piecewise_linear": f"linear:{self.gamma1:g},{self.gamma2:g}",
            "exponential": "exponential",
            "indicator": "indicator",
            "quadratic": f"quadratic:{self.beta:g}",
            "logarithmic": f"logarithmic:{self.theta:g}",
        }[self.kind]


UtilitySpec = Utility
ScalarProxSpec = Utility


def piecewise_linear(gamma1, gamma2):
    return Utility("piecewise_linear", gamma1=float(gamma1), gamma2=float(gamma2))


def cvar(alpha):
    """Piecewise linear utility with gamma1 = 0, gamma2 = -1/(1-alpha)."""
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ConfigurationError(f"CVaR level must lie in (0, 1), got {alpha}")
    return Utility("piecewise_linear", gamma1=0.0, gamma2=-1.0 / (1.0 - alpha), alpha=alpha)


def exponential():
    return Utility("exponential")


def indicator():
    return Utility("indicator")


def quadratic(beta):
    return Utility("quadratic", beta=float(beta))


def logarithmic(theta):
    return Utility("logarithmic", theta=float(theta))
