import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pdportfolio.errors import ConfigurationError
from pdportfolio.utility import (
    Utility,
    cvar,
    exponential,
    indicator,
    logarithmic,
    piecewise_linear,
    quadratic,
)

ALL = [piecewise_linear(-0.3, -2.5), cvar(0.9), exponential(), indicator(), quadratic(2.0), logarithmic(0.7)]
IDS = [u.label() for u in ALL]


def test_cvar_alias_expands_exactly():
    u = cvar(0.95)
    assert u.kind == "piecewise_linear"
    assert u.gamma1 == 0.0
    assert u.gamma2 == -1.0 / (1.0 - 0.95)
    assert u.is_cvar and u.alpha == 0.95


@pytest.mark.parametrize(
    "make",
    [
        lambda: piecewise_linear(0.1, -2.0),
        lambda: piecewise_linear(-0.5, -0.9),
        lambda: piecewise_linear(-1.0, -2.0),
        lambda: quadratic(0.0),
        lambda: logarithmic(-1.0),
        lambda: cvar(1.0),
        lambda: cvar(0.0),
        lambda: Utility("power"),
    ],
)
def test_invalid_parameters(make):
    with pytest.raises(ConfigurationError):
        make()


@pytest.mark.parametrize("u", ALL, ids=IDS)
def test_normalized_at_zero(u):
    assert u.value(0.0) == 0.0


@pytest.mark.parametrize("u", ALL, ids=IDS)
@given(t=st.floats(-0.99 * 0.7, 50, allow_nan=False))
def test_bounds_used_by_the_risk_lower_bound(u, t):
    # u(t) >= -t everywhere on the domain and u(t) <= 0 for t >= 0
    v = float(u.value(t))
    assert v >= -t - 1e-12 * (1 + abs(t))
    if t >= 0:
        assert v <= 1e-15


@pytest.mark.parametrize("u", ALL, ids=IDS)
def test_right_derivative_matches_quotient(u, rng):
    t = rng.uniform(max(-0.6, u.domain_lower), 5.0, 200)
    t = t[np.abs(t) > 1e-3]
    t = t[np.abs(t - 1.0 / getattr(u, "beta", 1.0)) > 1e-3]
    h = 1e-7
    q = (u.value(t + h) - u.value(t)) / h
    assert np.allclose(u.right_derivative(t), q, rtol=1e-5, atol=1e-5)


def test_domains():
    assert indicator().domain_lower == 0.0
    assert logarithmic(2.0).domain_lower == -2.0
    assert exponential().domain_lower == -np.inf
    assert indicator().value(-1e-9) == np.inf
    assert logarithmic(2.0).value(-2.0) == np.inf


def test_labels():
    assert [u.label() for u in ALL] == [
        "linear:-0.3,-2.5",
        "cvar:0.9",
        "exponential",
        "indicator",
        "quadratic:2",
        "logarithmic:0.7",
    ]
    assert cvar(0.5).positively_homogeneous and not exponential().positively_homogeneous
