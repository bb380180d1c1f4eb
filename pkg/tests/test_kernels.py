"""The compiled and NumPy kernels must agree; the package must run on either."""

import os
import subprocess
import sys

import numpy as np
import pytest

from pdportfolio import kernels

BACKENDS = kernels.backends()
needs_compiled = pytest.mark.skipif("cython" not in BACKENDS, reason="compiled kernels not built")


@pytest.fixture
def t(rng):
    return np.concatenate([rng.normal(0, 5, 4000), rng.uniform(-1e3, 1e3, 500), [0.0, -0.0, 1e-300, -700, 700]])


@needs_compiled
def test_piecewise_linear_parity(t):
    a = BACKENDS["python"].prox_piecewise_linear(t, 0.7, -0.2, -3.0)
    b = BACKENDS["cython"].prox_piecewise_linear(t, 0.7, -0.2, -3.0)
    assert np.array_equal(a, b)


@needs_compiled
def test_halfline_parity(t):
    assert np.array_equal(BACKENDS["python"].prox_halfline(t), BACKENDS["cython"].prox_halfline(t))


@needs_compiled
def test_quadratic_parity(t):
    a = BACKENDS["python"].prox_quadratic(t, 0.3, 2.0)
    b = BACKENDS["cython"].prox_quadratic(t, 0.3, 2.0)
    assert np.array_equal(a, b)


@needs_compiled
def test_logarithmic_parity(t):
    a = BACKENDS["python"].prox_logarithmic(t, 1.3, 0.4)
    b = BACKENDS["cython"].prox_logarithmic(t, 1.3, 0.4)
    assert np.allclose(a, b, rtol=1e-14, atol=1e-14)


@needs_compiled
@pytest.mark.parametrize("gamma", [1e-6, 0.05, 1.0, 40.0])
@pytest.mark.parametrize("iters", [0, 1, 5])
def test_exponential_parity(t, gamma, iters):
    x0 = t + 0.3
    a = BACKENDS["python"].prox_exponential(t, gamma, x0, iters, 1e-9)
    b = BACKENDS["cython"].prox_exponential(t, gamma, x0, iters, 1e-9)
    # exp from libm and from numpy may differ in the last bit
    assert np.allclose(a, b, rtol=1e-13, atol=1e-13)


def test_backend_flag_matches_module():
    assert kernels.BACKEND in BACKENDS
    assert kernels.prox_exponential is BACKENDS[kernels.BACKEND].prox_exponential


def test_pure_python_switch():
    env = dict(os.environ, PDPORTFOLIO_PURE_PYTHON="1")
    code = "import pdportfolio, pdportfolio.kernels as k; print(pdportfolio.BACKEND, k.BACKEND)"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["python", "python"]
