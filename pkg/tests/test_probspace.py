import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import random_space
from pdportfolio import oracle
from pdportfolio.errors import ConfigurationError, OperatorNormError, StructuralError
from pdportfolio.probspace import (
    DiscreteSpace,
    DrOperatorR,
    OceOperatorK,
    ReturnsMatrix,
    adjoint_K,
    adjoint_R,
    apply_K,
    apply_R,
    expectation,
    operator_norm,
    weighted_inner,
)

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


def loop_inner(p, X, Y):
    total = 0.0
    for pi, xi, yi in zip(p, X, Y):
        total += pi * xi * yi
    return total


class TestDiscreteSpace:
    def test_uniform(self):
        s = DiscreteSpace.uniform(4)
        assert s.size == 4
        assert np.allclose(s.probs, 0.25)

    @pytest.mark.parametrize("probs", [[0.5, 0.6], [-0.1, 1.1], [], [np.nan, 1.0]])
    def test_rejects_bad_probabilities(self, probs):
        with pytest.raises(ConfigurationError):
            DiscreteSpace(probs)

    def test_sum_tolerance(self):
        DiscreteSpace([0.5, 0.5 + 5e-13])
        with pytest.raises(ConfigurationError):
            DiscreteSpace([0.5, 0.5 + 1e-11])

    def test_probabilities_are_frozen(self):
        s = DiscreteSpace([0.25, 0.75])
        with pytest.raises(ValueError):
            s.probs[0] = 1.0


class TestInnerAndExpectation:
    def test_constant_one(self):
        assert weighted_inner(DiscreteSpace.uniform(2), [1, 1], [1, 1]) == 1.0

    def test_zero(self, rng):
        s = random_space(rng, 7)
        assert weighted_inner(s, np.zeros(7), rng.normal(size=7)) == 0.0

    def test_weighted_example(self):
        s = DiscreteSpace([0.25, 0.75])
        assert weighted_inner(s, [2, 0], [1, 1]) == pytest.approx(loop_inner(s.probs, [2, 0], [1, 1]))
        assert weighted_inner(s, [2, 0], [1, 1]) == pytest.approx(0.5, abs=1e-15)

    def test_expectation_examples(self):
        assert expectation(DiscreteSpace.uniform(3), [2.5, 2.5, 2.5]) == pytest.approx(2.5)
        assert expectation(DiscreteSpace.uniform(2), [-1, 1]) == 0.0
        assert expectation(DiscreteSpace([0.25, 0.75]), [2, 0]) == pytest.approx(0.5, abs=1e-15)

    def test_dimension_mismatch(self):
        with pytest.raises(StructuralError):
            weighted_inner(DiscreteSpace.uniform(2), [1, 2, 3], [1, 2, 3])
        with pytest.raises(StructuralError):
            expectation(DiscreteSpace.uniform(2), [1.0])

    @settings(max_examples=200, deadline=None)
    @given(arrays(float, 6, elements=finite), arrays(float, 6, elements=finite))
    def test_cauchy_schwarz(self, X, Y):
        s = DiscreteSpace([0.1, 0.2, 0.3, 0.15, 0.05, 0.2])
        lhs = weighted_inner(s, X, Y) ** 2
        rhs = s.norm(X) ** 2 * s.norm(Y) ** 2
        assert lhs <= rhs * (1 + 1e-12) + 1e-300


class TestReturnsMatrix:
    def test_mu_is_expectation(self, rng):
        s = random_space(rng, 9)
        R = ReturnsMatrix(rng.normal(size=(9, 4)), s)
        for i in range(4):
            assert abs(R.mu[i] - expectation(s, R.column(i))) <= 1e-12

    def test_shape_checks(self):
        with pytest.raises(StructuralError):
            ReturnsMatrix(np.zeros((3, 2)), DiscreteSpace.uniform(4))
        with pytest.raises(StructuralError):
            ReturnsMatrix.from_array(np.zeros((3, 2)), names=("a",))
        with pytest.raises(StructuralError):
            ReturnsMatrix.from_array([[np.inf, 1.0]])

    def test_default_names_and_payoff(self):
        R = ReturnsMatrix.from_array([[1.0, 2.0], [3.0, 4.0]])
        assert R.names == ("asset_1", "asset_2")
        assert np.allclose(R.payoff([0.5, 0.5]), [1.5, 3.5])


class TestOperatorK:
    def two_asset(self):
        return ReturnsMatrix.from_array([[-1.0, 1.0], [1.0, -1.0]])

    def test_constant_lambda(self, rng):
        R = ReturnsMatrix.from_array(rng.normal(size=(5, 3)))
        assert np.allclose(apply_K(OceOperatorK(R), np.zeros(3), 1.7), 1.7)

    def test_single_asset(self):
        R = ReturnsMatrix.from_array([[-1.0], [1.0]])
        assert np.array_equal(apply_K(OceOperatorK(R), [1.0], 0.0), [-1.0, 1.0])

    def test_two_asset_example(self):
        out = apply_K(OceOperatorK(self.two_asset()), [0.5, 0.5], 0.1)
        assert np.allclose(out, [0.1, 0.1], atol=1e-15)

    def test_adjoint_zero(self):
        x, lam = adjoint_K(OceOperatorK(self.two_asset()), np.zeros(2))
        assert np.array_equal(x, [0.0, 0.0]) and lam == 0.0

    def test_adjoint_example(self):
        R = ReturnsMatrix.from_array([[-1.0], [1.0]])
        x, lam = adjoint_K(OceOperatorK(R), [1.0, 0.0])
        assert x == pytest.approx([-0.5]) and lam == pytest.approx(0.5)

    def test_dimension_mismatch(self):
        K = OceOperatorK(self.two_asset())
        assert K.domain_dim == 3
        with pytest.raises(StructuralError):
            apply_K(K, [1.0, 2.0, 3.0], 0.0)
        with pytest.raises(StructuralError):
            adjoint_K(K, [1.0, 2.0, 3.0])


class TestOperatorR:
    def test_zero(self, rng):
        R = ReturnsMatrix.from_array(rng.normal(size=(4, 3)))
        assert np.array_equal(apply_R(DrOperatorR(R), np.zeros(3)), np.zeros(4))

    def test_negation_example(self):
        R = ReturnsMatrix.from_array([[-1.0], [1.0]])
        assert np.array_equal(apply_R(DrOperatorR(R), [2.0]), [2.0, -2.0])

    def test_is_negated_k(self, rng):
        R = ReturnsMatrix.from_array(rng.normal(size=(6, 3)), probs=random_space(rng, 6).probs)
        x = rng.normal(size=3)
        assert np.allclose(apply_R(DrOperatorR(R), x), -apply_K(OceOperatorK(R), x, 0.0))

    def test_dimension_mismatch(self):
        op = DrOperatorR(ReturnsMatrix.from_array([[1.0, 2.0]]))
        with pytest.raises(StructuralError):
            adjoint_R(op, [1.0, 2.0])


def test_adjointness_random(rng):
    worst = 0.0
    for _ in range(1000):
        m, n = rng.integers(1, 12), rng.integers(1, 6)
        R = ReturnsMatrix(rng.normal(size=(m, n)) * 3, random_space(rng, m))
        Z = rng.normal(size=m)
        x = rng.normal(size=n)
        lam = rng.normal()
        K = OceOperatorK(R)
        lhs = R.space.inner(apply_K(K, x, lam), Z)
        ax, al = adjoint_K(K, Z)
        rhs = float(x @ ax + lam * al)
        v_norm = math.hypot(np.linalg.norm(x), lam)
        worst = max(worst, abs(lhs - rhs) / (1 + v_norm * np.linalg.norm(Z)))
        D = DrOperatorR(R)
        lhs = R.space.inner(apply_R(D, x), Z)
        rhs = float(x @ adjoint_R(D, Z))
        worst = max(worst, abs(lhs - rhs) / (1 + np.linalg.norm(x) * np.linalg.norm(Z)))
    assert worst <= 1e-10


class TestOperatorNorm:
    def test_zero_returns(self):
        K = OceOperatorK(ReturnsMatrix.from_array(np.zeros((5, 2))))
        assert operator_norm(K) == pytest.approx(1.0, rel=1e-10)
        assert oracle.dense_operator_norm(K) == pytest.approx(1.0, rel=1e-12)

    def test_constant_single_asset(self):
        K = OceOperatorK(ReturnsMatrix.from_array(np.ones((7, 1))))
        assert operator_norm(K) == pytest.approx(math.sqrt(2.0), rel=1e-10)
        assert oracle.dense_operator_norm(K) == pytest.approx(math.sqrt(2.0), rel=1e-12)

    def test_zero_operator(self):
        D = DrOperatorR(ReturnsMatrix.from_array(np.zeros((3, 2))))
        assert operator_norm(D) == 0.0
        assert oracle.dense_operator_norm(D) == 0.0

    def test_matches_dense_eigensolve(self, rng):
        for _ in range(20):
            m, n = rng.integers(2, 40), rng.integers(1, 8)
            R = ReturnsMatrix(rng.normal(size=(m, n)), random_space(rng, m))
            for op in (OceOperatorK(R), DrOperatorR(R)):
                assert operator_norm(op) == pytest.approx(oracle.dense_operator_norm(op), rel=1e-8)

    def test_scale_equivariance(self, rng):
        R = ReturnsMatrix.from_array(rng.normal(size=(30, 4)))
        base = operator_norm(DrOperatorR(R))
        for c in (0.1, 2.0, 17.0):
            assert operator_norm(DrOperatorR(R).scaled(c)) == pytest.approx(c * base, rel=1e-9)
            assert operator_norm(DrOperatorR(R, -c)) == pytest.approx(c * base, rel=1e-9)

    def test_nonconvergence_carries_estimate(self, rng):
        R = ReturnsMatrix.from_array(rng.normal(size=(30, 6)))
        with pytest.raises(OperatorNormError) as info:
            operator_norm(OceOperatorK(R), tol=1e-15, max_iter=2)
        assert info.value.estimate > 0

    def test_bad_tol(self):
        with pytest.raises(ConfigurationError):
            operator_norm(OceOperatorK(ReturnsMatrix.from_array(np.ones((2, 1)))), tol=0.0)
