import numpy as np
import pytest

from pdportfolio.errors import ConfigurationError, DivergenceError
from pdportfolio.solver import (
    Block,
    SolverConfig,
    SolverState,
    Status,
    iterate,
    recover_solutions,
    solve,
    validate_config,
)


def ident(y):
    return y


def zero_block(sigma=1.0):
    # g = 0, so g* is the indicator of {0}; l = delta_{0}, so the prox of l* is the identity
    return Block(lambda s, v: np.zeros_like(v), ident, ident, 1.0, sigma, dim=1)


def abs_block(center=2.0, sigma=1.0):
    # g(y) = |y - center|, g*(z) = center*z + delta_{[-1,1]}(z)
    return Block(lambda s, v: np.clip(v - s * center, -1.0, 1.0), ident, ident, 1.0, sigma, dim=1)


def halfline(t, x):
    return np.maximum(x, 0.0)


def dense_scan_argmin():
    xs = np.linspace(-5, 5, 100001)
    obj = np.where(xs >= 0, np.abs(xs - 2.0), np.inf)
    return float(xs[np.argmin(obj)])


class TestValidate:
    def test_inside(self):
        margin = validate_config(SolverConfig(tau=3.9), [Block(None, ident, ident, 1.0, 1.0)])
        assert margin == pytest.approx(0.1)

    def test_boundary_excluded(self):
        with pytest.raises(ConfigurationError, match="lhs = 4.0"):
            validate_config(SolverConfig(tau=4.0), [Block(None, ident, ident, 1.0, 1.0)])

    def test_oce_recipe_holds_for_any_norm(self):
        for nk in (0.05, 0.7, 1.0, 3.0, 40.0, 1e3):
            sig = [50.0, 50.0, 70.0 / nk]
            tau = 3.0 / (sig[0] + sig[1] + sig[2] * nk**2)
            blocks = [Block(None, ident, ident, n, s) for n, s in zip([1.0, 1.0, nk], sig)]
            lhs = 4.0 - validate_config(SolverConfig(tau=tau), blocks)
            assert lhs == pytest.approx(3.0)

    @pytest.mark.parametrize(
        "cfg",
        [
            SolverConfig(tau=0.0),
            SolverConfig(tau=1.0, lambda_relax=2.0),
            SolverConfig(tau=1.0, lambda_relax=0.0),
            SolverConfig(tau=1.0, max_iter=0),
            SolverConfig(tau=1.0, stop_tol=0.0),
        ],
    )
    def test_bad_config(self, cfg):
        with pytest.raises(ConfigurationError):
            validate_config(cfg, [Block(None, ident, ident, 1.0, 0.1)])

    def test_needs_blocks_and_positive_sigma(self):
        with pytest.raises(ConfigurationError):
            validate_config(SolverConfig(tau=1.0), [])
        with pytest.raises(ConfigurationError):
            validate_config(SolverConfig(tau=1.0), [Block(None, ident, ident, 1.0, 0.0)])


class TestZeroProblem:
    def test_fixed_point(self):
        state = SolverState(np.zeros(1), [np.zeros(1)])
        nxt = iterate(state, [zero_block()], lambda t, x: x, SolverConfig(tau=1.0))
        assert nxt.residual_primal == 0.0 and nxt.residual_dual == 0.0
        assert np.array_equal(nxt.x, state.x) and np.array_equal(nxt.v[0], state.v[0])

    def test_converges_immediately(self):
        cfg = SolverConfig(tau=1.0, stall_window=1)
        sol = solve([zero_block()], lambda t, x: x, cfg, np.zeros(1))
        assert sol.status is Status.CONVERGED and sol.iterations == 1

    def test_recovery_is_identity(self):
        p1, p2 = recover_solutions(np.zeros(1), [np.zeros(1)], [zero_block()], lambda t, x: x, SolverConfig(tau=1.0))
        assert np.array_equal(p1, [0.0]) and np.array_equal(p2[0], [0.0])


class TestOneDimensional:
    cfg = SolverConfig(tau=1.0, max_iter=5000, stop_tol=1e-10)

    def test_converges_to_minimizer(self):
        assert dense_scan_argmin() == pytest.approx(2.0, abs=1e-4)
        sol = solve([abs_block()], halfline, self.cfg, np.zeros(1), objective=lambda x: abs(x[0] - 2.0))
        assert sol.converged
        assert sol.primal[0] == pytest.approx(2.0, abs=1e-8)
        assert sol.residual_primal <= self.cfg.stop_tol and sol.residual_dual <= self.cfg.stop_tol
        assert sol.objective == pytest.approx(0.0, abs=1e-8)

    def test_weak_duality(self):
        sol = solve([abs_block()], halfline, self.cfg, np.array([7.0]))
        x = sol.primal[0]
        v = sol.dual[0][0]
        primal = abs(x - 2.0) if x >= 0 else np.inf
        # dual: -f*(-v) - g*(v) with f* = indicator of (-inf, 0] and g*(v) = 2v on [-1, 1]
        dual = -2.0 * v if (v >= -1e-8 and abs(v) <= 1.0 + 1e-8) else -np.inf
        assert primal >= dual - 1e-6
        assert primal - dual <= 1e-6

    def test_history(self):
        sol = solve([abs_block()], halfline, self.cfg, np.zeros(1))
        assert sol.residual_history.shape == (sol.iterations, 2)
        assert np.all(sol.residual_history >= 0)
        assert np.all(sol.residual_history[-self.cfg.stall_window :] <= self.cfg.stop_tol)


def test_max_iter_is_a_status():
    cfg = SolverConfig(tau=1.0, max_iter=7, stop_tol=1e-14)
    sol = solve([abs_block()], halfline, cfg, np.array([100.0]))
    assert sol.status is Status.MAX_ITER and not sol.converged
    assert sol.iterations == 7 and sol.residual_history.shape == (7, 2)
    assert np.all(np.isfinite(sol.residual_history))


def test_divergence_reports_iteration():
    calls = {"n": 0}

    def bad_prox(t, x):
        calls["n"] += 1
        return x if calls["n"] < 4 else np.full_like(x, np.nan)

    with pytest.raises(DivergenceError) as info:
        solve([abs_block()], bad_prox, SolverConfig(tau=1.0, max_iter=50), np.zeros(1))
    assert info.value.iteration == 4


def test_deterministic():
    cfg = SolverConfig(tau=0.5, max_iter=300, stop_tol=1e-12)
    a = solve([abs_block(3.0, 2.0), abs_block(-1.0, 1.0)], halfline, cfg, np.array([0.3]))
    b = solve([abs_block(3.0, 2.0), abs_block(-1.0, 1.0)], halfline, cfg, np.array([0.3]))
    assert np.array_equal(a.residual_history, b.residual_history)
    assert np.array_equal(a.primal, b.primal)


def test_callback_sees_every_state():
    seen = []
    sol = solve([abs_block()], halfline, SolverConfig(tau=1.0, max_iter=25, stop_tol=1e-14), np.zeros(1),
                callback=lambda s: seen.append(s.iteration))
    assert seen == list(range(1, sol.iterations + 1))


def test_two_block_median():
    # min_{x>=0} |x - 3| + |x + 1| + |x - 1| has the median 1 as its minimizer
    blocks = [abs_block(3.0, 0.5), abs_block(-1.0, 0.5), abs_block(1.0, 0.5)]
    sol = solve(blocks, halfline, SolverConfig(tau=1.0, max_iter=20000, stop_tol=1e-10), np.zeros(1))
    assert sol.converged
    xs = np.linspace(0, 4, 40001)
    scan = xs[np.argmin(np.abs(xs - 3) + np.abs(xs + 1) + np.abs(xs - 1))]
    assert sol.primal[0] == pytest.approx(scan, abs=1e-4)
