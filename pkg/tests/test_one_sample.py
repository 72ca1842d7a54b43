"""One-sample strategies: plug-in KS threshold selection, exponential
weights, simplex projection, and the chi-squared payoffs."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from betcraft.betting import OutOfSupport, run_sequential
from betcraft.one_sample import (
    Chi2State,
    Chi2Strategy,
    EWKSStrategy,
    EWState,
    KS1PluginState,
    KS1PluginStrategy,
    chi2_payoff,
    chi2_pgd_update,
    ew_payoffs,
    ew_update,
    ks1_payoff,
    ks1_select_u,
    ks_slack,
    project_simplex,
)
from betcraft.target import DiscreteCDF, NormalCDF, UniformCDF


def _grid_search_projection(v, n=2001):
    """Dense grid search over the simplex minimizing ||v - q||; oracle for
    the sort-based projection (m = 2 and 3 only)."""
    v = np.asarray(v, dtype=float)
    best, best_d = None, math.inf
    if v.size == 2:
        for a in np.linspace(0.0, 1.0, n):
            q = np.array([a, 1.0 - a])
            d = float(np.sum((v - q) ** 2))
            if d < best_d:
                best, best_d = q, d
    else:
        for a in np.linspace(0.0, 1.0, 201):
            for b in np.linspace(0.0, 1.0 - a, max(int(201 * (1 - a)), 1)):
                q = np.array([a, b, 1.0 - a - b])
                d = float(np.sum((v - q) ** 2))
                if d < best_d:
                    best, best_d = q, d
    return best


class TestKS1Selection:
    def test_slack_formula(self):
        assert ks_slack(2) == pytest.approx(math.sqrt(2 * math.log(2) / 2), abs=1e-15)

    def test_t2_slack_exceeds_any_gap(self):
        # 2 * slack(2) > 1 >= max gap, so the near-argmax set is the whole
        # grid and the smallest grid point is selected.
        assert 2.0 * ks_slack(2) > 1.0
        state = KS1PluginState(UniformCDF(0, 1))
        state.add(0.4)
        state.add(0.7)
        assert ks1_select_u(state, 2) == pytest.approx(0.4)

    def test_argmax_when_slack_negligible(self):
        # Samples {0.1, 0.2, 0.3} against Uniform[0,1]: the deviation is
        # maximal (0.7) at the largest sample, where F_hat = 1, F_P = 0.3.
        state = KS1PluginState(UniformCDF(0, 1))
        for y in [0.1, 0.2, 0.3]:
            state.add(y)
        u = ks1_select_u(state, 10**9)
        assert u == pytest.approx(0.3)
        gap = abs(1.0 - 0.3)
        assert gap == pytest.approx(0.7)

    def test_zero_slack_is_plain_argmax(self):
        state = KS1PluginState(UniformCDF(0, 1))
        for y in [0.1, 0.2, 0.3]:
            state.add(y)
        assert ks1_select_u(state, 2, slack=0.0) == pytest.approx(0.3)

    def test_selection_needs_history(self):
        state = KS1PluginState(UniformCDF(0, 1))
        with pytest.raises(ValueError):
            ks1_select_u(state, 5)

    def test_grid_capped(self):
        state = KS1PluginState(UniformCDF(0, 1), grid_cap=64)
        rng = np.random.default_rng(1)
        for y in rng.random(200):
            state.add(float(y))
        assert state.candidate_grid().size == 64


class TestKS1Payoff:
    def test_indicator_minus_target(self):
        target = UniformCDF(0, 1)
        assert ks1_payoff(0.2, 0.5, target) == pytest.approx(0.5)
        assert ks1_payoff(0.7, 0.5, target) == pytest.approx(-0.5)

    def test_zero_mean_under_target(self):
        target = DiscreteCDF([0.0, 1.0, 2.0], [0.3, 0.4, 0.3])
        for u in [-0.5, 0.0, 0.7, 1.0, 2.5]:
            mean = sum(
                p * ks1_payoff(y, u, target)
                for y, p in zip([0.0, 1.0, 2.0], [0.3, 0.4, 0.3])
            )
            assert mean == pytest.approx(0.0, abs=1e-12)

    def test_first_round_payoff_is_zero(self):
        strategy = KS1PluginStrategy(UniformCDF(0, 1))
        assert strategy.payoff(0.3) == 0.0


class TestEW:
    def test_uniform_prior_initially(self):
        state = EWState(np.linspace(0, 1, 8))
        np.testing.assert_allclose(state.weights_plus(), np.full(8, 1 / 8))

    def test_weights_are_pmfs_after_updates(self):
        state = EWState(np.linspace(0, 1, 32))
        target = UniformCDF(0, 1)
        rng = np.random.default_rng(3)
        for x in rng.random(30):
            ew_update(state, float(x), target)
        assert state.weights_plus().sum() == pytest.approx(1.0, abs=1e-12)
        assert state.weights_minus().sum() == pytest.approx(1.0, abs=1e-12)
        assert np.all(state.weights_plus() >= 0)

    def test_plus_minus_weights_mirror(self):
        # The two recursions tilt by opposite scores, so they coincide iff
        # every score has been zero.
        state = EWState(np.linspace(0, 1, 16))
        target = UniformCDF(0, 1)
        ew_update(state, 0.5, target)
        assert not np.allclose(state.log_weights_plus, state.log_weights_minus)

    def test_payoffs_in_range(self):
        state = EWState(np.linspace(0, 1, 64))
        target = UniformCDF(0, 1)
        rng = np.random.default_rng(5)
        for x in rng.random(20):
            ew_update(state, float(x), target)
        f_plus, f_minus = ew_payoffs(state, 0.42, target)
        assert -1.0 <= f_plus <= 1.0 and -1.0 <= f_minus <= 1.0

    def test_step_size_schedule(self):
        state = EWState()
        assert state.eta(4) == pytest.approx(0.5)
        assert state.eta(0) == pytest.approx(1.0)

    def test_strategy_rejects_under_shift(self):
        rng = np.random.default_rng(11)
        strategy = EWKSStrategy(NormalCDF(0, 1))
        out = run_sequential(strategy, rng.normal(0.8, 1.0, 2000), 0.05, 2000)
        assert out.rejected

    def test_strategy_fair_on_discrete_target(self):
        # The PIT of a discrete target is not uniform; the strategy must use
        # the exact transformed null CDF to keep both legs mean-zero.
        import copy

        atoms, probs = [0.0, 1.0, 2.0], [0.2, 0.5, 0.3]
        strategy = EWKSStrategy(DiscreteCDF(atoms, probs))
        ws = strategy.new_wealth()
        rng = np.random.default_rng(0)
        for z in rng.choice(atoms, size=30, p=probs):
            strategy.apply(ws, z)
            strategy.observe(z)
        expected = 0.0
        for z, p in zip(atoms, probs):
            w2 = copy.deepcopy(ws)
            strategy.apply(w2, z)
            expected += p * w2.wealth()
        assert expected == pytest.approx(ws.wealth(), abs=1e-10)


class TestProjectSimplex:
    def test_spec_example(self):
        # KKT threshold theta = 0.3 for v = (1.2, 0.4).
        np.testing.assert_allclose(project_simplex(np.array([1.2, 0.4])), [0.9, 0.1], atol=1e-12)

    def test_already_on_simplex(self):
        q = np.array([0.25, 0.25, 0.5])
        np.testing.assert_allclose(project_simplex(q), q, atol=1e-12)

    def test_all_mass_on_argmax_for_extreme_input(self):
        np.testing.assert_allclose(project_simplex(np.array([5.0, 0.0])), [1.0, 0.0], atol=1e-12)

    @given(st.lists(st.floats(-3, 3), min_size=2, max_size=3))
    @settings(max_examples=40, deadline=None)
    def test_matches_grid_search(self, v):
        v = np.asarray(v)
        got = project_simplex(v)
        assert got.sum() == pytest.approx(1.0, abs=1e-9)
        oracle = _grid_search_projection(v)
        # Grid resolution limits the oracle; compare achieved distances.
        assert float(np.sum((v - got) ** 2)) <= float(np.sum((v - oracle) ** 2)) + 1e-6


class TestChi2:
    def test_scaling_constant(self):
        state = Chi2State([0, 1], [0.5, 0.5])
        assert state.c_p == pytest.approx(1.0)
        state = Chi2State(list(range(10)), [0.1] * 10)
        assert state.c_p == pytest.approx(9.0)

    def test_payoff_before_data_is_zero(self):
        state = Chi2State([0, 1], [0.5, 0.5])
        assert chi2_payoff(state, 0) == 0.0

    def test_plugin_payoff_value(self):
        state = Chi2State([0, 1], [0.5, 0.5])
        state.counts[:] = [3, 1]
        # q_hat = (0.75, 0.25), C_P = 1: f(0) = 0.75/0.5 - 1 = 0.5.
        assert chi2_payoff(state, 0) == pytest.approx(0.5)
        assert chi2_payoff(state, 1) == pytest.approx(-0.5)

    def test_out_of_support_raises(self):
        state = Chi2State([0, 1], [0.5, 0.5])
        with pytest.raises(OutOfSupport):
            chi2_payoff(state, 7)

    def test_pgd_spec_example(self):
        # m = 2, p = (1/2, 1/2) so C_P = 1; q_1 = (1/2, 1/2); observing
        # symbol 0 at t = 2 steps by sqrt(2/2) / (1 * 1/2) = 2 on that
        # coordinate; projecting (2.5, 0.5) gives (1, 0).
        state = Chi2State([0, 1], [0.5, 0.5], mode="pgd")
        chi2_pgd_update(state, 0, 2)
        np.testing.assert_allclose(state.q_pgd, [1.0, 0.0], atol=1e-12)

    def test_pgd_iterates_stay_on_simplex(self):
        state = Chi2State(list(range(5)), [0.2] * 5, mode="pgd")
        rng = np.random.default_rng(8)
        for t, x in enumerate(rng.integers(0, 5, 100), start=2):
            chi2_pgd_update(state, int(x), t)
            assert state.q_pgd.sum() == pytest.approx(1.0, abs=1e-9)
            assert np.all(state.q_pgd >= -1e-12)

    def test_strategy_out_of_support_rejects(self):
        strategy = Chi2Strategy([0, 1], [0.5, 0.5])
        out = run_sequential(strategy, [0, 1, 0, 2], 0.05, 10)
        assert out.rejected and out.tau == 4 and out.final_wealth == math.inf

    def test_payoff_bounded_by_contract(self):
        # (q/p - 1)/C_P lies in [-1/C_P * 1, (1/min p - 1)/C_P] = [-1, 1].
        state = Chi2State([0, 1, 2], [0.5, 0.3, 0.2], mode="plugin")
        state.counts[:] = [0, 0, 10]
        for x in [0, 1, 2]:
            assert -1.0 <= chi2_payoff(state, x) <= 1.0
