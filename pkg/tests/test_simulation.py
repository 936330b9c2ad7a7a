import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import normal_expected_positive_part
from welfare_pareto import (Cohort, GaussianModel, add_prediction_noise,
                            empirical_suboptimality_bound, optimal_expected_alpha_utility,
                            plugin_utility_lower_bound, run_trials, sample_cohort, sigma_tilde_sq,
                            sigma_y)
from welfare_pareto.simulation import WORKERS_ENV, mean_and_se, realized_gap, trial_seed

N = 5000


class TestGaussianModel:
    @pytest.mark.parametrize("kw", [dict(rho=1.5), dict(sigma_w=-1), dict(sigma_eps_p=math.nan)])
    def test_validation(self, kw):
        with pytest.raises(ValueError):
            GaussianModel(**kw)

    def test_covariance_psd(self):
        for rho in np.linspace(-1, 1, 9):
            cov = GaussianModel(2.0, 0.5, rho).score_covariance()
            assert np.linalg.eigvalsh(cov).min() >= -1e-12


class TestSampling:
    def test_degenerate(self):
        c = sample_cohort(GaussianModel(0.0, 0.0), 10, seed=1)
        assert np.all(c.profit == 0) and np.all(c.welfare == 0)

    def test_perfect_correlation(self):
        c = sample_cohort(GaussianModel(rho=1.0), N, seed=2)
        assert np.corrcoef(c.profit, c.welfare)[0, 1] == pytest.approx(1.0, abs=3 / math.sqrt(N))

    def test_half_correlation(self):
        c = sample_cohort(GaussianModel(rho=0.5), N, seed=3)
        r = np.corrcoef(c.profit, c.welfare)[0, 1]
        assert abs(r - 0.5) <= 3 * (1 - 0.25) / math.sqrt(N)

    def test_reproducible(self):
        m = GaussianModel(rho=0.2, sigma_eps_w=1.0, sigma_eps_p=1.0)
        a = add_prediction_noise(sample_cohort(m, 100, seed=9), m, seed=10)
        b = add_prediction_noise(sample_cohort(m, 100, seed=9), m, seed=10)
        assert np.array_equal(a.profit_hat, b.profit_hat)
        assert np.array_equal(a.welfare_hat, b.welfare_hat)

    def test_zero_noise(self):
        c = sample_cohort(GaussianModel(), 50, seed=1)
        noisy = add_prediction_noise(c, GaussianModel(), seed=2)
        assert np.array_equal(noisy.profit_hat, c.profit)

    def test_noise_std_and_independence(self):
        m = GaussianModel(sigma_eps_p=1.0)
        c = add_prediction_noise(sample_cohort(m, N, seed=4), m, seed=5)
        e = c.profit_hat - c.profit
        assert abs(e.std() - 1.0) <= 3 / math.sqrt(2 * N)
        assert abs(np.corrcoef(e, c.profit)[0, 1]) <= 3 / math.sqrt(N)

    def test_independent_noise_uncorrelated(self):
        m = GaussianModel(sigma_eps_w=1.0, sigma_eps_p=1.0)
        c = add_prediction_noise(sample_cohort(m, N, seed=6), m, seed=7)
        r = np.corrcoef(c.profit_hat - c.profit, c.welfare_hat - c.welfare)[0, 1]
        assert abs(r) <= 3 / math.sqrt(N)

    def test_dependent_noise_shared_draw(self):
        m = GaussianModel(sigma_eps_w=2.0, sigma_eps_p=1.0, noise_independent=False)
        c = add_prediction_noise(sample_cohort(m, 100, seed=6), m, seed=7)
        assert np.allclose(c.welfare_hat - c.welfare, 2 * (c.profit_hat - c.profit))


class TestClosedForms:
    def test_sigma_y(self):
        assert sigma_y(GaussianModel(sigma_p=2.0), 0.0) == 2.0
        assert sigma_y(GaussianModel(), 0.5) == pytest.approx(math.sqrt(0.5))
        assert sigma_y(GaussianModel(rho=1.0), 0.5) == pytest.approx(1.0)

    def test_sigma_tilde(self):
        assert sigma_tilde_sq(GaussianModel(), 0.3) == 0.0
        dep = GaussianModel(sigma_eps_w=1.0, sigma_eps_p=1.0, noise_independent=False)
        ind = GaussianModel(sigma_eps_w=1.0, sigma_eps_p=1.0)
        assert sigma_tilde_sq(dep, 0.5) == pytest.approx(2.0)
        assert sigma_tilde_sq(ind, 0.5) == pytest.approx(0.5)

    def test_optimal_utility(self):
        assert optimal_expected_alpha_utility(GaussianModel(0.0, 0.0), 0.5) == 0.0
        assert optimal_expected_alpha_utility(GaussianModel(), 0.0) == pytest.approx(0.39894, abs=1e-5)

    @given(st.floats(0, 3), st.floats(0, 3), st.floats(-1, 1), st.floats(0, 1))
    def test_optimal_utility_quadrature(self, sw, sp, rho, alpha):
        m = GaussianModel(sw, sp, rho)
        assert optimal_expected_alpha_utility(m, alpha) == pytest.approx(
            normal_expected_positive_part(sigma_y(m, alpha)), rel=1e-7, abs=1e-12)

    def test_lower_bound_zero_noise(self):
        m = GaussianModel(rho=0.4)
        for a in np.linspace(0, 1, 11):
            assert plugin_utility_lower_bound(m, a) == optimal_expected_alpha_utility(m, a)

    def test_lower_bound_small_noise(self):
        m = GaussianModel(sigma_eps_w=0.1, sigma_eps_p=0.1, noise_independent=False)
        # sigma_y^2 = 0.5, sigma_tilde^2 = 0.02: factor 1 - 0.04 / 0.52
        want = math.sqrt(0.5) / math.sqrt(2 * math.pi) * (1 - 0.04 / 0.52)
        assert plugin_utility_lower_bound(m, 0.5) == pytest.approx(want)
        assert want == pytest.approx(0.2604, abs=1e-4)

    def test_lower_bound_vacuous(self):
        m = GaussianModel(sigma_eps_w=1.0, sigma_eps_p=1.0, noise_independent=False)
        opt = optimal_expected_alpha_utility(m, 0.5)
        assert plugin_utility_lower_bound(m, 0.5) == pytest.approx(-0.6 * opt)

    def test_degenerate_bound(self):
        assert plugin_utility_lower_bound(GaussianModel(0.0, 0.0), 0.5) == 0.0

    @pytest.mark.parametrize("alpha", [0.1, 0.5, 0.9])
    def test_monotone_in_rho(self, alpha):
        vals = [optimal_expected_alpha_utility(GaussianModel(rho=r), alpha)
                for r in np.linspace(-1, 1, 21)]
        assert np.all(np.diff(vals) >= 0)


class TestEmpiricalBound:
    def test_exact_predictions(self):
        c = sample_cohort(GaussianModel(), 100, seed=1)
        c = c.with_predictions(c.profit, c.welfare)
        assert empirical_suboptimality_bound(c, 0.4) == 0.0
        assert realized_gap(c, 0.4) == 0.0

    def test_profit_only_weight(self):
        c = Cohort([0, 0], [0, 0], [0.3, -0.3], [5.0, -5.0])
        assert empirical_suboptimality_bound(c, 0.0) == pytest.approx(0.3)

    def test_gap_within_bound(self):
        m = GaussianModel(sigma_eps_w=1.0, sigma_eps_p=1.0)
        c = add_prediction_noise(sample_cohort(m, N, seed=12), m, seed=13)
        for a in np.linspace(0, 1, 21):
            g = realized_gap(c, a)
            assert 0 <= g <= empirical_suboptimality_bound(c, a)


class TestTrials:
    def test_seed_depends_only_on_index(self):
        assert trial_seed(7, 3) == trial_seed(7, 3)
        assert trial_seed(7, 3) != trial_seed(7, 4)
        assert trial_seed(7, 3) != trial_seed(8, 3)

    def test_reproducible_and_order_independent(self):
        m = GaussianModel(sigma_eps_w=0.5, sigma_eps_p=0.5)
        grid = np.linspace(0, 1, 5)
        serial = run_trials(m, 300, 4, grid, master_seed=1, workers=1)
        parallel = run_trials(m, 300, 4, grid, master_seed=1, workers=3)
        single = run_trials(m, 300, 1, grid, master_seed=1)
        for a, b in zip(serial, parallel):
            assert a.bounds.tobytes() == b.bounds.tobytes()
        assert single[0].bounds.tobytes() == serial[0].bounds.tobytes()

    def test_workers_env(self, monkeypatch):
        from welfare_pareto.simulation import default_workers
        monkeypatch.setenv(WORKERS_ENV, "3")
        assert default_workers() == 3
        monkeypatch.setenv(WORKERS_ENV, "junk")
        assert default_workers() == 1

    def test_zero_noise_trial_curves_coincide(self):
        r = run_trials(GaussianModel(), 200, 1, np.linspace(0, 1, 11))[0]
        assert np.array_equal(r.exact_curve.profit, r.empirical_curve.profit)
        assert r.bound_violations() == 0

    def test_rejects_zero_trials(self):
        with pytest.raises(ValueError):
            run_trials(GaussianModel(), 10, 0)

    def test_mean_and_se(self):
        m, se = mean_and_se([[1.0, 2.0], [3.0, 2.0]])
        assert m.tolist() == [2.0, 2.0]
        assert se.tolist() == pytest.approx([1.0, 0.0])
