import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import best_subset_utility, union_of_boxes_area
from strategies import TOY, cohorts
from welfare_pareto import (Cohort, GaussianModel, ParetoCurve, ScoreSource, add_prediction_noise,
                            brute_force_frontier, check_concavity, diagnose, dominance_gap,
                            dominated_area, sample_cohort, sweep_frontier, upper_concave_envelope)
from welfare_pareto.frontier import envelope_value, exact_frontier_function

GRID21 = np.linspace(0, 1, 21)


class TestSweepFrontier:
    def test_toy_cohort(self):
        curve = sweep_frontier(TOY, alpha_grid=[0, 0.5, 1])
        expected = [(2 / 3, 0.0), (1 / 3, 2 / 3), (0.0, 1.0)]
        for (a, u), e in zip(curve.points, expected):
            assert u == pytest.approx(e, abs=1e-15)

    def test_single_individual(self):
        curve = sweep_frontier(Cohort([1.0], [1.0]))
        assert np.all(curve.profit == 1.0) and np.all(curve.welfare == 1.0)

    def test_single_alpha_is_max_util(self):
        curve = sweep_frontier(TOY, alpha_grid=[0.0])
        assert len(curve) == 1
        assert curve.profit[0] == pytest.approx(2 / 3)

    @pytest.mark.parametrize("grid", [[], [0.5, 0.2], [0, 1.2]])
    def test_bad_grid(self, grid):
        with pytest.raises(ValueError):
            sweep_frontier(TOY, alpha_grid=grid)

    def test_posterior_eval_rejected(self):
        with pytest.raises(ValueError):
            sweep_frontier(TOY, eval_with=ScoreSource.POSTERIOR)

    @given(cohorts())
    def test_self_evaluated_monotone(self, c):
        curve = sweep_frontier(c, alpha_grid=GRID21)
        assert np.all(np.diff(curve.profit) <= 0)
        assert np.all(np.diff(curve.welfare) >= 0)

    def test_realized_plugin_may_be_non_monotone(self):
        # large welfare noise: realized welfare can fall as alpha grows
        m = GaussianModel(rho=0.5, sigma_eps_w=2.0, sigma_eps_p=0.5)
        c = add_prediction_noise(sample_cohort(m, 400, seed=3), m, seed=4)
        curve = sweep_frontier(c, ScoreSource.PREDICTED, eval_with=ScoreSource.TRUE)
        assert not curve.is_self_evaluated()


class TestBruteForce:
    def test_toy_half(self):
        curve = brute_force_frontier(TOY, alpha_grid=[0.5])
        assert curve.alpha_utilities()[0] == pytest.approx(0.5)
        # ties with selecting only the last two; the larger set wins
        assert curve.points[0][1] == pytest.approx((1 / 3, 2 / 3))

    def test_always_negative(self):
        curve = brute_force_frontier(Cohort([-1.0], [-1.0]))
        assert np.all(curve.profit == 0) and np.all(curve.welfare == 0)

    def test_refuses_large_n(self):
        with pytest.raises(ValueError, match="at most"):
            brute_force_frontier(Cohort(np.zeros(21), np.zeros(21)))

    @given(cohorts(max_n=12))
    def test_equals_sweep_exactly(self, c):
        bf = brute_force_frontier(c, GRID21).alpha_utilities()
        sw = sweep_frontier(c, alpha_grid=GRID21).alpha_utilities()
        assert np.array_equal(bf, sw)

    @given(cohorts(max_n=7))
    def test_matches_itertools_oracle(self, c):
        bf = brute_force_frontier(c, GRID21[::5]).alpha_utilities()
        want = [best_subset_utility(c.profit, c.welfare, a) for a in GRID21[::5]]
        assert bf == pytest.approx(want, abs=1e-12)


class TestEnvelope:
    def test_two_points(self):
        env = upper_concave_envelope(np.array([[0, 1], [1, 0]]))
        assert env.tolist() == [[0, 1], [1, 0]]

    def test_drops_point_below_chord(self):
        env = upper_concave_envelope(np.array([[0, 1], [0.5, 0.4], [1, 0]]))
        assert env.tolist() == [[0, 1], [1, 0]]

    def test_collinear_function_unchanged(self):
        pts = np.array([[0, 1], [0.5, 0.5], [1, 0]])
        env = upper_concave_envelope(pts)
        xs = np.linspace(0, 1, 11)
        assert envelope_value(env, xs) == pytest.approx(1 - xs)

    def test_empty(self):
        with pytest.raises(ValueError):
            upper_concave_envelope(np.empty((0, 2)))

    def test_outside_range_is_nan(self):
        env = upper_concave_envelope(np.array([[0, 1], [1, 0]]))
        assert np.isnan(envelope_value(env, [-0.1, 1.1])).all()

    @given(st.lists(st.tuples(st.floats(-10, 10), st.floats(-10, 10)), min_size=1, max_size=40))
    def test_concave_and_above_points(self, pts):
        pts = np.array(pts)
        env = upper_concave_envelope(pts)
        assert np.all(np.diff(env[:, 0]) > 0)
        if len(env) >= 3:
            slopes = np.diff(env[:, 1]) / np.diff(env[:, 0])
            assert np.all(np.diff(slopes) <= 1e-9 * (1 + np.abs(slopes[1:])))
        v = envelope_value(env, pts[:, 0])
        assert np.all(v >= pts[:, 1] - 1e-9)


class TestConcavity:
    def test_convex_curve_flagged(self):
        t = np.linspace(0, 1, 11)
        curve = ParetoCurve(t, t, t ** 2 - 2 * t + 1)  # bowed in toward the origin
        diag = check_concavity(curve)
        assert diag.concavity_violation > 0 and not diag.concave

    def test_collinear_padding(self):
        curve = ParetoCurve.from_points([(1, 0), (0.5, 0.5), (0, 1)])
        assert check_concavity(curve).concavity_violation == 0

    def test_needs_three_points(self):
        with pytest.raises(ValueError):
            check_concavity(ParetoCurve.from_points([(1, 0), (0, 1)]))

    def test_gaussian_exact_frontier_concave(self):
        # tolerance: 10x a Monte Carlo SE of utilities at n = 5000
        c = sample_cohort(GaussianModel(), 5000, seed=11)
        curve = sweep_frontier(c)
        tol = 10 * np.std(c.profit) / np.sqrt(c.n)
        assert check_concavity(curve, tol).concave


class TestDominanceGap:
    def test_self_gap_zero(self):
        c = sample_cohort(GaussianModel(rho=0.3), 500, seed=1)
        curve = sweep_frontier(c)
        assert np.all(dominance_gap(curve, curve) == 0)

    def test_heavy_noise_dominated(self):
        m = GaussianModel(sigma_eps_w=2.0, sigma_eps_p=2.0)
        c = add_prediction_noise(sample_cohort(m, 5000, seed=5), m, seed=6)
        exact = sweep_frontier(c)
        plug = sweep_frontier(c, ScoreSource.PREDICTED, eval_with=ScoreSource.TRUE)
        tol = 3 * np.std(c.profit) / np.sqrt(c.n)
        assert np.all(dominance_gap(exact, plug) >= -tol)

    def test_infeasible_flagged(self):
        exact = ParetoCurve.from_points([(1, 0), (0.5, 0.8), (0, 1)])
        emp = ParetoCurve.from_points([(1.5, 0), (0.5, 0.2), (0, 0.5)])
        d = diagnose(exact, emp)
        assert d.infeasible.tolist() == [True, False, False]
        assert d.dominance_gaps[1] == pytest.approx(0.6)

    def test_left_of_frontier_uses_max_welfare(self):
        exact = ParetoCurve.from_points([(1, 0), (0.5, 0.8), (0.2, 1)])
        g = exact_frontier_function(exact)
        assert g(0.0) == 1.0 and g(0.2) == 1.0

    def test_cohort_mismatch(self):
        a = sweep_frontier(sample_cohort(GaussianModel(), 50, seed=1))
        b = sweep_frontier(sample_cohort(GaussianModel(), 50, seed=2))
        with pytest.raises(ValueError, match="different cohorts"):
            dominance_gap(a, b)

    def test_exact_must_be_true_scores(self):
        c = add_prediction_noise(sample_cohort(GaussianModel(), 50, seed=1),
                                 GaussianModel(sigma_eps_p=1.0), seed=2)
        plug = sweep_frontier(c, ScoreSource.PREDICTED)
        with pytest.raises(ValueError, match="exact curve"):
            dominance_gap(plug, plug)


class TestDominatedArea:
    def test_single_point(self):
        assert dominated_area(ParetoCurve.from_points([(2, 3)]), (0, 0)) == 6.0

    def test_staircase(self):
        curve = ParetoCurve.from_points([(2, 1), (1, 2)])
        assert dominated_area(curve, (0, 0)) == 3.0

    def test_points_below_reference_ignored(self):
        assert dominated_area(ParetoCurve.from_points([(-1, 5), (1, -1)]), (0, 0)) == 0.0

    @given(st.lists(st.tuples(st.floats(-5, 5), st.floats(-5, 5)), min_size=1, max_size=12),
           st.tuples(st.floats(-5, 0), st.floats(-5, 0)))
    def test_matches_box_union(self, pts, ref):
        got = dominated_area(ParetoCurve.from_points(pts), ref)
        assert got == pytest.approx(union_of_boxes_area(pts, ref), rel=1e-9, abs=1e-9)

    def test_exact_frontier_dominates_plugin(self):
        m = GaussianModel(sigma_eps_w=1.0, sigma_eps_p=1.0)
        c = add_prediction_noise(sample_cohort(m, 3000, seed=8), m, seed=9)
        exact = sweep_frontier(c)
        plug = sweep_frontier(c, ScoreSource.PREDICTED, eval_with=ScoreSource.TRUE)
        ref = (exact.profit.min(), exact.welfare.min())
        assert dominated_area(plug, ref) < dominated_area(exact, ref)
