import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from strategies import TOY, cohorts, scores
from welfare_pareto import (Cohort, UtilityPoint, alpha_utility, evaluate_utilities,
                            pareto_dominates)


class TestCohort:
    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            Cohort([1.0, np.nan], [0.0, 0.0])

    def test_rejects_length_mismatch(self):
        with pytest.raises(ValueError):
            Cohort([1.0, 2.0], [0.0])

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            Cohort([], [])

    def test_predictions_come_in_pairs(self):
        with pytest.raises(ValueError):
            Cohort([1.0], [1.0], profit_hat=[1.0])

    def test_group_labels(self):
        c = Cohort([1, 2], [0, 0], group=["A", "B"])
        assert list(c.group) == ["A", "B"]
        with pytest.raises(ValueError):
            Cohort([1, 2], [0, 0], group=["A", "C"])

    def test_arrays_read_only(self):
        with pytest.raises(ValueError):
            TOY.profit[0] = 5.0

    def test_scores_without_predictions(self):
        with pytest.raises(ValueError):
            TOY.scores(use_predicted=True)

    def test_pairs_round_trip(self):
        assert TOY.true_scores() == [(1, -1), (-1, 2), (1, 1)]


class TestEvaluateUtilities:
    def test_empty_selection(self):
        assert evaluate_utilities(TOY, [0, 0, 0]) == (0.0, 0.0)

    def test_select_all(self):
        u = evaluate_utilities(TOY, [1, 1, 1])
        assert u == pytest.approx((1 / 3, 2 / 3), abs=1e-15)

    def test_select_outer(self):
        u = evaluate_utilities(TOY, [1, 0, 1])
        assert u == pytest.approx((2 / 3, 0.0), abs=1e-15)

    def test_predicted_scores(self):
        c = TOY.with_predictions([1, 1, 1], [0, 0, 3])
        assert evaluate_utilities(c, [1, 1, 1], use_predicted=True) == pytest.approx((1.0, 1.0))

    @pytest.mark.parametrize("bad", [[1, 1], [1, 1, 2], [0, -0.5, 1]])
    def test_bad_decisions(self, bad):
        with pytest.raises(ValueError):
            evaluate_utilities(TOY, bad)

    @given(cohorts(), st.floats(0, 1), st.data())
    def test_linear_in_decisions(self, c, lam, data):
        d1 = np.array(data.draw(st.lists(st.floats(0, 1), min_size=c.n, max_size=c.n)))
        d2 = np.array(data.draw(st.lists(st.floats(0, 1), min_size=c.n, max_size=c.n)))
        mixed = evaluate_utilities(c, np.clip(lam * d1 + (1 - lam) * d2, 0, 1))
        u1, u2 = evaluate_utilities(c, d1), evaluate_utilities(c, d2)
        for k in range(2):
            assert mixed[k] == pytest.approx(lam * u1[k] + (1 - lam) * u2[k], abs=1e-12)

    @given(cohorts(), st.data())
    def test_permutation_invariant(self, c, data):
        d = np.array(data.draw(st.lists(st.integers(0, 1), min_size=c.n, max_size=c.n)))
        perm = np.array(data.draw(st.permutations(range(c.n))))
        shuffled = Cohort(c.profit[perm], c.welfare[perm])
        a, b = evaluate_utilities(c, d), evaluate_utilities(shuffled, d[perm])
        assert a == pytest.approx(b, abs=1e-12)


class TestAlphaUtility:
    @pytest.mark.parametrize("alpha, expected", [(0, 1 / 3), (1, 2 / 3), (0.5, 0.5)])
    def test_examples(self, alpha, expected):
        assert alpha_utility(UtilityPoint(1 / 3, 2 / 3), alpha) == pytest.approx(expected)

    @pytest.mark.parametrize("alpha", [-0.1, 1.5])
    def test_rejects_out_of_range(self, alpha):
        with pytest.raises(ValueError):
            alpha_utility(UtilityPoint(0, 0), alpha)


class TestParetoDominates:
    def test_examples(self):
        assert pareto_dominates((1, 1), (0, 0))
        assert not pareto_dominates((1, 0), (0, 1))
        assert not pareto_dominates((1, 1), (1, 1))

    @given(st.tuples(scores, scores), st.tuples(st.floats(0, 3), st.floats(0, 3)))
    def test_dominance_orders_alpha_utility(self, a, delta):
        b = (a[0] - delta[0], a[1] - delta[1])
        assume(pareto_dominates(a, b))
        grid = np.linspace(0, 1, 21)
        ua = np.array([alpha_utility(a, x) for x in grid])
        ub = np.array([alpha_utility(b, x) for x in grid])
        assert np.all(ua >= ub)
        assert np.any(ua > ub)
