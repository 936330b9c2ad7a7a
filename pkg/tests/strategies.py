"""Shared hypothesis strategies and small fixtures."""

from hypothesis import strategies as st

from welfare_pareto import Cohort

TOY = Cohort.from_pairs([(1, -1), (-1, 2), (1, 1)])

scores = st.floats(-5, 5, allow_nan=False)


@st.composite
def cohorts(draw, min_n=1, max_n=12):
    n = draw(st.integers(min_n, max_n))
    p = draw(st.lists(scores, min_size=n, max_size=n))
    w = draw(st.lists(scores, min_size=n, max_size=n))
    return Cohort(p, w)
