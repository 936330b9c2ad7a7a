"""Pareto curves: alpha sweeps, concave envelopes and frontier diagnostics."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .core import Cohort, UtilityPoint, alpha_utility, evaluate_utilities
from .policies import ScoreSource, ThresholdPolicy, apply_policy, composite

BRUTE_FORCE_MAX_N = 20


def default_alpha_grid(num: int = 101) -> np.ndarray:
    return np.linspace(0.0, 1.0, num)


def check_alpha_grid(alpha_grid) -> np.ndarray:
    grid = np.asarray(alpha_grid, dtype=float).reshape(-1)
    if grid.size == 0:
        raise ValueError("alpha grid is empty")
    if np.any(grid < 0) or np.any(grid > 1) or not np.all(np.isfinite(grid)):
        raise ValueError("alpha grid values must lie in [0, 1]")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("alpha grid must be strictly increasing")
    return grid


@dataclass(frozen=True, eq=False)
class ParetoCurve:
    """Utility points indexed by the trade-off weight alpha.

    ``source`` names the scores the policies threshold; ``eval_with`` names
    the scores the utilities were computed with. ``cohort_key`` identifies
    the cohort a swept curve came from (``None`` for hand-built curves).
    """

    alphas: np.ndarray
    profit: np.ndarray
    welfare: np.ndarray
    source: ScoreSource = ScoreSource.TRUE
    eval_with: ScoreSource = ScoreSource.TRUE
    cohort_key: Optional[int] = None

    def __post_init__(self):
        alphas = check_alpha_grid(self.alphas)
        p = np.asarray(self.profit, dtype=float).reshape(-1)
        w = np.asarray(self.welfare, dtype=float).reshape(-1)
        if not (alphas.size == p.size == w.size):
            raise ValueError("alphas, profit and welfare must have equal length")
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "profit", p)
        object.__setattr__(self, "welfare", w)
        object.__setattr__(self, "source", ScoreSource(self.source))
        object.__setattr__(self, "eval_with", ScoreSource(self.eval_with))

    @classmethod
    def from_points(cls, points: Sequence, **kw) -> "ParetoCurve":
        """Build a curve from ``(profit, welfare)`` pairs on a uniform alpha grid."""
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        return cls(default_alpha_grid(len(pts)), pts[:, 0], pts[:, 1], **kw)

    def __len__(self) -> int:
        return self.alphas.size

    @property
    def points(self) -> list[tuple[float, UtilityPoint]]:
        return [(float(a), UtilityPoint(float(p), float(w)))
                for a, p, w in zip(self.alphas, self.profit, self.welfare)]

    def alpha_utilities(self) -> np.ndarray:
        return np.array([alpha_utility(u, a) for a, u in self.points])

    def is_self_evaluated(self) -> bool:
        return self.source.value == self.eval_with.value


def sweep_frontier(cohort: Cohort, source=ScoreSource.TRUE, alpha_grid=None,
                   eval_with=ScoreSource.TRUE, model=None) -> ParetoCurve:
    """Apply the alpha-threshold policy for every alpha and record its utilities.

    Parameters
    ----------
    cohort : Cohort
    source : ScoreSource
        Scores the policy thresholds: true, predicted (plug-in) or the
        Gaussian posterior means (needs ``model``).
    alpha_grid : array_like, optional
        Strictly increasing weights in [0, 1]; 101 uniform points by default.
    eval_with : ScoreSource
        ``TRUE`` or ``PREDICTED``: which scores the utilities are computed on.
    """
    grid = default_alpha_grid() if alpha_grid is None else check_alpha_grid(alpha_grid)
    eval_with = ScoreSource(eval_with)
    if eval_with is ScoreSource.POSTERIOR:
        raise ValueError("utilities are evaluated with true or predicted scores")
    use_predicted = eval_with is ScoreSource.PREDICTED
    pts = np.empty((grid.size, 2))
    for k, a in enumerate(grid):
        d = apply_policy(ThresholdPolicy(a, source, model), cohort)
        pts[k] = evaluate_utilities(cohort, d, use_predicted=use_predicted)
    return ParetoCurve(grid, pts[:, 0], pts[:, 1], source, eval_with, cohort.fingerprint())


def _curve_xy(curve) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(curve, ParetoCurve):
        return curve.profit, curve.welfare
    pts = np.asarray(curve, dtype=float).reshape(-1, 2)
    return pts[:, 0], pts[:, 1]


def upper_concave_envelope(curve) -> np.ndarray:
    """Vertices of the upper concave envelope, sorted by profit.

    Accepts a :class:`ParetoCurve` or an ``(m, 2)`` array of
    ``(profit, welfare)`` points. Collinear interior points are dropped.
    """
    x, y = _curve_xy(curve)
    if x.size == 0:
        raise ValueError("cannot take the envelope of an empty curve")
    order = np.lexsort((-y, x))
    x, y = x[order], y[order]
    keep = np.ones(x.size, dtype=bool)
    keep[1:] = x[1:] != x[:-1]  # highest welfare per profit value
    x, y = x[keep], y[keep]

    hull: list[int] = []
    for i in range(x.size):
        while len(hull) >= 2:
            o, a = hull[-2], hull[-1]
            cross = (x[a] - x[o]) * (y[i] - y[o]) - (y[a] - y[o]) * (x[i] - x[o])
            if cross >= 0:
                hull.pop()
            else:
                break
        hull.append(i)
    return np.column_stack([x[hull], y[hull]])


def envelope_value(vertices: np.ndarray, p) -> np.ndarray:
    """Piecewise-linear interpolation of envelope vertices (NaN outside their range)."""
    v = np.asarray(vertices, dtype=float)
    p = np.asarray(p, dtype=float)
    out = np.interp(p, v[:, 0], v[:, 1])
    return np.where((p < v[0, 0]) | (p > v[-1, 0]), np.nan, out)


@dataclass(frozen=True)
class FrontierDiagnostics:
    p_min: float
    p_max: float
    w_max: float
    concavity_violation: float
    dominance_gaps: np.ndarray = field(default_factory=lambda: np.empty(0))
    tol: float = 0.0

    @property
    def concave(self) -> bool:
        return self.concavity_violation <= self.tol

    @property
    def infeasible(self) -> np.ndarray:
        """Mask of dominance gaps whose empirical profit exceeds the exact maximum."""
        return np.isneginf(self.dominance_gaps)


def _frontier_extent(vertices: np.ndarray) -> tuple[float, float, float, int]:
    w_max = float(vertices[:, 1].max())
    top = int(np.flatnonzero(vertices[:, 1] == w_max)[-1])
    return float(vertices[top, 0]), float(vertices[:, 0].max()), w_max, top


def check_concavity(curve: ParetoCurve, tol: float = 0.0) -> FrontierDiagnostics:
    """Measure how far the curve departs from concavity.

    The violation is the largest vertical distance by which a curve point
    falls below the upper concave envelope of all points; it is zero exactly
    when every point lies on a concave welfare-vs-profit function.
    """
    if len(curve) < 3:
        raise ValueError("concavity check needs at least 3 points")
    x, y = _curve_xy(curve)
    hull = upper_concave_envelope(curve)
    dip = np.interp(x, hull[:, 0], hull[:, 1]) - y
    p_min, p_max, w_max, _ = _frontier_extent(hull)
    return FrontierDiagnostics(p_min, p_max, w_max, float(max(dip.max(), 0.0)), tol=tol)


def exact_frontier_function(exact: ParetoCurve):
    """The welfare-vs-profit frontier function built from an exact curve.

    Returns ``g`` such that ``g(p)`` interpolates the envelope on
    ``[p_min, p_max]``, equals ``w_max`` to the left and ``-inf`` to the right.
    """
    hull = upper_concave_envelope(exact)
    p_min, p_max, w_max, top = _frontier_extent(hull)
    right = hull[top:]

    def g(p):
        p = np.asarray(p, dtype=float)
        inside = np.interp(p, right[:, 0], right[:, 1])
        return np.where(p < p_min, w_max, np.where(p > p_max, -np.inf, inside))

    return g


def dominance_gap(exact: ParetoCurve, empirical: ParetoCurve) -> np.ndarray:
    """Vertical gap between the exact frontier and each empirical point.

    Non-negative entries mean the empirical point is dominated. Points with
    profit beyond the exact maximum are infeasible for the exact frontier and
    get ``-inf``.
    """
    if exact.cohort_key is not None and empirical.cohort_key is not None \
            and exact.cohort_key != empirical.cohort_key:
        raise ValueError("curves were built on different cohorts")
    if exact.eval_with is not ScoreSource.TRUE or exact.source is not ScoreSource.TRUE:
        raise ValueError("the exact curve must threshold and evaluate true scores")
    g = exact_frontier_function(exact)
    return g(empirical.profit) - empirical.welfare


def dominated_area(curve: ParetoCurve, reference) -> float:
    """Area of utility space dominated by the curve's points and above ``reference``.

    ``reference`` is a ``(profit, welfare)`` corner; points not strictly above
    it in both utilities contribute nothing. Unlike a per-alpha gap, the area
    also rewards how far along the trade-off a set of policies reaches.
    """
    rp, rw = (float(v) for v in reference)
    p, w = _curve_xy(curve)
    order = np.lexsort((-w, -p))
    area, best = 0.0, rw
    for pi, wi in zip(p[order], w[order]):
        if pi > rp and wi > best:
            area += (pi - rp) * (wi - best)
            best = wi
    return area


def diagnose(exact: ParetoCurve, empirical: Optional[ParetoCurve] = None,
             tol: float = 0.0) -> FrontierDiagnostics:
    diag = check_concavity(exact, tol)
    if empirical is None:
        return diag
    return FrontierDiagnostics(diag.p_min, diag.p_max, diag.w_max, diag.concavity_violation,
                               dominance_gap(exact, empirical), tol)


def _subset_bits(n: int, idx: np.ndarray) -> np.ndarray:
    # bit j (most significant first) of a subset index selects individual j
    return ((idx[:, None] >> np.arange(n - 1, -1, -1)) & 1).astype(np.int8)


def _exact_best(c: np.ndarray, bits: np.ndarray, cand: np.ndarray) -> int:
    # exact rational subset sums; ties to the larger set, then the larger index
    cf = [Fraction(float(x)) for x in c]
    keyed = [(sum((cf[j] for j in np.flatnonzero(bits[k])), Fraction(0)),
              int(bits[k].sum()), int(i)) for k, i in enumerate(cand)]
    return max(keyed)[2]


def brute_force_frontier(cohort: Cohort, alpha_grid=None, chunk: int = 1 << 15) -> ParetoCurve:
    """Best deterministic selection for each alpha by enumerating all subsets.

    Subset values are screened in floating point, and the near-optimal ones
    are then compared in exact rational arithmetic. Ties go to the larger
    selected set, then to the lexicographically greatest decision vector.
    Intended as a test oracle.
    """
    n = cohort.n
    if n > BRUTE_FORCE_MAX_N:
        raise ValueError(
            f"brute force over 2^{n} subsets refused; use at most {BRUTE_FORCE_MAX_N} "
            "individuals or sweep_frontier for larger cohorts"
        )
    grid = default_alpha_grid() if alpha_grid is None else check_alpha_grid(alpha_grid)
    index = np.arange(1 << n, dtype=np.int64)
    pts = np.empty((grid.size, 2))
    for k, a in enumerate(grid):
        c = composite(a, cohort.profit, cohort.welfare)
        vals = np.concatenate([_subset_bits(n, index[s:s + chunk]) @ c
                               for s in range(0, index.size, chunk)])
        tol = 1e-9 * (np.abs(c).sum() + 1.0)
        cand = np.flatnonzero(vals >= vals.max() - tol)
        best = _exact_best(c, _subset_bits(n, index[cand]), cand)
        pts[k] = evaluate_utilities(cohort, _subset_bits(n, index[best:best + 1])[0])
    return ParetoCurve(grid, pts[:, 0], pts[:, 1], ScoreSource.TRUE, ScoreSource.TRUE,
                       cohort.fingerprint())
