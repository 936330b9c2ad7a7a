"""Demographic-parity-constrained profit maximization for two groups and the
induced welfare scores that turn each fair policy into an alpha-Pareto policy.

Group A is the disadvantaged group: its unconstrained selection rate
``rate(A, 0)`` is at most that of group B. Fair policies then lower A's
threshold below zero and raise B's above zero.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import isotonic_regression

from .core import GROUPS

DEFAULT_RATE_RESOLUTION = 1001
U_PLUS, U_MINUS = 1.0, -4.0
_SNAP = 1e-12


def repayment_profit_score(repay_prob, u_plus: float = U_PLUS, u_minus: float = U_MINUS):
    """Expected lending gain ``u_plus * repay_prob + u_minus * (1 - repay_prob)``."""
    r = np.asarray(repay_prob, dtype=float)
    if np.any((r < 0) | (r > 1)) or not np.all(np.isfinite(r)):
        raise ValueError("repay_prob must lie in [0, 1]")
    out = u_plus * r + u_minus * (1.0 - r)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class GroupSample:
    """Empirical profit-score distribution of one group.

    Parameters
    ----------
    group_id : {"A", "B"}
    profits : array_like
        Profit scores; stored as distinct values sorted ascending.
    mass : float
        Population share of the group, in (0, 1].
    counts : array_like, optional
        Non-negative multiplicity of each profit value (default 1 each);
        repeated values are merged with their counts summed.
    """

    group_id: str
    profits: np.ndarray
    mass: float = 0.5
    counts: Optional[np.ndarray] = None
    _rates: np.ndarray = field(init=False, repr=False)
    _cumprofit: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.group_id not in GROUPS:
            raise ValueError(f"group_id must be one of {GROUPS}, got {self.group_id!r}")
        p = np.asarray(self.profits, dtype=float).reshape(-1)
        if p.size == 0:
            raise ValueError(f"group {self.group_id} is empty")
        if not np.all(np.isfinite(p)):
            raise ValueError(f"group {self.group_id} has non-finite profits")
        c = np.ones(p.size) if self.counts is None else np.asarray(self.counts, dtype=float).reshape(-1)
        if c.size != p.size or np.any(c < 0) or not np.all(np.isfinite(c)) or c.sum() <= 0:
            raise ValueError(f"group {self.group_id}: counts must be non-negative, "
                             "one per profit, with a positive total")
        if not 0 < self.mass <= 1:
            raise ValueError(f"group {self.group_id}: mass must lie in (0, 1]")
        # equal profits form one atom
        p, inv = np.unique(p, return_inverse=True)
        c = np.bincount(inv.reshape(-1), weights=c, minlength=p.size)
        for a in (p, c):
            a.setflags(write=False)
        object.__setattr__(self, "profits", p)
        object.__setattr__(self, "counts", c)
        object.__setattr__(self, "mass", float(self.mass))
        # descending-order cumulative rates and profit sums
        total = c.sum()
        cd = c[::-1]
        rates = np.concatenate([[0.0], np.cumsum(cd) / total])
        rates[-1] = 1.0
        object.__setattr__(self, "_rates", rates)
        object.__setattr__(self, "_cumprofit",
                           np.concatenate([[0.0], np.cumsum(cd * p[::-1]) / total]))

    @property
    def size(self) -> float:
        return float(self.counts.sum())

    def atom_fraction(self) -> np.ndarray:
        """Share of the group at each (ascending) profit value."""
        return self.counts / self.counts.sum()


def make_groups(profits_a, profits_b, counts_a=None, counts_b=None) -> tuple[GroupSample, GroupSample]:
    """Two groups with masses proportional to their sizes."""
    na = float(np.sum(counts_a)) if counts_a is not None else float(np.size(profits_a))
    nb = float(np.sum(counts_b)) if counts_b is not None else float(np.size(profits_b))
    if na <= 0 or nb <= 0:
        raise ValueError("both groups must be non-empty")
    return (GroupSample("A", profits_a, na / (na + nb), counts_a),
            GroupSample("B", profits_b, nb / (na + nb), counts_b))


def rate(group: GroupSample, t) -> float:
    """Fraction of the group with profit at least ``t``."""
    below = np.searchsorted(group.profits, t, side="left")
    return float(group.counts[below:].sum() / group.counts.sum())


def _check_beta(beta) -> float:
    b = float(beta)
    if not 0.0 <= b <= 1.0:
        raise ValueError(f"selection rate must lie in [0, 1], got {beta!r}")
    return b


def _snap(group: GroupSample, beta: float) -> float:
    # rates within rounding of an atom boundary are treated as that boundary
    k = int(np.argmin(np.abs(group._rates - beta)))
    return float(group._rates[k]) if abs(group._rates[k] - beta) <= _SNAP else beta


def rate_inverse(group: GroupSample, beta) -> tuple[float, float]:
    """Threshold ``t`` and boundary probability hitting selection rate ``beta``.

    Members with profit above ``t`` are selected, members exactly at ``t``
    are selected with ``boundary_prob``. When ``beta`` falls between two
    atoms any threshold in the gap works; the one closest to zero is used,
    which keeps disadvantaged-group thresholds non-positive and
    advantaged-group thresholds non-negative.
    """
    b = _snap(group, _check_beta(beta))
    desc = group.profits[::-1]
    R = group._rates
    if b == 0.0:
        top = float(desc[0])
        return (math.nextafter(top, math.inf), 0.0) if top >= 0 else (0.0, 0.0)
    k = int(np.searchsorted(R, b, side="left")) - 1  # R[k] < b <= R[k+1]
    if b == R[k + 1] and k + 1 < desc.size and desc[k + 1] < 0 <= desc[k]:
        return 0.0, 1.0
    q = R[k + 1] - R[k]
    return float(desc[k]), float(min(1.0, (b - R[k]) / q))


def selection_rate(group: GroupSample, t: float, boundary_prob: float = 1.0) -> float:
    """Expected rate of the randomized threshold policy ``(t, boundary_prob)``."""
    p, c = group.profits, group.counts
    return float((c[p > t].sum() + boundary_prob * c[p == t].sum()) / c.sum())


def group_objective(group: GroupSample, beta) -> float:
    """Mass-weighted profit collected by selecting the top ``beta`` share of the group."""
    b = _check_beta(beta)
    R, S = group._rates, group._cumprofit
    desc = group.profits[::-1]
    k = min(int(np.searchsorted(R, b, side="right")) - 1, desc.size - 1)
    return group.mass * float(S[k] + (b - R[k]) * desc[k])


def group_objective_curve(group: GroupSample, betas) -> np.ndarray:
    """Vectorized :func:`group_objective`."""
    b = np.asarray(betas, dtype=float)
    if np.any((b < 0) | (b > 1)):
        raise ValueError("selection rates must lie in [0, 1]")
    R, S = group._rates, group._cumprofit
    desc = group.profits[::-1]
    k = np.minimum(np.searchsorted(R, b, side="right") - 1, desc.size - 1)
    return group.mass * (S[k] + (b - R[k]) * desc[k])


def rate_grid(rate_resolution: int) -> np.ndarray:
    if rate_resolution < 2:
        raise ValueError("rate_resolution must be at least 2")
    return np.arange(rate_resolution) / (rate_resolution - 1)


@dataclass(frozen=True)
class GroupThresholdPolicy:
    t_A: float
    t_B: float
    boundary_prob_A: float = 1.0
    boundary_prob_B: float = 1.0

    def __post_init__(self):
        for name in ("boundary_prob_A", "boundary_prob_B"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")

    def decide(self, group_id: str, profits) -> np.ndarray:
        """Deterministic part of the policy: ``I(p >= t_j)``."""
        t = self.t_A if group_id == "A" else self.t_B
        return (np.asarray(profits, dtype=float) >= t).astype(int)


@dataclass(frozen=True)
class FairnessSolution:
    """Profit-maximizing policy subject to ``|beta_A - beta_B| <= epsilon``.

    ``roles`` gives the original labels of the groups playing the
    disadvantaged (A) and advantaged (B) parts; it is ``("A", "B")`` unless
    the solver had to swap them.
    """

    epsilon: float
    policy: GroupThresholdPolicy
    beta_A: float
    beta_B: float
    profit_utility: float
    max_util_rates: tuple[float, float] = (0.0, 0.0)
    roles: tuple[str, str] = ("A", "B")

    @property
    def t_A(self) -> float:
        return self.policy.t_A

    @property
    def t_B(self) -> float:
        return self.policy.t_B

    @property
    def is_max_util(self) -> bool:
        return self.policy.t_A == 0.0 and self.policy.t_B == 0.0 \
            and (self.beta_A, self.beta_B) == self.max_util_rates


def _relabel(group: GroupSample, gid: str) -> GroupSample:
    return GroupSample(gid, group.profits, group.mass, group.counts)


def _ordered(group_a: GroupSample, group_b: GroupSample):
    if abs(group_a.mass + group_b.mass - 1.0) > 1e-9:
        raise ValueError(f"group masses must sum to 1, got {group_a.mass + group_b.mass!r}")
    if rate(group_a, 0.0) > rate(group_b, 0.0):
        warnings.warn(f"group {group_a.group_id} has the higher unconstrained selection rate; "
                      "swapping roles so the disadvantaged group is A", stacklevel=3)
        return _relabel(group_b, "A"), _relabel(group_a, "B"), (group_b.group_id, group_a.group_id)
    return group_a, group_b, (group_a.group_id, group_b.group_id)


def solve_dp_constrained(group_a: GroupSample, group_b: GroupSample, epsilon: float,
                         rate_resolution: int = DEFAULT_RATE_RESOLUTION) -> FairnessSolution:
    """Maximize total profit subject to selection rates within ``epsilon``.

    When the unconstrained rates already satisfy the constraint the
    unconstrained policy (both thresholds 0) is returned. Otherwise the
    constraint binds and the search reduces to one variable:
    ``max f_A(beta) + f_B(beta + epsilon)`` over ``beta`` between A's
    unconstrained rate and B's unconstrained rate minus ``epsilon``, scanned
    on a uniform rate grid plus both endpoints. Ties go to the larger beta.
    """
    if not (math.isfinite(epsilon) and epsilon >= 0):
        raise ValueError(f"epsilon must be a finite non-negative number, got {epsilon!r}")
    ga, gb, roles = _ordered(group_a, group_b)
    lo, top = rate(ga, 0.0), rate(gb, 0.0)
    if top - lo <= epsilon:
        profit = group_objective(ga, lo) + group_objective(gb, top)
        return FairnessSolution(float(epsilon), GroupThresholdPolicy(0.0, 0.0), lo, top, profit,
                                (lo, top), roles)
    hi = top - epsilon
    grid = rate_grid(rate_resolution)
    cand = np.concatenate([[lo], grid[(grid > lo) & (grid < hi)], [hi]])
    total = group_objective_curve(ga, cand) + group_objective_curve(gb, np.minimum(cand + epsilon, top))
    best = total.max()
    i = int(np.flatnonzero(total >= best - 1e-13 * (abs(best) + 1))[-1])
    beta_a = float(cand[i])
    beta_b = float(min(beta_a + epsilon, top))
    t_a, b_a = rate_inverse(ga, beta_a)
    t_b, b_b = rate_inverse(gb, beta_b)
    return FairnessSolution(float(epsilon), GroupThresholdPolicy(t_a, t_b, b_a, b_b),
                            beta_a, beta_b, float(total[i]), (lo, top), roles)


@dataclass(frozen=True, eq=False)
class FairnessSweep:
    """Solutions over an epsilon grid plus isotonically projected thresholds.

    The solutions keep the solver's raw thresholds; ``t_A`` (non-decreasing)
    and ``t_B`` (non-increasing) are their least-squares monotone
    projections along the grid.
    """

    solutions: tuple[FairnessSolution, ...]
    epsilons: np.ndarray
    t_A: np.ndarray
    t_B: np.ndarray

    def __len__(self) -> int:
        return len(self.solutions)

    def __getitem__(self, i) -> FairnessSolution:
        return self.solutions[i]

    def __iter__(self):
        return iter(self.solutions)

    @property
    def raw_t_A(self) -> np.ndarray:
        return np.array([s.t_A for s in self.solutions])

    @property
    def raw_t_B(self) -> np.ndarray:
        return np.array([s.t_B for s in self.solutions])

    def raw_monotonicity_violation(self) -> tuple[float, float]:
        """Largest decrease of raw ``t_A`` and largest increase of raw ``t_B`` along the grid."""
        da = np.diff(self.raw_t_A)
        db = np.diff(self.raw_t_B)
        return (float(max(0.0, -da.min(initial=0.0))), float(max(0.0, db.max(initial=0.0))))

    def alphas(self) -> np.ndarray:
        return np.array([alpha_of_epsilon(t) for t in self.t_B])


def epsilon_sweep(group_a: GroupSample, group_b: GroupSample, epsilon_grid: Sequence[float],
                  rate_resolution: int = DEFAULT_RATE_RESOLUTION) -> FairnessSweep:
    eps = np.asarray(epsilon_grid, dtype=float).reshape(-1)
    if eps.size == 0:
        raise ValueError("epsilon grid is empty")
    if np.any(eps < 0) or np.any(np.diff(eps) < 0) or not np.all(np.isfinite(eps)):
        raise ValueError("epsilon grid must be finite, non-negative and sorted ascending")
    ga, gb, roles = _ordered(group_a, group_b)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # already warned once above if swapped
        sols = tuple(solve_dp_constrained(ga, gb, e, rate_resolution) for e in eps)
    sols = tuple(FairnessSolution(s.epsilon, s.policy, s.beta_A, s.beta_B, s.profit_utility,
                                  s.max_util_rates, roles) for s in sols)
    ta = isotonic_regression(np.array([s.t_A for s in sols]), increasing=True).x
    tb = isotonic_regression(np.array([s.t_B for s in sols]), increasing=False).x
    return FairnessSweep(sols, eps, np.minimum(ta, 0.0), np.maximum(tb, 0.0))


def fixed_group_welfare(t_star: float, alpha: float) -> float:
    """Group welfare score making the alpha-Pareto rule equal ``I(p >= t_star)``."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie strictly between 0 and 1, got {alpha!r}")
    return -((1.0 - alpha) / alpha) * t_star


def alpha_of_epsilon(t_b_eps: float) -> float:
    """Trade-off weight ``t_B / (1 + t_B)`` matching B's fair threshold."""
    if not t_b_eps >= 0:
        raise ValueError(f"t_B must be non-negative, got {t_b_eps!r}")
    if math.isinf(t_b_eps):
        return 1.0
    return t_b_eps / (1.0 + t_b_eps)


class WelfareVariant(str, enum.Enum):
    STANDARD = "standard"
    FLIPPED = "flipped"


def _invert_monotone(t: np.ndarray, eps: np.ndarray, keep_max: bool):
    """Piecewise-linear inverse of a monotone tabulated map ``eps -> t``."""
    order = np.argsort(t, kind="stable")
    ts, es = t[order], eps[order]
    uniq, start = np.unique(ts, return_index=True)
    # plateaus collapse to one knot at the extreme epsilon; the zero-threshold
    # plateau (constraint slack) starts where slack is first reached
    ev = (np.maximum if keep_max else np.minimum).reduceat(es, start)
    if uniq[-1 if keep_max else 0] == 0.0:
        ev[-1 if keep_max else 0] = np.minimum.reduceat(es, start)[-1 if keep_max else 0]

    def inv(p):
        return np.interp(p, uniq, ev)

    return inv


@dataclass(frozen=True, eq=False)
class InducedWelfareSpec:
    """Per-group welfare scores under which each fair policy is alpha-Pareto.

    Standard variant: ``w_B = -1`` on ``[0, t_B^0]`` and
    ``w_A = -p / t_B^{eps_A(p)}`` on ``[t_A^0, 0]``, with
    ``alpha = t_B / (1 + t_B)``. Flipped variant: ``w_A = 1`` on
    ``[t_A^0, 0]`` and ``w_B = -p / |t_A^{eps_B(p)}|`` on ``[0, t_B^0]``,
    with ``alpha = |t_A| / (1 + |t_A|)``. Scores are zero elsewhere.
    """

    variant: WelfareVariant
    epsilon_grid: np.ndarray
    t_A_of_eps: np.ndarray
    t_B_of_eps: np.ndarray

    @property
    def t_A0(self) -> float:
        return float(self.t_A_of_eps[0])

    @property
    def t_B0(self) -> float:
        return float(self.t_B_of_eps[0])

    def threshold_at(self, epsilon: float) -> tuple[float, float]:
        e = self.epsilon_grid
        return (float(np.interp(epsilon, e, self.t_A_of_eps)),
                float(np.interp(epsilon, e, self.t_B_of_eps)))

    def alpha(self, epsilon: float) -> float:
        ta, tb = self.threshold_at(epsilon)
        return alpha_of_epsilon(tb if self.variant is WelfareVariant.STANDARD else abs(ta))

    def epsilon_A(self, p) -> np.ndarray:
        """Largest epsilon whose A threshold is at most ``p`` (interpolated)."""
        return _invert_monotone(self.t_A_of_eps, self.epsilon_grid, keep_max=True)(p)

    def epsilon_B(self, p) -> np.ndarray:
        """Smallest epsilon whose B threshold is at most ``p`` (interpolated)."""
        return _invert_monotone(self.t_B_of_eps, self.epsilon_grid, keep_max=False)(p)

    def w_A(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        band = (p >= self.t_A0) & (p <= 0)
        if self.variant is WelfareVariant.FLIPPED:
            return np.where(band, 1.0, 0.0)
        tb = np.interp(self.epsilon_A(p), self.epsilon_grid, self.t_B_of_eps)
        return np.where(band & (tb > 0), -p / np.where(tb > 0, tb, 1.0), 0.0)

    def w_B(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        band = (p >= 0) & (p <= self.t_B0)
        if self.variant is WelfareVariant.STANDARD:
            return np.where(band, -1.0, 0.0)
        ta = np.abs(np.interp(self.epsilon_B(p), self.epsilon_grid, self.t_A_of_eps))
        return np.where(band & (ta > 0), -p / np.where(ta > 0, ta, 1.0), 0.0)

    def welfare(self, group_id: str, p) -> np.ndarray:
        return self.w_A(p) if group_id == "A" else self.w_B(p)


def build_induced_welfare(sweep: FairnessSweep, variant=WelfareVariant.STANDARD) -> InducedWelfareSpec:
    ta, tb = np.asarray(sweep.t_A, dtype=float), np.asarray(sweep.t_B, dtype=float)
    if np.any(np.diff(ta) < 0) or np.any(np.diff(tb) > 0):
        raise RuntimeError("projected thresholds are not monotone in epsilon")
    if np.any(ta > 0) or np.any(tb < 0):
        raise RuntimeError("projected thresholds have the wrong sign")
    return InducedWelfareSpec(WelfareVariant(variant), np.asarray(sweep.epsilons, dtype=float),
                              ta, tb)


@dataclass(frozen=True)
class EquivalenceReport:
    """Comparison of a fair policy with its induced alpha-Pareto policy.

    Counts are weighted by individual multiplicity. A mismatch is in a
    boundary cell when the individual's rank-rate in its group is within one
    rate-grid cell (plus its own atom) of the group's selection rate.
    """

    epsilon: float
    alpha: float
    n_individuals: float
    mismatches: float
    mismatches_outside_boundary: float
    locations: tuple[tuple[str, float], ...] = ()

    @property
    def mismatch_share(self) -> float:
        return self.mismatches / self.n_individuals


def verify_fair_pareto_equivalence(solution: FairnessSolution, spec: InducedWelfareSpec,
                                   group_a: GroupSample, group_b: GroupSample,
                                   rate_resolution: int = DEFAULT_RATE_RESOLUTION,
                                   tol: float = 1e-12) -> EquivalenceReport:
    """Compare ``I(p >= t_j)`` with ``I(alpha w_j(p) + (1 - alpha) p >= 0)`` per individual.

    Groups are matched to roles by ``solution.roles``. Composites within
    ``tol`` of zero count as ties and are accepted, absorbing the rounding of
    the induced scores at ``p = t_j`` exactly.
    """
    by_id = {group_a.group_id: group_a, group_b.group_id: group_b}
    a = spec.alpha(solution.epsilon)
    cell = 1.0 / (rate_resolution - 1)
    n = bad = outside = 0.0
    where: list[tuple[str, float]] = []
    for role, orig, t, beta in (("A", solution.roles[0], solution.t_A, solution.beta_A),
                                ("B", solution.roles[1], solution.t_B, solution.beta_B)):
        g = by_id[orig]
        p, c, q = g.profits, g.counts, g.atom_fraction()
        fair = p >= t
        pareto = a * spec.welfare(role, p) + (1 - a) * p >= -tol
        miss = fair != pareto
        # rate of members strictly above each atom
        above = 1.0 - np.cumsum(q)
        near = (np.abs(above - beta) <= cell + q) | (np.abs(above + q - beta) <= cell + q)
        n += c.sum()
        bad += c[miss].sum()
        outside += c[miss & ~near].sum()
        where.extend((orig, float(x)) for x in p[miss])
    return EquivalenceReport(float(solution.epsilon), float(a), float(n), float(bad),
                             float(outside), tuple(where))
