"""Shared domain types, utility evaluation and dominance predicates.

Individuals are represented only by their score pairs. A cohort stores the
true (profit, welfare) scores column-wise as numpy arrays, optionally with
predicted scores and a two-valued group label.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

GROUPS = ("A", "B")


class NumericalError(ArithmeticError):
    """Raised when a numeric routine cannot produce a reliable answer."""


class ScorePair(NamedTuple):
    profit: float
    welfare: float


class UtilityPoint(NamedTuple):
    profit_utility: float
    welfare_utility: float


def _as_score_array(values, name: str, n: Optional[int] = None) -> np.ndarray:
    arr = np.asarray(values, dtype=float).reshape(-1)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    if n is not None and arr.size != n:
        raise ValueError(f"{name} has length {arr.size}, expected {n}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Cohort:
    """A finite population of individuals described by score pairs.

    Parameters
    ----------
    profit, welfare : array_like
        True scores, one entry per individual.
    profit_hat, welfare_hat : array_like, optional
        Predicted scores aligned index-by-index with the true scores. Either
        both or neither must be given.
    group : array_like of str, optional
        Group labels, each in ``{"A", "B"}``.
    """

    profit: np.ndarray
    welfare: np.ndarray
    profit_hat: Optional[np.ndarray] = None
    welfare_hat: Optional[np.ndarray] = None
    group: Optional[np.ndarray] = None

    def __post_init__(self):
        p = _as_score_array(self.profit, "profit")
        if p.size < 1:
            raise ValueError("a cohort needs at least one individual")
        n = p.size
        object.__setattr__(self, "profit", p)
        object.__setattr__(self, "welfare", _as_score_array(self.welfare, "welfare", n))
        if (self.profit_hat is None) != (self.welfare_hat is None):
            raise ValueError("profit_hat and welfare_hat must be given together")
        if self.profit_hat is not None:
            object.__setattr__(self, "profit_hat", _as_score_array(self.profit_hat, "profit_hat", n))
            object.__setattr__(self, "welfare_hat", _as_score_array(self.welfare_hat, "welfare_hat", n))
        if self.group is not None:
            g = np.asarray(self.group, dtype=str).reshape(-1)
            if g.size != n:
                raise ValueError(f"group has length {g.size}, expected {n}")
            bad = set(np.unique(g)) - set(GROUPS)
            if bad:
                raise ValueError(f"unknown group labels: {sorted(bad)}")
            g.setflags(write=False)
            object.__setattr__(self, "group", g)

    @classmethod
    def from_pairs(cls, true_scores: Sequence, predicted_scores: Optional[Sequence] = None,
                   group: Optional[Sequence] = None) -> "Cohort":
        t = np.asarray(true_scores, dtype=float).reshape(-1, 2)
        kw = {}
        if predicted_scores is not None:
            h = np.asarray(predicted_scores, dtype=float).reshape(-1, 2)
            kw = dict(profit_hat=h[:, 0], welfare_hat=h[:, 1])
        return cls(t[:, 0], t[:, 1], group=group, **kw)

    @property
    def n(self) -> int:
        return self.profit.size

    @property
    def has_predictions(self) -> bool:
        return self.profit_hat is not None

    def scores(self, use_predicted: bool = False) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(profit, welfare)`` arrays from the true or predicted set."""
        if use_predicted:
            if not self.has_predictions:
                raise ValueError("cohort has no predicted scores")
            return self.profit_hat, self.welfare_hat
        return self.profit, self.welfare

    def true_scores(self) -> list[ScorePair]:
        return [ScorePair(float(p), float(w)) for p, w in zip(self.profit, self.welfare)]

    def predicted_scores(self) -> list[ScorePair]:
        p, w = self.scores(use_predicted=True)
        return [ScorePair(float(a), float(b)) for a, b in zip(p, w)]

    def with_predictions(self, profit_hat, welfare_hat) -> "Cohort":
        return Cohort(self.profit, self.welfare, profit_hat, welfare_hat, self.group)

    def fingerprint(self) -> int:
        """Hash of the true scores, used to check two curves share a cohort."""
        return hash((self.profit.tobytes(), self.welfare.tobytes()))


def check_alpha(alpha: float) -> float:
    a = float(alpha)
    if not 0.0 <= a <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha!r}")
    return a


def check_decisions(decisions, n: int) -> np.ndarray:
    d = np.asarray(decisions, dtype=float).reshape(-1)
    if d.size != n:
        raise ValueError(f"decision vector has length {d.size}, cohort has {n}")
    if np.any(~np.isfinite(d)) or np.any(d < 0) or np.any(d > 1):
        raise ValueError("decisions must be selection probabilities in [0, 1]")
    return d


def evaluate_utilities(cohort: Cohort, decisions, use_predicted: bool = False) -> UtilityPoint:
    """Mean profit and welfare collected by a (possibly randomized) decision vector.

    Randomized entries are evaluated by expectation, so the result is
    deterministic and linear in ``decisions``.
    """
    d = check_decisions(decisions, cohort.n)
    p, w = cohort.scores(use_predicted)
    return UtilityPoint(float(np.mean(p * d)), float(np.mean(w * d)))


def alpha_utility(u: UtilityPoint, alpha: float) -> float:
    a = check_alpha(alpha)
    return (1.0 - a) * u[0] + a * u[1]


def pareto_dominates(a: UtilityPoint, b: UtilityPoint) -> bool:
    """True iff ``a`` is at least as good as ``b`` in both utilities and better in one."""
    ge = a[0] >= b[0] and a[1] >= b[1]
    return ge and (a[0] > b[0] or a[1] > b[1])
