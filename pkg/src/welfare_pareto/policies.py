"""Threshold decision policies on exact, predicted and posterior-mean scores."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional

import numpy as np

from .core import Cohort, NumericalError, ScorePair, check_alpha

if TYPE_CHECKING:
    from .simulation import GaussianModel


class ScoreSource(str, enum.Enum):
    TRUE = "true"
    PREDICTED = "predicted"
    POSTERIOR = "posterior"


def composite(alpha: float, profit, welfare):
    """The alpha-weighted score ``(1 - alpha) * profit + alpha * welfare``."""
    a = check_alpha(alpha)
    return (1.0 - a) * np.asarray(profit, dtype=float) + a * np.asarray(welfare, dtype=float)


def _threshold(alpha, profit, welfare):
    # ties (composite exactly 0) are accepted
    out = (composite(alpha, profit, welfare) >= 0).astype(int)
    return int(out) if out.ndim == 0 else out


def exact_policy_decide(alpha: float, s: ScorePair):
    """Select iff the alpha-composite of the true scores is non-negative.

    Accepts a single :class:`ScorePair` or a pair of equal-length arrays and
    returns an int or an int array accordingly.
    """
    return _threshold(alpha, s[0], s[1])


def plugin_policy_decide(alpha: float, predicted: ScorePair):
    """Same rule as :func:`exact_policy_decide`, applied to predicted scores."""
    return _threshold(alpha, predicted[0], predicted[1])


def _observation_gain(model: "GaussianModel") -> np.ndarray:
    """Matrix K with E[(p, w) | (p_hat, w_hat)] = K @ (p_hat, w_hat)."""
    sp, sw, r = model.sigma_p, model.sigma_w, model.rho
    score_cov = np.array([[sp * sp, r * sp * sw], [r * sp * sw, sw * sw]])
    ep, ew = model.sigma_eps_p, model.sigma_eps_w
    cross = 0.0 if model.noise_independent else ep * ew
    noise_cov = np.array([[ep * ep, cross], [cross, ew * ew]])
    obs_cov = score_cov + noise_cov
    cond = np.linalg.cond(obs_cov)
    if not np.isfinite(cond) or cond > 1e12:
        raise NumericalError(
            f"observation covariance is singular (condition number {cond:.3g}); "
            f"score cov={score_cov.tolist()}, noise cov={noise_cov.tolist()}"
        )
    # score/observation cross-covariance equals score_cov since noise is independent of scores
    return np.linalg.solve(obs_cov.T, score_cov.T).T


def gaussian_conditional_means(model: "GaussianModel", predicted: ScorePair) -> ScorePair:
    """Posterior means of the true scores given predictions under a Gaussian model.

    Noise is taken to be Gaussian, either independent across the two scores
    or perfectly correlated (``model.noise_independent=False``). With zero
    noise the predictions are returned unchanged.
    """
    ph = np.asarray(predicted[0], dtype=float)
    wh = np.asarray(predicted[1], dtype=float)
    if model.sigma_eps_p == 0 and model.sigma_eps_w == 0:
        mp, mw = ph, wh
    else:
        k = _observation_gain(model)
        mp = k[0, 0] * ph + k[0, 1] * wh
        mw = k[1, 0] * ph + k[1, 1] * wh
    if mp.ndim == 0:
        return ScorePair(float(mp), float(mw))
    return ScorePair(mp, mw)


def bayes_policy_decide(model: "GaussianModel", alpha: float, predicted: ScorePair):
    """Threshold the composite of posterior-mean scores (tie-accept)."""
    mean = gaussian_conditional_means(model, predicted)
    return _threshold(alpha, mean.profit, mean.welfare)


@dataclass(frozen=True)
class ThresholdPolicy:
    alpha: float
    source: ScoreSource = ScoreSource.TRUE
    model: Optional["GaussianModel"] = None

    def __post_init__(self):
        object.__setattr__(self, "alpha", check_alpha(self.alpha))
        object.__setattr__(self, "source", ScoreSource(self.source))
        if self.source is ScoreSource.POSTERIOR and self.model is None:
            raise ValueError("a posterior policy needs a GaussianModel")


def apply_policy(policy: ThresholdPolicy, cohort: Cohort) -> np.ndarray:
    """Per-individual 0/1 decisions of ``policy`` on ``cohort``."""
    if policy.source is ScoreSource.TRUE:
        return exact_policy_decide(policy.alpha, (cohort.profit, cohort.welfare))
    predicted = cohort.scores(use_predicted=True)
    if policy.source is ScoreSource.PREDICTED:
        return plugin_policy_decide(policy.alpha, predicted)
    return bayes_policy_decide(policy.model, policy.alpha, predicted)
