"""Correlated Gaussian score populations, additive prediction noise, Monte
Carlo frontier trials and the closed-form utility bounds for that model."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import Cohort, NumericalError, check_alpha
from .frontier import ParetoCurve, check_alpha_grid, default_alpha_grid, sweep_frontier
from .policies import ScoreSource, composite, exact_policy_decide, plugin_policy_decide

WORKERS_ENV = "WELFARE_PARETO_WORKERS"


@dataclass(frozen=True)
class GaussianModel:
    """Zero-mean bivariate Gaussian scores plus additive Gaussian prediction noise.

    With ``noise_independent=False`` the two noise terms are perfectly
    correlated (one standard normal draw scaled per score).
    """

    sigma_w: float = 1.0
    sigma_p: float = 1.0
    rho: float = 0.0
    sigma_eps_w: float = 0.0
    sigma_eps_p: float = 0.0
    noise_independent: bool = True

    def __post_init__(self):
        for name in ("sigma_w", "sigma_p", "sigma_eps_w", "sigma_eps_p"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be a finite non-negative number, got {v!r}")
        if not -1.0 <= self.rho <= 1.0:
            raise ValueError(f"rho must lie in [-1, 1], got {self.rho!r}")

    def score_covariance(self) -> np.ndarray:
        """Covariance of ``(w, p)``."""
        c = self.rho * self.sigma_w * self.sigma_p
        return np.array([[self.sigma_w ** 2, c], [c, self.sigma_p ** 2]])

    def with_noise(self, sigma_eps_w: float, sigma_eps_p: float) -> "GaussianModel":
        return GaussianModel(self.sigma_w, self.sigma_p, self.rho, sigma_eps_w, sigma_eps_p,
                             self.noise_independent)


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def sample_cohort(model: GaussianModel, n: int, seed=None) -> Cohort:
    """Draw ``n`` i.i.d. true score pairs from the model (no predictions)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    z = _rng(seed).standard_normal((n, 2))
    w = model.sigma_w * z[:, 0]
    p = model.sigma_p * (model.rho * z[:, 0] + math.sqrt(1.0 - model.rho ** 2) * z[:, 1])
    return Cohort(p, w)


def add_prediction_noise(cohort: Cohort, model: GaussianModel, seed=None) -> Cohort:
    """Return a copy of ``cohort`` whose predictions are true scores plus noise."""
    rng = _rng(seed)
    n = cohort.n
    if model.noise_independent:
        e = rng.standard_normal((n, 2))
        eps_w, eps_p = model.sigma_eps_w * e[:, 0], model.sigma_eps_p * e[:, 1]
    else:
        e = rng.standard_normal(n)
        eps_w, eps_p = model.sigma_eps_w * e, model.sigma_eps_p * e
    return cohort.with_predictions(cohort.profit + eps_p, cohort.welfare + eps_w)


def sigma_y(model: GaussianModel, alpha: float) -> float:
    """Standard deviation of the alpha-composite of the true scores."""
    a = check_alpha(alpha)
    var = (a * model.sigma_w) ** 2 + ((1 - a) * model.sigma_p) ** 2 \
        + 2 * model.rho * a * (1 - a) * model.sigma_w * model.sigma_p
    if var < 0:
        if var < -1e-12:
            raise NumericalError(f"negative composite variance {var!r}")
        var = 0.0
    return math.sqrt(var)


def sigma_tilde_sq(model: GaussianModel, alpha: float) -> float:
    """Squared sub-Gaussian parameter of the composite prediction error.

    The leading factor is 4 for arbitrary dependence between the two noise
    terms and 1 when they are independent.
    """
    a = check_alpha(alpha)
    factor = 1.0 if model.noise_independent else 4.0
    return factor * ((a * model.sigma_eps_w) ** 2 + ((1 - a) * model.sigma_eps_p) ** 2)


def optimal_expected_alpha_utility(model: GaussianModel, alpha: float) -> float:
    """Expected alpha-utility of thresholding the exact composite: E[max(y, 0)]."""
    return sigma_y(model, alpha) / math.sqrt(2 * math.pi)


def plugin_utility_lower_bound(model: GaussianModel, alpha: float) -> float:
    """Lower bound on the expected alpha-utility of the plug-in policy.

    Not clamped: large noise makes the bound negative (vacuous).
    """
    sy2 = sigma_y(model, alpha) ** 2
    st2 = sigma_tilde_sq(model, alpha)
    if st2 + sy2 == 0:
        return 0.0
    return optimal_expected_alpha_utility(model, alpha) * (1.0 - 2.0 * st2 / (st2 + sy2))


def empirical_suboptimality_bound(cohort: Cohort, alpha: float) -> float:
    """Alpha-weighted mean absolute prediction error of the cohort's scores."""
    a = check_alpha(alpha)
    ph, wh = cohort.scores(use_predicted=True)
    return (1 - a) * float(np.mean(np.abs(ph - cohort.profit))) \
        + a * float(np.mean(np.abs(wh - cohort.welfare)))


def realized_gap(cohort: Cohort, alpha: float) -> float:
    """u_alpha(exact threshold) - u_alpha(plug-in threshold), both on true scores.

    Computed as the mean of composite * (d_exact - d_plugin), a sum of
    non-negative terms, so rounding cannot make it negative.
    """
    c = composite(alpha, cohort.profit, cohort.welfare)
    d_star = exact_policy_decide(alpha, (cohort.profit, cohort.welfare))
    d_plug = plugin_policy_decide(alpha, cohort.scores(use_predicted=True))
    return float(np.mean(c * (d_star - d_plug)))


@dataclass(frozen=True, eq=False)
class TrialReport:
    """One Monte Carlo trial: exact and plug-in curves plus per-alpha bound checks.

    ``bounds`` is a structured array with fields ``alpha``,
    ``optimal_utility``, ``plugin_utility``, ``realized_gap``,
    ``lower_bound`` and ``l1_bound``.
    """

    trial_seed: int
    exact_curve: ParetoCurve
    empirical_curve: ParetoCurve
    bounds: np.ndarray

    @property
    def per_alpha_bound_check(self) -> list[tuple[float, float, float, float]]:
        b = self.bounds
        return [(float(r["alpha"]), float(r["plugin_utility"]), float(r["lower_bound"]),
                 float(r["l1_bound"])) for r in b]

    def bound_violations(self) -> int:
        """Alphas where the realized gap leaves ``[0, l1_bound]``."""
        g = self.bounds["realized_gap"]
        return int(np.sum((g < 0) | (g > self.bounds["l1_bound"])))


BOUND_DTYPE = np.dtype([("alpha", float), ("optimal_utility", float), ("plugin_utility", float),
                        ("realized_gap", float), ("lower_bound", float), ("l1_bound", float)])


def trial_seed(master_seed: int, trial: int) -> int:
    """Per-trial seed derived from the master seed and the trial index alone."""
    return int(np.random.SeedSequence([int(master_seed), int(trial)]).generate_state(1, np.uint64)[0])


def run_trial(model: GaussianModel, n: int, alpha_grid, seed: int) -> TrialReport:
    cohort_ss, noise_ss = np.random.SeedSequence(seed).spawn(2)
    cohort = add_prediction_noise(sample_cohort(model, n, cohort_ss), model, noise_ss)
    exact = sweep_frontier(cohort, ScoreSource.TRUE, alpha_grid)
    plug = sweep_frontier(cohort, ScoreSource.PREDICTED, alpha_grid, eval_with=ScoreSource.TRUE)
    bounds = np.empty(exact.alphas.size, dtype=BOUND_DTYPE)
    bounds["alpha"] = exact.alphas
    bounds["optimal_utility"] = exact.alpha_utilities()
    bounds["plugin_utility"] = plug.alpha_utilities()
    bounds["realized_gap"] = [realized_gap(cohort, a) for a in exact.alphas]
    bounds["lower_bound"] = [plugin_utility_lower_bound(model, a) for a in exact.alphas]
    bounds["l1_bound"] = [empirical_suboptimality_bound(cohort, a) for a in exact.alphas]
    return TrialReport(seed, exact, plug, bounds)


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def run_trials(model: GaussianModel, n: int, trials: int, alpha_grid=None,
               master_seed: int = 0, workers: Optional[int] = None) -> list[TrialReport]:
    """Run independent trials; trial ``t`` depends only on ``(master_seed, t)``.

    ``workers`` defaults to the ``WELFARE_PARETO_WORKERS`` environment
    variable (1 when unset). Results are returned in trial order.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    grid = default_alpha_grid() if alpha_grid is None else check_alpha_grid(alpha_grid)
    seeds = [trial_seed(master_seed, t) for t in range(trials)]
    workers = default_workers() if workers is None else max(1, int(workers))
    if workers == 1:
        return [run_trial(model, n, grid, s) for s in seeds]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda s: run_trial(model, n, grid, s), seeds))


def mean_and_se(values) -> tuple[np.ndarray, np.ndarray]:
    """Mean over axis 0 and its Monte Carlo standard error."""
    v = np.asarray(values, dtype=float)
    if v.shape[0] < 2:
        return v.mean(axis=0), np.zeros(v.shape[1:])
    return v.mean(axis=0), v.std(axis=0, ddof=1) / math.sqrt(v.shape[0])
