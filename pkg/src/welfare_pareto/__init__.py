"""Pareto-optimal profit/welfare selection policies.

Exact, plug-in and posterior threshold policies; frontier sweeps and
diagnostics; Gaussian simulation with closed-form bounds; ridge-learned
scores; and demographic-parity constrained selection with induced welfare.
"""

from .core import (Cohort, NumericalError, ScorePair, UtilityPoint, alpha_utility,
                   evaluate_utilities, pareto_dominates)
from .fairness import (EquivalenceReport, FairnessSolution, FairnessSweep, GroupSample,
                       GroupThresholdPolicy, InducedWelfareSpec, WelfareVariant, alpha_of_epsilon,
                       build_induced_welfare, epsilon_sweep, fixed_group_welfare, group_objective,
                       make_groups, rate, rate_inverse, repayment_profit_score,
                       solve_dp_constrained, verify_fair_pareto_equivalence)
from .frontier import (FrontierDiagnostics, ParetoCurve, brute_force_frontier, check_concavity,
                       default_alpha_grid, diagnose, dominance_gap, dominated_area, sweep_frontier,
                       upper_concave_envelope)
from .learning import (AbaloneRecord, FeatureMatrix, LearnConfig, RidgeModel, abalone_scores,
                       encode_features, kfold_select, learn_score_functions, mean_absolute_error,
                       read_abalone_csv, ridge_fit, synthetic_abalone)
from .policies import (ScoreSource, ThresholdPolicy, apply_policy, bayes_policy_decide,
                       exact_policy_decide, gaussian_conditional_means, plugin_policy_decide)
from .simulation import (GaussianModel, TrialReport, add_prediction_noise,
                         empirical_suboptimality_bound, optimal_expected_alpha_utility,
                         plugin_utility_lower_bound, run_trials, sample_cohort, sigma_tilde_sq,
                         sigma_y)

__version__ = "0.1.0"

__all__ = [
    "AbaloneRecord", "Cohort", "EquivalenceReport", "FairnessSolution", "FairnessSweep",
    "FeatureMatrix", "FrontierDiagnostics", "GaussianModel", "GroupSample",
    "GroupThresholdPolicy", "InducedWelfareSpec", "LearnConfig", "NumericalError", "ParetoCurve",
    "RidgeModel", "ScorePair", "ScoreSource", "ThresholdPolicy", "TrialReport", "UtilityPoint",
    "WelfareVariant", "abalone_scores", "add_prediction_noise", "alpha_of_epsilon",
    "alpha_utility", "apply_policy", "bayes_policy_decide", "brute_force_frontier",
    "build_induced_welfare", "check_concavity", "default_alpha_grid", "diagnose",
    "dominance_gap", "dominated_area", "empirical_suboptimality_bound", "encode_features", "epsilon_sweep",
    "evaluate_utilities", "exact_policy_decide", "fixed_group_welfare",
    "gaussian_conditional_means", "group_objective", "kfold_select", "learn_score_functions",
    "make_groups", "mean_absolute_error", "optimal_expected_alpha_utility", "pareto_dominates",
    "plugin_policy_decide", "plugin_utility_lower_bound", "rate", "rate_inverse",
    "read_abalone_csv", "repayment_profit_score", "ridge_fit", "run_trials", "sample_cohort",
    "sigma_tilde_sq", "sigma_y", "solve_dp_constrained", "sweep_frontier",
    "synthetic_abalone", "upper_concave_envelope", "verify_fair_pareto_equivalence",
]
