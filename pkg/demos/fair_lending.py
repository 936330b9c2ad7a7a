"""Demographic-parity lending policies and the welfare weights they imply.

Run: python demos/fair_lending.py
"""

import numpy as np

from welfare_pareto.cli import synthetic_credit_groups
from welfare_pareto.fairness import (build_induced_welfare, epsilon_sweep, rate,
                                     verify_fair_pareto_equivalence)

group_a, group_b = synthetic_credit_groups(5000, seed=2)
gap = rate(group_b, 0.0) - rate(group_a, 0.0)
print(f"unconstrained approval rates differ by {gap:.3f}")

eps = np.linspace(0, gap, 9)
sweep = epsilon_sweep(group_a, group_b, eps, rate_resolution=5001)
spec = build_induced_welfare(sweep)

print("\nepsilon    t_A     t_B   profit   alpha  mismatches")
for s, ta, tb in zip(sweep, sweep.t_A, sweep.t_B):
    rep = verify_fair_pareto_equivalence(s, spec, group_a, group_b, 5001)
    print(f"{s.epsilon:7.3f} {ta:7.3f} {tb:7.3f} {s.profit_utility:8.4f} "
          f"{spec.alpha(s.epsilon):7.3f} {rep.mismatches:11.0f}")
print("\nA tighter parity constraint corresponds to a larger weight on the implied welfare.")
