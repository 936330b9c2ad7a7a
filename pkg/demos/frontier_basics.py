"""Trace the profit/welfare trade-off for a small cohort and a Gaussian one.

Run: python demos/frontier_basics.py
"""

import numpy as np

from welfare_pareto import (Cohort, GaussianModel, brute_force_frontier, diagnose, sample_cohort,
                            sweep_frontier)

# Three applicants: (profit, welfare) scores.
toy = Cohort([1.0, -1.0, 1.0], [-1.0, 2.0, 1.0])
curve = sweep_frontier(toy, alpha_grid=[0.0, 0.5, 1.0])
print("toy cohort frontier")
for alpha, (p, w) in curve.points:
    print(f"  alpha={alpha:.1f}  profit={p:.3f}  welfare={w:.3f}")

# The threshold rule is optimal: checking every subset gives the same values.
assert np.array_equal(brute_force_frontier(toy, curve.alphas).alpha_utilities(),
                      curve.alpha_utilities())
print("  matches subset enumeration")

# With many individuals the frontier is concave.
big = sample_cohort(GaussianModel(rho=0.0), 5000, seed=1)
d = diagnose(sweep_frontier(big))
print(f"\nGaussian cohort: profit range [{d.p_min:.3f}, {d.p_max:.3f}], "
      f"max welfare {d.w_max:.3f}, concavity violation {d.concavity_violation:.2e}")
