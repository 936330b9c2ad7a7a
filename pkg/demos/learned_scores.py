"""Learn profit and welfare scores with ridge regression and watch the
plug-in frontier approach the exact one as training data grows.

Uses a synthetic abalone-like dataset; pass a path to the UCI file to use it instead.

Run: python demos/learned_scores.py [abalone.data]
"""

import sys

import numpy as np

from welfare_pareto import ScoreSource, dominance_gap, dominated_area, sweep_frontier
from welfare_pareto.learning import (LearnConfig, abalone_experiment, read_abalone_csv,
                                     synthetic_abalone)

records = read_abalone_csv(sys.argv[1]) if len(sys.argv) > 1 else synthetic_abalone(4177, seed=3)

print("train size  profit MAE  welfare MAE  area share  mean gap")
for size in (16, 33, 334, 3341):
    runs = [abalone_experiment(records, LearnConfig(train_subsample=size), rep) for rep in range(5)]
    shares, gaps = [], []
    for r in runs:
        exact = sweep_frontier(r.cohort)
        real = sweep_frontier(r.cohort, ScoreSource.PREDICTED, eval_with=ScoreSource.TRUE)
        ref = (exact.profit.min(), exact.welfare.min())
        shares.append(dominated_area(real, ref) / dominated_area(exact, ref))
        g = dominance_gap(exact, real)
        gaps.append(np.mean(g[np.isfinite(g)]))
    print(f"{size:10d}  {np.mean([r.mae_profit for r in runs]):10.3f}  "
          f"{np.mean([r.mae_welfare for r in runs]):11.3f}  {np.mean(shares):10.3f}  "
          f"{np.mean(gaps):8.3f}")

print("\nThe area share grows with data. The per-alpha gap does not: with tiny training")
print("sets the plug-in policies stay near the profit-maximizing corner, where the")
print("exact frontier is flat, so they look close at each alpha while reaching little welfare.")
