"""
How much of a score is the tile order?
======================================

Play many games on each of several tile orders, then split the variance of
player 1's score and of the score difference into a between-order part
(luck of the draw) and a within-order part (everything else).

Pass an outcome CSV written by ``tilebench simulate`` to analyse it instead
of the small experiment run here.
"""

import sys

import numpy as np

from tilebench.analysis import (first_player_advantage, null_between_fractions, variance_decomposition,
                                within_sd_quantiles)
from tilebench.harness import ExperimentConfig, read_outcomes, run_experiment

if len(sys.argv) > 1:
    table = read_outcomes(sys.argv[1])
else:
    # 30 orders x 8 games takes well under a minute on one core
    table = run_experiment(ExperimentConfig(n_orders=30, replicates_per_order=8, master_seed=3))
print(f"{len(table.ok)} games, {table.n_aborted} aborted")

###############################################################################
# Two ways to express the between-order share. The naive ratio divides the
# variance of order means by the total variance, which includes noise of size
# sigma_w^2 / R from averaging only R games. The ANOVA component removes it.

for metric in ("p1_score", "diff"):
    res = variance_decomposition(table, metric)
    print(f"{metric:9s} naive {res.between_fraction_naive:.3f}  anova {res.between_fraction_anova:.3f}  "
          f"(identity error {res.identity_error:.1e})")

null = null_between_fractions(table, "diff", n_shuffles=100)
print(f"shuffled labels give {null.mean():.3f} on average, 99th percentile {np.quantile(null, .99):.3f}")

###############################################################################
# Going first is worth something. Games on one order share their tiles, so
# the standard error is clustered by order.

adv = first_player_advantage(table)
print(f"first-player advantage {adv.mean:.1f} points, 95% CI [{adv.ci_low:.1f}, {adv.ci_high:.1f}]")

# spread of the score difference among games on one order
q = within_sd_quantiles(table, "diff")
print("within-order sd of diff by percentile:", {k: round(v, 1) for k, v in q.items()})
