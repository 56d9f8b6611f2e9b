"""
What a tile is worth to the player who draws it
===============================================

Three views of the same question: where the blanks sit in the tile order,
where the S tiles sit, and a per-letter regression of player 1's score on
how many copies of that letter player 1 drew.

Usage::

    python3 03_tile_values.py                      # small Scrabble and WWF runs
    python3 03_tile_values.py scrabble.csv wwf.csv # existing outcome tables
"""

import sys

import numpy as np
import pandas as pd

from tilebench.analysis import blank_decile_table, compare_rulesets, s_position_table, tile_effects
from tilebench.harness import ExperimentConfig, read_outcomes, run_experiment

if len(sys.argv) == 3:
    scrabble, wwf = read_outcomes(sys.argv[1]), read_outcomes(sys.argv[2])
else:
    small = dict(n_orders=40, replicates_per_order=5, master_seed=11)
    scrabble = run_experiment(ExperimentConfig(ruleset="scrabble", **small))
    wwf = run_experiment(ExperimentConfig(ruleset="wwf", **small))
min_count = max(1, len(scrabble.ok) // 100)

###############################################################################
# Blanks. Each cell is the mean player 1 score for games whose two blanks
# fall in those deciles of the order; thin cells are masked.

grid = blank_decile_table(scrabble, scrabble.sequences, min_count=min_count)
with np.printoptions(precision=0, suppress=True, linewidth=120):
    print(grid.masked_mean())
print(f"second blank in the front half: {grid.contrast:+.1f} points (se {grid.contrast_se:.1f})")

###############################################################################
# S tiles. Row k is the line for the k-th S in the order. When S is worth
# something, line k + 1 sits above line k over the front half.

stab = s_position_table(scrabble, scrabble.sequences, min_count=min_count)
print(stab.to_frame().pivot(index="k", columns="decile", values="mean").round(0))
print("gaps between adjacent lines, deciles 4 and 5:", np.round(stab.adjacent_gaps(), 1).tolist())

###############################################################################
# Per-letter slopes, then the two rulesets side by side.

effects = tile_effects(scrabble)
print(effects[["slope", "se", "mean_exposure"]].round(2).sort_values("slope").to_string())

table = compare_rulesets(scrabble, wwf)
with pd.option_context("display.width", 120):
    print(table[["scrabble_slope", "wwf_slope", "delta", "delta_se"]].round(2).to_string())
