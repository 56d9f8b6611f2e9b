"""Synthetic outcome tables with known generative parameters."""

import numpy as np
import pandas as pd

from tilebench.harness import LETTER_COLUMNS


def two_level(rng, n_orders, reps, sd_between=1.0, sd_within=1.0, mean=0.0, metric="p1_score"):
    """metric = mean + order effect + game noise, one row per game."""
    order_effect = rng.normal(0.0, sd_between, n_orders)
    y = mean + np.repeat(order_effect, reps) + rng.normal(0.0, sd_within, n_orders * reps)
    frame = pd.DataFrame({
        "order_id": np.repeat(np.arange(n_orders), reps),
        "replicate_id": np.tile(np.arange(reps), n_orders),
        "status": "ok",
    })
    frame[metric] = y
    return frame


def positional(rng, n_orders, reps, blank_step=0.0, s_step=0.0, sd_order=10.0, sd_game=30.0, n_tiles=100):
    """Games whose tile orders place two blanks and four S uniformly.

    Player 1's score gains ``blank_step`` for each blank and ``s_step``
    for each S in positions 0-49.
    """
    rows = []
    sequences = {}
    for o in range(n_orders):
        pos = rng.permutation(n_tiles)[:6]
        blanks, ss = np.sort(pos[:2]), np.sort(pos[2:])
        seq = np.array(["E"] * n_tiles)
        seq[blanks] = "?"
        seq[ss] = "S"
        sequences[o] = "".join(seq)
        base = blank_step * (blanks < 50).sum() + s_step * (ss < 50).sum() + rng.normal(0, sd_order)
        for r in range(reps):
            rows.append({"order_id": o, "replicate_id": r, "status": "ok",
                         "p1_score": base + rng.normal(0, sd_game),
                         "blank1_pos": blanks[0], "blank2_pos": blanks[1],
                         "s_positions": ";".join(str(i) for i in ss)})
    return pd.DataFrame(rows), sequences


def exposures(rng, n_orders, reps, slopes, sd_order=10.0, sd_game=30.0, metric="p1_score"):
    """Per-letter drawn counts with ``metric = sum(slope * count) + noise``."""
    n = n_orders * reps
    frame = pd.DataFrame({"order_id": np.repeat(np.arange(n_orders), reps),
                          "replicate_id": np.tile(np.arange(reps), n_orders), "status": "ok"})
    y = np.repeat(rng.normal(0, sd_order, n_orders), reps) + rng.normal(0, sd_game, n)
    for name in LETTER_COLUMNS:
        counts = rng.binomial(2, 0.5, n)
        frame[f"p1_drawn_{name}"] = counts
        frame[f"p1_played_{name}"] = counts
        y = y + slopes.get(name, 0.0) * counts
    frame[metric] = y
    return frame
