"""
Replaying one tile order
========================

A tile order is a fixed permutation of every tile. Player 1 draws from its
front and player 2 from its back, so player 1 sees the same tiles in every
game played on that order, whatever player 2 does. This script plays a few
games on one order and checks that.
"""

import numpy as np

from tilebench.bot import SpeedyBot
from tilebench.engine import MoveGenerator, play_game, replay
from tilebench.harness import derive_seed, order_sequence
from tilebench.lexicon import load_any
from tilebench.reservoir import Reservoir
from tilebench.ruleset import load_ruleset

rules = load_ruleset("scrabble")
lexicon = load_any("enable")
generator = MoveGenerator(rules, lexicon)

# order 0 of master seed 1
seq = order_sequence(rules, 1, 0)
print("tile order:", seq.letters)
print("blanks at", seq.positions("?"), " S at", seq.positions("S"))

###############################################################################
# Five games on the same order. Each game has its own seed, which drives the
# bots' perturbation and where exchanged tiles go back in.

records = []
for rep in range(5):
    rng = np.random.default_rng(derive_seed(1, "game", 0, rep))
    rec = play_game(rules, lexicon, Reservoir(seq), SpeedyBot(), SpeedyBot(), rng,
                    order_id=0, replicate_id=rep, generator=generator)
    records.append(rec)
    print(f"game {rep}: {rec.final_scores[0]:4d} - {rec.final_scores[1]:4d}  "
          f"{len(rec.moves)} turns, P1 drew {len(rec.draws[0])} tiles")

###############################################################################
# Player 1's draws agree until the bag runs short. Exchanges put tiles back
# at random places, so a game with exchanges can diverge from that point.

first = [r.drawn_letters(0) for r in records]
n = min(len(s) for s in first)
print("shared prefix of P1 draws:", all(s[:n] == first[0][:n] for s in first), f"({n} tiles)")
print("P2 draws identical too?  ", len({r.drawn_letters(1) for r in records}) == 1)

###############################################################################
# A record is enough to rebuild the game move by move.

final = replay(records[0], rules, lexicon)
assert (final.scores[0], final.scores[1]) == records[0].final_scores
print("replayed final scores:", final.scores)
