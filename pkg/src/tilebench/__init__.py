"""Crossword-game simulation with a replicable two-sided tile draw.

Modules: ``ruleset`` (board and tile configurations), ``lexicon`` (word
graph), ``engine`` (move generation, scoring, game loop), ``reservoir``
(two-sided draw), ``bot`` (static-evaluation player), ``harness``
(orders x replicates experiments), ``analysis`` (estimators) and ``cli``.
"""

__version__ = "0.1.0"

from .errors import TilebenchError  # noqa: E402

__all__ = ["TilebenchError", "__version__"]
