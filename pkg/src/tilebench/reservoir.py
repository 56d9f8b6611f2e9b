"""Two-sided draw: a fixed tile order consumed from both ends.

Player 1 draws from the front of a predetermined sequence and player 2 from
the back, so a player who draws the same number of tiles at each turn sees
the same tiles whatever the opponent does. Exchanged tiles are replaced
from the exchanging player's own end first, then the discards are inserted
one at a time at uniformly random gaps of the remaining sequence.

Tiles are identified by their index in the initial sequence (their "uid"),
which lets callers track exposure of individual tiles through exchanges.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ExchangeNotAllowed, TilebenchError
from .ruleset import ALPHABET, BLANK, RuleSet

FRONT = "front"
BACK = "back"
TWO_SIDED = "two_sided"
CLASSIC_BAG = "classic_bag"


@dataclass(frozen=True)
class TileSequence:
    """One permutation of the full tile set; ``?`` is the blank."""

    letters: str
    order_id: int = 0

    def __len__(self) -> int:
        return len(self.letters)

    def to_line(self) -> str:
        return self.letters

    @classmethod
    def from_line(cls, line: str, order_id: int = 0) -> TileSequence:
        text = line.strip().upper()
        bad = set(text) - set(ALPHABET)
        if bad:
            raise TilebenchError("parse_error", f"unknown tile characters {sorted(bad)}")
        return cls(text, order_id)

    def positions(self, letter: str) -> list[int]:
        """0-based positions of ``letter`` in the initial order."""
        return [i for i, ch in enumerate(self.letters) if ch == letter]

    @property
    def codes(self) -> np.ndarray:
        return np.array([ALPHABET.index(ch) for ch in self.letters], dtype=np.int8)


def full_tile_string(ruleset: RuleSet) -> str:
    return "".join(ch * ruleset.tile_counts.get(ch, 0) for ch in ALPHABET)


def generate_sequence(ruleset: RuleSet, order_rng: np.random.Generator, order_id: int = 0) -> TileSequence:
    """Uniformly random permutation of the ruleset's tile multiset."""
    tiles = np.array(list(full_tile_string(ruleset)))
    return TileSequence("".join(order_rng.permutation(tiles)), order_id)


class Reservoir:
    """Live draw state for one game.

    ``mode="classic_bag"`` ignores the order structure and draws uniformly
    at random (requires ``rng``); it exists for validation experiments.
    """

    def __init__(self, sequence: TileSequence | str, mode: str = TWO_SIDED,
                 rng: np.random.Generator | None = None, exchange_min_reserve: int = 7):
        if isinstance(sequence, str):
            sequence = TileSequence.from_line(sequence)
        if mode not in (TWO_SIDED, CLASSIC_BAG):
            raise ValueError(f"unknown reservoir mode {mode!r}")
        if mode == CLASSIC_BAG and rng is None:
            raise ValueError("classic_bag mode needs an rng")
        self.sequence = sequence
        self.mode = mode
        self.rng = rng
        self.exchange_min_reserve = exchange_min_reserve
        self.tile_letters = sequence.letters
        self._live: list[int] = list(range(len(sequence)))
        self.front_cursor = 0
        self.back_cursor = len(sequence) - 1
        self.drawn: dict[str, list[int]] = {FRONT: [], BACK: []}
        self.returned: dict[str, list[int]] = {FRONT: [], BACK: []}
        self.last_insertions: list[int] = []

    def remaining(self) -> int:
        return self.back_cursor - self.front_cursor + 1

    def remaining_tiles(self) -> list[int]:
        return self._live[self.front_cursor:self.back_cursor + 1]

    def letters(self, uids: Sequence[int]) -> str:
        return "".join(self.tile_letters[u] for u in uids)

    def draw(self, end: str, n: int) -> list[int]:
        """Take ``min(n, remaining())`` tiles from ``end``; returns tile uids."""
        n = max(0, min(n, self.remaining()))
        if n == 0:
            return []
        if self.mode == CLASSIC_BAG:
            out = []
            for _ in range(n):
                k = self.front_cursor + int(self.rng.integers(0, self.remaining()))
                live = self._live
                live[k], live[self.front_cursor] = live[self.front_cursor], live[k]
                out.append(live[self.front_cursor])
                self.front_cursor += 1
        elif end == FRONT:
            out = self._live[self.front_cursor:self.front_cursor + n]
            self.front_cursor += n
        elif end == BACK:
            out = self._live[self.back_cursor - n + 1:self.back_cursor + 1][::-1]
            self.back_cursor -= n
        else:
            raise ValueError(f"end must be 'front' or 'back', not {end!r}")
        self.drawn[end].extend(out)
        return out

    def can_exchange(self, k: int = 1) -> bool:
        return self.remaining() >= self.exchange_min_reserve and 0 < k <= self.remaining()

    def exchange(self, end: str, discarded: Sequence[int], game_rng) -> list[int]:
        """Swap ``discarded`` tiles: draw replacements, then reinsert the discards.

        ``game_rng`` only needs an ``integers(low, high)`` method; each discard
        goes to one of the ``remaining() + 1`` gaps, chosen uniformly, in order.
        """
        k = len(discarded)
        if not self.can_exchange(k):
            raise ExchangeNotAllowed(
                message=f"{k} tiles with {self.remaining()} remaining (minimum {self.exchange_min_reserve})")
        replacements = self.draw(end, k)
        self.last_insertions = []
        for uid in discarded:
            gap = int(game_rng.integers(0, self.remaining() + 1))
            self._live.insert(self.front_cursor + gap, uid)
            self.back_cursor += 1
            self.last_insertions.append(gap)
        self.returned[end].extend(discarded)
        return replacements

    def check_invariants(self) -> None:
        """Raise AssertionError if cursors or tile conservation are broken."""
        assert self.front_cursor <= self.back_cursor + 1
        assert self.remaining() == len(self.remaining_tiles())
        held = self.remaining_tiles()
        assert len(set(held)) == len(held)


def classic_first_rack(ruleset_or_tiles, rng: np.random.Generator, n: int = 7) -> str:
    """Sorted first rack under a plain uniform bag draw (for comparison tests)."""
    tiles = ruleset_or_tiles if isinstance(ruleset_or_tiles, str) else full_tile_string(ruleset_or_tiles)
    res = Reservoir(tiles, mode=CLASSIC_BAG, rng=rng)
    return "".join(sorted(res.letters(res.draw(FRONT, n))))


__all__ = [
    "BACK", "BLANK", "CLASSIC_BAG", "FRONT", "TWO_SIDED", "Reservoir", "TileSequence",
    "classic_first_rack", "full_tile_string", "generate_sequence",
]
