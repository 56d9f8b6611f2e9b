"""Static-evaluation bot in the style of a "speedy" crossword player.

Each candidate move gets a utility: points scored now plus the estimated
worth of the tiles left on the rack (the *leave*), optionally plus an
openness term. The bot adds an independent Uniform(-w, w) draw to every
candidate's utility and plays the argmax, so with ``w = 1`` it can never
choose a move two or more points below the best.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from .engine import (EXCHANGE, PLACE, GameState, MoveChoice, MoveGenerator, Placement,
                     rack_to_counts)
from .errors import FormatVersionError, TilebenchError
from .ruleset import ALPHABET, RuleSet

LEAVE_FORMAT = "tilebench-leaves/1"


@dataclass(frozen=True)
class LeaveTable:
    """Additive leave model; see ``data/leaves.yaml`` for the formula."""

    values: np.ndarray  # 27 floats, blank last
    duplicate_penalty: np.ndarray  # 27 floats, applied per copy beyond the first
    is_vowel: np.ndarray  # 26 bools
    balance_weight: float = 2.0
    exchange_adjustment: float = 0.0
    balance: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        v = np.arange(8)[:, None]
        c = np.arange(8)[None, :]
        bal = -self.balance_weight * np.maximum(0, np.abs(v - c) - 1)
        object.__setattr__(self, "balance", bal.astype(np.float64))

    @property
    def kernel_params(self):
        return (self.values, self.duplicate_penalty, self.is_vowel, self.balance)

    def value(self, tiles) -> float:
        """Leave value of a multiset of tiles (letters string or 27-count vector)."""
        counts = tiles if isinstance(tiles, np.ndarray) and tiles.shape == (27,) else rack_to_counts(tiles)
        if counts.sum() == 0:
            return 0.0
        total = float(counts @ self.values)
        total += float(np.maximum(counts - 1, 0) @ self.duplicate_penalty)
        vowels = int(counts[:26] @ self.is_vowel)
        consonants = int(counts[:26].sum()) - vowels
        return total + float(self.balance[vowels, consonants])


def parse_leave_table(text: str) -> LeaveTable:
    doc = yaml.safe_load(text)
    if not isinstance(doc, dict) or doc.get("format") != LEAVE_FORMAT:
        raise FormatVersionError(message=f"expected leave table format {LEAVE_FORMAT}")
    try:
        values = np.array([float(doc["values"].get(ch, 0.0)) for ch in ALPHABET])
        dup = doc.get("duplicate_penalty", {})
        default = float(dup.get("default", 0.0))
        dups = np.array([float(dup.get(ch, default)) for ch in ALPHABET])
        vowels = set(str(doc.get("vowels", "AEIOU")).upper())
        is_vowel = np.array([ch in vowels for ch in ALPHABET[:26]], dtype=np.bool_)
        return LeaveTable(values, dups, is_vowel, float(doc.get("balance_weight", 0.0)),
                          float(doc.get("exchange_adjustment", 0.0)))
    except (AttributeError, TypeError, ValueError, KeyError) as exc:
        raise TilebenchError("parse_error", f"malformed leave table: {exc!r}") from None


def load_leave_table(path: str | Path | None = None) -> LeaveTable:
    """Load a leave table file; ``None`` gives the bundled default."""
    if path is None:
        text = resources.files("tilebench.data").joinpath("leaves.yaml").read_text()
    else:
        text = Path(path).read_text()
    return parse_leave_table(text)


@dataclass(frozen=True)
class BotConfig:
    leave_table: LeaveTable = field(default_factory=load_leave_table)
    perturbation_half_width: float = 1.0
    openness_weight: float = 0.0
    exchange_threshold: float = 2.0

    def __post_init__(self):
        if self.perturbation_half_width < 0:
            raise ValueError("perturbation_half_width must be >= 0")


# --------------------------------------------------------------------------
# Utility


def openness(letters_before: np.ndarray, letters_after: np.ndarray, ruleset: RuleSet) -> int:
    """Premium squares that became playable anchors because of the move."""
    def anchors(letters):
        filled = letters >= 0
        near = np.zeros_like(filled)
        near[1:] |= filled[:-1]
        near[:-1] |= filled[1:]
        near[:, 1:] |= filled[:, :-1]
        near[:, :-1] |= filled[:, 1:]
        return near & ~filled

    premium = (ruleset.letter_multipliers > 1) | (ruleset.word_multipliers > 1)
    return int((anchors(letters_after) & ~anchors(letters_before) & premium).sum())


def _board_after(state: GameState, placement: Placement) -> np.ndarray:
    after = state.letters.copy()
    for r, c, ch, _ in placement.tiles:
        after[r, c] = ord(ch) - 65
    return after


def best_exchange(rack_counts: np.ndarray, leave: LeaveTable) -> tuple[np.ndarray, float]:
    """Kept-tile multiset with the highest leave, over all proper subsets of the rack."""
    best_keep = None
    best_val = -np.inf
    ranges = [range(int(k) + 1) for k in rack_counts]
    total = int(rack_counts.sum())
    for keep in itertools.product(*ranges):
        keep = np.array(keep, dtype=np.int64)
        if keep.sum() == total:
            continue
        v = leave.value(keep)
        if v > best_val:
            best_val, best_keep = v, keep
    return best_keep, best_val


def _counts_to_letters(counts: np.ndarray) -> str:
    return "".join(ALPHABET[k] * int(n) for k, n in enumerate(counts))


def utility(move: MoveChoice, state: GameState, config: BotConfig, ruleset: RuleSet | None = None) -> float:
    """Raw (unperturbed) utility of ``move`` for the player to move."""
    rack = state.rack_counts(state.to_move)
    leave = config.leave_table
    if move.kind == PLACE:
        used = rack_to_counts(move.placement.tiles_used)
        u = move.placement.score + leave.value(rack - used)
        if config.openness_weight and ruleset is not None:
            u += config.openness_weight * openness(state.letters, _board_after(state, move.placement), ruleset)
        return u
    if move.kind == EXCHANGE:
        return leave.value(rack - rack_to_counts("".join(move.exchange))) + leave.exchange_adjustment
    return leave.value(rack)


def _tie_key(move: MoveChoice):
    if move.kind != PLACE:
        return (0, "", 0, 0, "")
    p = move.placement
    return (-p.score, p.word, p.row, p.col, p.direction)


def pick(raw: np.ndarray, half_width: float, rng, tie_keys=None) -> int:
    """Index of argmax(raw + U(-w, w)); with w = 0, ties go to the smallest tie key."""
    if half_width > 0:
        return int(np.argmax(raw + rng.uniform(-half_width, half_width, size=len(raw))))
    best = np.flatnonzero(raw == raw.max())
    if len(best) == 1 or tie_keys is None:
        return int(best[0])
    return int(min(best, key=lambda i: tie_keys(int(i))))


def _extra_candidates(best_place: float, rack: np.ndarray, state: GameState, config: BotConfig,
                      ruleset: RuleSet):
    out = []
    if (state.bag_remaining >= ruleset.exchange_min_reserve and rack.sum() > 0
            and best_place < config.exchange_threshold):
        keep, val = best_exchange(rack, config.leave_table)
        out.append((MoveChoice.swap(_counts_to_letters(rack - keep)), val + config.leave_table.exchange_adjustment))
    return out


def select_move(state: GameState, rack, legal, config: BotConfig, game_rng, ruleset: RuleSet) -> MoveChoice:
    """Choose among ``legal`` placements plus exchange/pass, with perturbation.

    An exchange (of the tiles whose removal leaves the best keep) is
    offered when it is legal and no placement reaches
    ``config.exchange_threshold``; passing is offered only when nothing
    else is available.
    """
    rack = rack if isinstance(rack, np.ndarray) else rack_to_counts(rack)
    placements = sorted(legal, key=lambda p: (p.row, p.col, p.direction, p.tiles, p.word))
    cands = [MoveChoice.place(p) for p in placements]
    raw = [utility(m, state, config, ruleset) for m in cands]
    best = max(raw, default=-np.inf)
    for move, u in _extra_candidates(best, rack, state, config, ruleset):
        cands.append(move)
        raw.append(u)
    if not cands:
        return MoveChoice.pass_turn()
    raw = np.asarray(raw, dtype=float)
    i = pick(raw, config.perturbation_half_width, game_rng, lambda k: _tie_key(cands[k]))
    return cands[i]


class SpeedyBot:
    """Bot that plays through the compiled move generator."""

    def __init__(self, config: BotConfig | None = None, audit: bool = False):
        self.config = config or BotConfig()
        self.audit = audit
        self.last_audit_margin = None

    def choose(self, state: GameState, generator: MoveGenerator, rng) -> MoveChoice:
        cfg = self.config
        ruleset = generator.ruleset
        rack = state.rack_counts(state.to_move)
        batch = generator.generate(state.letters, state.blanks, rack, cfg.leave_table.kernel_params)
        raw = batch.score + batch.leave
        if cfg.openness_weight and len(batch):
            raw = raw + cfg.openness_weight * np.array(
                [openness(state.letters, _board_after(state, batch.placement(i)), ruleset)
                 for i in range(len(batch))])
        best = raw.max() if len(batch) else -np.inf
        extra = _extra_candidates(best, rack, state, cfg, ruleset)
        n = len(batch)
        if extra:
            raw = np.concatenate([raw, [u for _, u in extra]])
        if len(raw) == 0:
            self.last_audit_margin = 0.0 if self.audit else None
            return MoveChoice.pass_turn()

        def tie_key(k):
            return _tie_key(MoveChoice.place(batch.placement(k)) if k < n else extra[k - n][0])

        i = pick(raw, cfg.perturbation_half_width, rng, tie_key)
        self.last_audit_margin = float(raw.max() - raw[i]) if self.audit else None
        return MoveChoice.place(batch.placement(i)) if i < n else extra[i - n][0]


class PassBot:
    """Always passes; useful for exercising end-of-game rules."""

    last_audit_margin = None

    def choose(self, state, generator, rng) -> MoveChoice:
        return MoveChoice.pass_turn()
