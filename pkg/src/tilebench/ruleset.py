"""Game configurations: board premiums, tile set, and scalar rules.

Rulesets live in small YAML files with the board drawn as a character
grid, so a config can be checked by eye against a picture of the board::

    format: tilebench-ruleset/1
    name: scrabble
    tile_total: 100
    rack_size: 7
    bingo_bonus: 50
    exchange_min_reserve: 7
    scoreless_turn_limit: 6
    center_premium_applies: true
    board: |
      T..d...T...d..T
      ...
    tiles:
      A: [9, 1]        # count, points
      "?": [2, 0]      # blank

Grid characters: ``.`` plain, ``d``/``t`` double/triple letter,
``D``/``T`` double/triple word.
"""

from __future__ import annotations

import enum
import functools
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping

import numpy as np
import yaml

from .errors import FormatVersionError, RulesetError

FORMAT = "tilebench-ruleset/1"
BOARD_SIZE = 15
CENTER = (7, 7)
LETTERS = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"
BLANK = "?"
ALPHABET = LETTERS + BLANK  # index 26 is the blank
BLANK_INDEX = 26
BUNDLED = ("scrabble", "wwf")


class PremiumKind(enum.Enum):
    NONE = "."
    DOUBLE_LETTER = "d"
    TRIPLE_LETTER = "t"
    DOUBLE_WORD = "D"
    TRIPLE_WORD = "T"

    @property
    def letter_multiplier(self) -> int:
        return {"d": 2, "t": 3}.get(self.value, 1)

    @property
    def word_multiplier(self) -> int:
        return {"D": 2, "T": 3}.get(self.value, 1)


@dataclass(frozen=True)
class Finding:
    code: str
    field: str
    message: str


@dataclass(frozen=True)
class RuleSet:
    name: str
    board: tuple[tuple[PremiumKind, ...], ...]
    tile_counts: Mapping[str, int]
    tile_values: Mapping[str, int]
    bingo_bonus: int
    rack_size: int = 7
    exchange_min_reserve: int = 7
    scoreless_turn_limit: int = 6
    center_premium_applies: bool = True
    tile_total: int | None = field(default=None, compare=False)

    @property
    def total_tiles(self) -> int:
        return sum(self.tile_counts.values())

    def premium(self, row: int, col: int) -> PremiumKind:
        return self.board[row][col]

    @functools.cached_property
    def letter_multipliers(self) -> np.ndarray:
        return np.array([[p.letter_multiplier for p in row] for row in self.board], dtype=np.int32)

    @functools.cached_property
    def word_multipliers(self) -> np.ndarray:
        return np.array([[p.word_multiplier for p in row] for row in self.board], dtype=np.int32)

    @functools.cached_property
    def value_array(self) -> np.ndarray:
        """Points indexed by alphabet position; the blank (index 26) is 0."""
        return np.array([self.tile_values.get(ch, 0) for ch in ALPHABET], dtype=np.int32)

    @functools.cached_property
    def count_array(self) -> np.ndarray:
        return np.array([self.tile_counts.get(ch, 0) for ch in ALPHABET], dtype=np.int32)

    def validate(self) -> list[Finding]:
        return validate_ruleset(self)


def validate_ruleset(rs: RuleSet) -> list[Finding]:
    """Check every RuleSet invariant; an empty list means the config is sound."""
    out: list[Finding] = []
    if len(rs.board) != BOARD_SIZE or any(len(r) != BOARD_SIZE for r in rs.board):
        out.append(Finding("invalid_board_shape", "board", "board must be 15x15"))
        return out
    for r in range(BOARD_SIZE):
        for c in range(BOARD_SIZE):
            if rs.board[r][c] is not rs.board[BOARD_SIZE - 1 - r][BOARD_SIZE - 1 - c]:
                out.append(Finding("board_asymmetry", "board",
                                   f"square ({r},{c}) differs from its 180-degree partner"))
                break
        else:
            continue
        break
    centre = rs.board[CENTER[0]][CENTER[1]]
    if rs.center_premium_applies != (centre is not PremiumKind.NONE):
        out.append(Finding("center_premium_mismatch", "center_premium_applies",
                           f"flag is {rs.center_premium_applies} but centre square is {centre.name}"))
    missing = [ch for ch in ALPHABET if ch not in rs.tile_counts]
    extra = [ch for ch in rs.tile_counts if ch not in ALPHABET]
    if missing or extra:
        out.append(Finding("tile_set_incomplete", "tiles",
                           f"missing {''.join(missing) or '-'}, unknown {''.join(extra) or '-'}"))
    if any(v < 0 for v in rs.tile_counts.values()):
        out.append(Finding("negative_count", "tiles", "tile counts must be non-negative"))
    if any(v < 0 for v in rs.tile_values.values()):
        out.append(Finding("negative_value", "tiles", "tile values must be non-negative"))
    if rs.tile_values.get(BLANK, 0) != 0:
        out.append(Finding("blank_value", "tiles", "the blank must score 0"))
    if rs.tile_counts.get(BLANK, 0) != 2:
        out.append(Finding("blank_count", "tiles", "exactly two blanks expected"))
    if rs.tile_total is not None and rs.total_tiles != rs.tile_total:
        out.append(Finding("tile_count_mismatch", "tiles",
                           f"counts sum to {rs.total_tiles}, declared tile_total {rs.tile_total}"))
    if rs.rack_size != 7:
        out.append(Finding("rack_size", "rack_size", "rack size must be 7"))
    for name in ("bingo_bonus", "exchange_min_reserve", "scoreless_turn_limit"):
        if getattr(rs, name) < 0:
            out.append(Finding("negative_scalar", name, f"{name} must be non-negative"))
    return out


def _parse_board(text) -> tuple[tuple[PremiumKind, ...], ...]:
    if not isinstance(text, str):
        raise RulesetError("parse_error", "board must be a block of text", field="board")
    rows = [line.strip() for line in text.strip().splitlines() if line.strip()]
    if len(rows) != BOARD_SIZE or any(len(r) != BOARD_SIZE for r in rows):
        raise RulesetError("invalid_board_shape",
                           f"board is {len(rows)}x{max((len(r) for r in rows), default=0)}, expected 15x15",
                           field="board")
    try:
        return tuple(tuple(PremiumKind(ch) for ch in row) for row in rows)
    except ValueError as exc:
        raise RulesetError("parse_error", f"unknown board character: {exc}", field="board") from None


def parse_ruleset(text: str) -> RuleSet:
    """Build a RuleSet from the YAML text of a ruleset file (no validation)."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise RulesetError("parse_error", str(exc)) from None
    if not isinstance(doc, dict):
        raise RulesetError("parse_error", "ruleset file must be a mapping")
    if doc.get("format") != FORMAT:
        raise FormatVersionError(message=f"expected format {FORMAT!r}, got {doc.get('format')!r}")
    try:
        tiles = {str(k).upper() if str(k) != BLANK else BLANK: v for k, v in doc["tiles"].items()}
        counts = {k: int(v[0]) for k, v in tiles.items()}
        values = {k: int(v[1]) for k, v in tiles.items()}
        return RuleSet(
            name=str(doc["name"]),
            board=_parse_board(doc["board"]),
            tile_counts=counts,
            tile_values=values,
            bingo_bonus=int(doc["bingo_bonus"]),
            rack_size=int(doc.get("rack_size", 7)),
            exchange_min_reserve=int(doc.get("exchange_min_reserve", 7)),
            scoreless_turn_limit=int(doc.get("scoreless_turn_limit", 6)),
            center_premium_applies=bool(doc.get("center_premium_applies", True)),
            tile_total=int(doc["tile_total"]) if "tile_total" in doc else None,
        )
    except (KeyError, TypeError, ValueError, IndexError, AttributeError) as exc:
        raise RulesetError("parse_error", f"malformed ruleset field: {exc!r}") from None


def load_ruleset(path: str | Path) -> RuleSet:
    """Load a ruleset file (or a bundled name such as ``"scrabble"``) and validate it."""
    path_str = str(path)
    if path_str in BUNDLED:
        text = resources.files("tilebench.data").joinpath(f"{path_str}.yaml").read_text()
    else:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise RulesetError("file_not_found", str(exc)) from None
    rs = parse_ruleset(text)
    findings = validate_ruleset(rs)
    if findings:
        first = findings[0]
        raise RulesetError(first.code, first.message, field=first.field, findings=findings)
    return rs


def serialize_ruleset(rs: RuleSet) -> str:
    lines = [
        f"format: {FORMAT}",
        f"name: {rs.name}",
    ]
    if rs.tile_total is not None:
        lines.append(f"tile_total: {rs.tile_total}")
    lines += [
        f"rack_size: {rs.rack_size}",
        f"bingo_bonus: {rs.bingo_bonus}",
        f"exchange_min_reserve: {rs.exchange_min_reserve}",
        f"scoreless_turn_limit: {rs.scoreless_turn_limit}",
        f"center_premium_applies: {'true' if rs.center_premium_applies else 'false'}",
        "board: |",
    ]
    lines += ["  " + "".join(p.value for p in row) for row in rs.board]
    lines.append("tiles:")
    for ch in sorted(rs.tile_counts, key=lambda c: ALPHABET.index(c) if c in ALPHABET else 99):
        key = f'"{ch}"' if ch == BLANK else ch
        lines.append(f"  {key}: [{rs.tile_counts[ch]}, {rs.tile_values.get(ch, 0)}]")
    return "\n".join(lines) + "\n"
