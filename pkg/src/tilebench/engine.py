"""Board state, move generation, scoring and game execution.

The hot path (enumerating and scoring every placement for a rack) runs in
:mod:`tilebench._kernels`; this module wraps it in Python types and keeps
an independent pure-Python scorer and legality checker that every applied
move is validated against.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .errors import FormatVersionError, IllegalMoveError, TilebenchError
from .lexicon import Lexicon
from .reservoir import BACK, FRONT, Reservoir, TileSequence
from .ruleset import ALPHABET, BLANK, BLANK_INDEX, BOARD_SIZE, CENTER, RuleSet

ACROSS = "across"
DOWN = "down"
EMPTY = -1
RECORD_FORMAT = "tilebench-record/1"

PLACE = "place"
EXCHANGE = "exchange"
PASS = "pass"


@dataclass(frozen=True)
class Tile:
    letter: str  # A-Z or "?"
    assigned_letter: str | None = None
    points: int = 0


@dataclass(frozen=True)
class Placement:
    """A word laid on the board.

    ``row``/``col`` locate the first square of the full main word (existing
    tiles included). ``tiles`` lists only the newly placed tiles as
    ``(row, col, letter, is_blank)``. In ``word``, letters played by a
    blank are lower case.
    """

    row: int
    col: int
    direction: str
    tiles: tuple[tuple[int, int, str, bool], ...]
    word: str
    score: int

    @property
    def tiles_used(self) -> str:
        return "".join(BLANK if b else ch for _, _, ch, b in self.tiles)

    @property
    def word_formed(self) -> str:
        return self.word

    def __str__(self) -> str:
        r, c = self.row, self.col
        coord = f"{r + 1}{chr(65 + c)}" if self.direction == ACROSS else f"{chr(65 + c)}{r + 1}"
        return f"{coord} {self.word} {self.score}"


@dataclass(frozen=True)
class MoveChoice:
    kind: str
    placement: Placement | None = None
    exchange: tuple[str, ...] = ()

    @classmethod
    def place(cls, placement: Placement) -> MoveChoice:
        return cls(PLACE, placement=placement)

    @classmethod
    def swap(cls, letters: Iterable[str]) -> MoveChoice:
        return cls(EXCHANGE, exchange=tuple(letters))

    @classmethod
    def pass_turn(cls) -> MoveChoice:
        return cls(PASS)


@dataclass
class GameState:
    """Mutable game position; tiles are referred to by their sequence uid."""

    tile_letters: np.ndarray  # letter index (0..26) per uid
    letters: np.ndarray = field(default_factory=lambda: np.full((BOARD_SIZE, BOARD_SIZE), EMPTY, np.int8))
    blanks: np.ndarray = field(default_factory=lambda: np.zeros((BOARD_SIZE, BOARD_SIZE), np.bool_))
    uids: np.ndarray = field(default_factory=lambda: np.full((BOARD_SIZE, BOARD_SIZE), -1, np.int16))
    racks: list[list[int]] = field(default_factory=lambda: [[], []])
    scores: list[int] = field(default_factory=lambda: [0, 0])
    to_move: int = 0
    consecutive_scoreless: int = 0
    bag_remaining: int = 0

    @classmethod
    def empty(cls, sequence: TileSequence | str) -> GameState:
        letters = sequence.letters if isinstance(sequence, TileSequence) else sequence
        return cls(tile_letters=np.array([ALPHABET.index(ch) for ch in letters], dtype=np.int8),
                   bag_remaining=len(letters))

    def rack_letters(self, player: int) -> str:
        return "".join(ALPHABET[self.tile_letters[u]] for u in self.racks[player])

    def rack_counts(self, player: int) -> np.ndarray:
        return rack_to_counts(self.tile_letters[self.racks[player]] if self.racks[player] else [])

    @property
    def board_empty(self) -> bool:
        return not (self.letters >= 0).any()

    def copy(self) -> GameState:
        return GameState(self.tile_letters, self.letters.copy(), self.blanks.copy(), self.uids.copy(),
                         [list(r) for r in self.racks], list(self.scores), self.to_move,
                         self.consecutive_scoreless, self.bag_remaining)

    def render(self) -> str:
        rows = []
        for r in range(BOARD_SIZE):
            cells = []
            for c in range(BOARD_SIZE):
                k = self.letters[r, c]
                cells.append("." if k < 0 else (chr(97 + k) if self.blanks[r, c] else chr(65 + k)))
            rows.append(" ".join(cells))
        return "\n".join(rows)


def rack_to_counts(rack) -> np.ndarray:
    """Rack as a length-27 count vector; accepts a string or letter indices."""
    if isinstance(rack, str):
        idx = [ALPHABET.index(ch) for ch in rack.upper()]
    else:
        idx = list(rack)
    return np.bincount(np.asarray(idx, dtype=np.int64), minlength=27).astype(np.int64)


def _board_arrays(board) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(board, GameState):
        return board.letters, board.blanks
    letters, blanks = board
    return letters, blanks


# --------------------------------------------------------------------------
# Reference scoring and legality (pure Python; independent of the kernel)


def _word_through(letters, new: dict, r: int, c: int, dr: int, dc: int):
    """Squares of the maximal line through (r, c) along (dr, dc)."""
    def filled(rr, cc):
        return 0 <= rr < BOARD_SIZE and 0 <= cc < BOARD_SIZE and ((rr, cc) in new or letters[rr, cc] >= 0)
    while filled(r - dr, c - dc):
        r, c = r - dr, c - dc
    out = []
    while filled(r, c):
        out.append((r, c))
        r, c = r + dr, c + dc
    return out


def _line_score(squares, letters, blanks, new, ruleset: RuleSet) -> int:
    total = 0
    mult = 1
    for sq in squares:
        if sq in new:
            ch, is_blank = new[sq]
            v = 0 if is_blank else ruleset.tile_values[ch]
            prem = ruleset.premium(*sq)
            total += v * prem.letter_multiplier
            mult *= prem.word_multiplier
        else:
            total += 0 if blanks[sq] else ruleset.tile_values[chr(65 + letters[sq])]
    return total * mult


def _line_text(squares, letters, blanks, new) -> str:
    out = []
    for sq in squares:
        if sq in new:
            ch, is_blank = new[sq]
        else:
            ch, is_blank = chr(65 + letters[sq]), bool(blanks[sq])
        out.append(ch.lower() if is_blank else ch)
    return "".join(out)


def formed_words(board, placement: Placement) -> list[list[tuple[int, int]]]:
    """Main word first, then every cross word of length >= 2."""
    letters, _ = _board_arrays(board)
    new = {(r, c): (ch, b) for r, c, ch, b in placement.tiles}
    dr, dc = (0, 1) if placement.direction == ACROSS else (1, 0)
    r0, c0 = placement.tiles[0][:2]
    words = [_word_through(letters, new, r0, c0, dr, dc)]
    for r, c, _, _ in placement.tiles:
        cross = _word_through(letters, new, r, c, dc, dr)
        if len(cross) >= 2:
            words.append(cross)
    return words


def score_move(board, placement: Placement, ruleset: RuleSet) -> int:
    """Score of ``placement`` on ``board`` under standard premium rules.

    Premiums count only on newly covered squares; a play that uses the
    full rack earns the bingo bonus.
    """
    letters, blanks = _board_arrays(board)
    new = {(r, c): (ch, b) for r, c, ch, b in placement.tiles}
    words = formed_words(board, placement)
    total = 0
    for i, sq in enumerate(words):
        if i == 0 or len(sq) >= 2:
            total += _line_score(sq, letters, blanks, new, ruleset)
    if len(placement.tiles) == ruleset.rack_size:
        total += ruleset.bingo_bonus
    return total


def check_placement(state: GameState, placement: Placement, lexicon: Lexicon, ruleset: RuleSet) -> None:
    """Raise IllegalMoveError unless ``placement`` is a legal play on ``state``."""
    def bad(msg):
        raise IllegalMoveError(message=f"{placement}: {msg}")

    tiles = placement.tiles
    if not tiles:
        bad("no tiles placed")
    squares = [(r, c) for r, c, _, _ in tiles]
    if len(set(squares)) != len(squares):
        bad("two tiles on one square")
    for r, c, ch, _ in tiles:
        if not (0 <= r < BOARD_SIZE and 0 <= c < BOARD_SIZE):
            bad("off the board")
        if state.letters[r, c] >= 0:
            bad(f"square ({r},{c}) is occupied")
        if len(ch) != 1 or ch not in ALPHABET[:26]:
            bad(f"bad letter {ch!r}")
    if placement.direction == ACROSS:
        if len({r for r, _ in squares}) != 1:
            bad("tiles not in one row")
    elif placement.direction == DOWN:
        if len({c for _, c in squares}) != 1:
            bad("tiles not in one column")
    else:
        bad(f"bad direction {placement.direction!r}")
    words = formed_words(state, placement)
    main = words[0]
    if not set(squares) <= set(main):
        bad("tiles are not contiguous")
    if len(main) < 2:
        bad("main word shorter than two letters")
    if main[0] != (placement.row, placement.col):
        bad("word start does not match row/col")
    if state.board_empty:
        if CENTER not in squares:
            bad("first move must cover the centre square")
    elif len(words) == 1 and len(main) == len(tiles):
        bad("play does not touch existing tiles")
    new = {(r, c): (ch, b) for r, c, ch, b in tiles}
    text = _line_text(main, state.letters, state.blanks, new)
    if text != placement.word:
        bad(f"word field {placement.word!r} but board spells {text!r}")
    for sq in words:
        w = _line_text(sq, state.letters, state.blanks, new).upper()
        if not lexicon.contains(w):
            bad(f"{w} is not in the lexicon")
    expected = score_move(state, placement, ruleset)
    if expected != placement.score:
        bad(f"score {placement.score} but play is worth {expected}")


# --------------------------------------------------------------------------
# Compiled move generation


@dataclass
class MoveBatch:
    """Placements produced by one kernel call, kept in array form."""

    info: np.ndarray
    codes: np.ndarray
    score: np.ndarray
    leave: np.ndarray
    letters: np.ndarray
    blanks: np.ndarray

    def __len__(self) -> int:
        return len(self.score)

    def tiles_used(self, i: int) -> np.ndarray:
        """Letter indices (26 for blank) of the tiles move ``i`` takes from the rack."""
        row = self.codes[i, :self.info[i, 3]]
        new = row[row >= _kernels.CODE_NEW]
        return np.where(new >= _kernels.CODE_BLANK, BLANK_INDEX, new - _kernels.CODE_NEW)

    def placement(self, i: int) -> Placement:
        r, c, d, length, _ = (int(x) for x in self.info[i])
        dr, dc = (0, 1) if d == 0 else (1, 0)
        tiles = []
        word = []
        for k in range(length):
            code = int(self.codes[i, k])
            rr, cc = r + dr * k, c + dc * k
            if code < _kernels.CODE_NEW:
                ch = chr(65 + code)
                word.append(ch.lower() if self.blanks[rr, cc] else ch)
            elif code < _kernels.CODE_BLANK:
                ch = chr(65 + code - _kernels.CODE_NEW)
                tiles.append((rr, cc, ch, False))
                word.append(ch)
            else:
                ch = chr(65 + code - _kernels.CODE_BLANK)
                tiles.append((rr, cc, ch, True))
                word.append(ch.lower())
        return Placement(r, c, ACROSS if d == 0 else DOWN, tuple(tiles), "".join(word), int(self.score[i]))

    def placements(self) -> list[Placement]:
        return [self.placement(i) for i in range(len(self))]


_ZERO_LEAVE = (np.zeros(27), np.zeros(27), np.zeros(26, np.bool_), np.zeros((8, 8)))


class MoveGenerator:
    """Reusable move generator bound to one ruleset and lexicon."""

    def __init__(self, ruleset: RuleSet, lexicon: Lexicon, capacity: int = 4096):
        self.ruleset = ruleset
        self.lexicon = lexicon
        self._lmul = np.ascontiguousarray(ruleset.letter_multipliers, dtype=np.int32)
        self._wmul = np.ascontiguousarray(ruleset.word_multipliers, dtype=np.int32)
        self._values = np.ascontiguousarray(ruleset.value_array, dtype=np.int32)
        self._alloc(capacity)

    def _alloc(self, capacity: int) -> None:
        self._info = np.zeros((capacity, 5), np.int64)
        self._codes = np.zeros((capacity, BOARD_SIZE), np.int8)
        self._score = np.zeros(capacity, np.int64)
        self._leave = np.zeros(capacity, np.float64)

    def generate(self, letters: np.ndarray, blanks: np.ndarray, rack, leave_params=None) -> MoveBatch:
        """Every legal placement for ``rack`` (letters or 27-count vector)."""
        counts = rack if isinstance(rack, np.ndarray) and rack.shape == (27,) else rack_to_counts(rack)
        counts = np.ascontiguousarray(counts, dtype=np.int64)
        lp = leave_params if leave_params is not None else _ZERO_LEAVE
        lex = self.lexicon
        letters = np.ascontiguousarray(letters, dtype=np.int8)
        blanks = np.ascontiguousarray(blanks, dtype=np.bool_)
        while True:
            n = _kernels.generate_moves(letters, blanks, self._lmul, self._wmul, self._values,
                                        lex.child, lex.terminal, lex.edge_mask, counts,
                                        self.ruleset.rack_size, self.ruleset.bingo_bonus,
                                        lp[0], lp[1], lp[2], lp[3],
                                        self._info, self._codes, self._score, self._leave)
            if n <= len(self._score):
                break
            self._alloc(int(n * 1.25) + 16)
        return MoveBatch(self._info[:n].copy(), self._codes[:n].copy(), self._score[:n].copy(),
                         self._leave[:n].copy(), letters, blanks)


def legal_moves(state: GameState, rack, lexicon: Lexicon, ruleset: RuleSet) -> set[Placement]:
    """All legal placements of ``rack`` (a letter string, ``?`` for blanks)."""
    letters, blanks = _board_arrays(state)
    return set(MoveGenerator(ruleset, lexicon).generate(letters, blanks, rack).placements())


# --------------------------------------------------------------------------
# Applying moves


def end_of(player: int) -> str:
    return FRONT if player == 0 else BACK


def _take_from_rack(rack: list[int], tile_letters: np.ndarray, letter_index: int) -> int:
    for k, uid in enumerate(rack):
        if tile_letters[uid] == letter_index:
            return rack.pop(k)
    raise IllegalMoveError(message=f"rack lacks {ALPHABET[letter_index]}")


def apply_move(state: GameState, move: MoveChoice, reservoir: Reservoir, ruleset: RuleSet,
               lexicon: Lexicon | None = None, game_rng=None, validate: bool = True) -> GameState:
    """Play ``move`` for ``state.to_move``, mutating and returning ``state``.

    Placements are checked against the reference rules first (when a
    lexicon is given and ``validate`` is set); an illegal move raises
    IllegalMoveError rather than being skipped.
    """
    player = state.to_move
    rack = state.racks[player]
    end = end_of(player)
    scored = 0
    if move.kind == PLACE:
        p = move.placement
        if validate and lexicon is not None:
            check_placement(state, p, lexicon, ruleset)
        used = []
        for r, c, ch, is_blank in p.tiles:
            uid = _take_from_rack(rack, state.tile_letters, BLANK_INDEX if is_blank else ord(ch) - 65)
            used.append(uid)
            state.letters[r, c] = ord(ch) - 65
            state.blanks[r, c] = is_blank
            state.uids[r, c] = uid
        scored = p.score
        state.scores[player] += scored
        rack.extend(reservoir.draw(end, ruleset.rack_size - len(rack)))
    elif move.kind == EXCHANGE:
        if not reservoir.can_exchange(len(move.exchange)) or reservoir.remaining() < ruleset.exchange_min_reserve:
            raise IllegalMoveError("exchange_not_allowed",
                                   f"exchange of {len(move.exchange)} with {reservoir.remaining()} in reserve")
        discarded = [_take_from_rack(rack, state.tile_letters, ALPHABET.index(ch)) for ch in move.exchange]
        rack.extend(reservoir.exchange(end, discarded, game_rng))
    elif move.kind != PASS:
        raise IllegalMoveError(message=f"unknown move kind {move.kind!r}")
    state.consecutive_scoreless = state.consecutive_scoreless + 1 if scored == 0 else 0
    state.bag_remaining = reservoir.remaining()
    state.to_move = 1 - player
    return state


# --------------------------------------------------------------------------
# Game records


@dataclass
class MoveRecord:
    player: int
    kind: str
    score: int = 0
    row: int | None = None
    col: int | None = None
    direction: str | None = None
    word: str | None = None
    tiles: list | None = None
    exchanged: str | None = None
    insertions: list[int] | None = None
    rack_before: str = ""
    drawn: str = ""
    audit_margin: float | None = None

    def placement(self) -> Placement:
        return Placement(self.row, self.col, self.direction,
                         tuple((int(r), int(c), ch, bool(b)) for r, c, ch, b in self.tiles),
                         self.word, self.score)

    def choice(self) -> MoveChoice:
        if self.kind == PLACE:
            return MoveChoice.place(self.placement())
        if self.kind == EXCHANGE:
            return MoveChoice.swap(self.exchanged)
        return MoveChoice.pass_turn()


@dataclass
class GameRecord:
    ruleset: str
    order_id: int
    replicate_id: int
    seed: int | None
    sequence: str
    moves: list[MoveRecord]
    final_scores: tuple[int, int]
    end_reason: str
    end_adjustments: tuple[int, int]
    draws: tuple[list[int], list[int]]  # tile uids drawn per player, in order
    end_assignment: tuple[str, str] = (FRONT, BACK)

    @property
    def diff(self) -> int:
        return self.final_scores[0] - self.final_scores[1]

    def drawn_letters(self, player: int) -> str:
        return "".join(self.sequence[u] for u in self.draws[player])

    def exposure(self, player: int = 0) -> dict[str, int]:
        """Distinct tiles of each letter the player drew at any point."""
        counts = dict.fromkeys(ALPHABET, 0)
        for u in set(self.draws[player]):
            counts[self.sequence[u]] += 1
        return counts

    def played(self, player: int = 0) -> dict[str, int]:
        counts = dict.fromkeys(ALPHABET, 0)
        for m in self.moves:
            if m.player == player and m.kind == PLACE:
                for _, _, ch, b in m.tiles:
                    counts[BLANK if b else ch] += 1
        return counts

    def tiles_available(self, player: int) -> int:
        return len(set(self.draws[player]))

    def bingos(self, player: int) -> int:
        return sum(1 for m in self.moves if m.player == player and m.kind == PLACE and len(m.tiles) == 7)

    def exchanges(self, player: int) -> int:
        return sum(1 for m in self.moves if m.player == player and m.kind == EXCHANGE)

    def audit_margins(self) -> list[float]:
        return [m.audit_margin for m in self.moves if m.audit_margin is not None]

    # serialization: one JSON object per line

    def to_lines(self) -> list[str]:
        head = {"format": RECORD_FORMAT, "type": "game", "ruleset": self.ruleset,
                "order_id": self.order_id, "replicate_id": self.replicate_id, "seed": self.seed,
                "sequence": self.sequence, "end_assignment": list(self.end_assignment)}
        lines = [json.dumps(head)]
        for m in self.moves:
            d = {"type": "move", **{k: v for k, v in asdict(m).items() if v is not None}}
            lines.append(json.dumps(d))
        tail = {"type": "result", "final_scores": list(self.final_scores), "end_reason": self.end_reason,
                "end_adjustments": list(self.end_adjustments),
                "draws": [list(self.draws[0]), list(self.draws[1])]}
        lines.append(json.dumps(tail))
        return lines

    def save(self, path: str | Path) -> None:
        Path(path).write_text("\n".join(self.to_lines()) + "\n")

    @classmethod
    def from_lines(cls, lines: Iterable[str]) -> GameRecord:
        rows = [json.loads(line) for line in lines if line.strip()]
        if not rows or rows[0].get("format") != RECORD_FORMAT:
            raise FormatVersionError(message=f"expected {RECORD_FORMAT}")
        head, tail = rows[0], rows[-1]
        if tail.get("type") != "result":
            raise TilebenchError("corrupt_record", "game record has no result line")
        moves = []
        for row in rows[1:-1]:
            row = {k: v for k, v in row.items() if k != "type"}
            moves.append(MoveRecord(**row))
        return cls(head["ruleset"], head["order_id"], head["replicate_id"], head["seed"], head["sequence"],
                   moves, tuple(tail["final_scores"]), tail["end_reason"], tuple(tail["end_adjustments"]),
                   (tail["draws"][0], tail["draws"][1]), tuple(head.get("end_assignment", (FRONT, BACK))))

    @classmethod
    def load(cls, path: str | Path) -> GameRecord:
        return cls.from_lines(Path(path).read_text().splitlines())


# --------------------------------------------------------------------------
# Game loop


class ScriptedRng:
    """Stand-in RNG that replays recorded exchange insertion gaps."""

    def __init__(self, values: Sequence[int]):
        self._values = list(values)

    def integers(self, low, high):
        v = self._values.pop(0)
        if not low <= v < high:
            raise TilebenchError("corrupt_record", f"insertion gap {v} outside [{low}, {high})")
        return v


def _finish(state: GameState, ruleset: RuleSet, reason: str, mover: int | None) -> tuple[int, int]:
    rack_value = [sum(int(ruleset.value_array[state.tile_letters[u]]) for u in state.racks[p]) for p in (0, 1)]
    adj = [0, 0]
    if reason == "played_out":
        other = 1 - mover
        adj[mover] += rack_value[other]
        adj[other] -= rack_value[other]
    else:
        adj = [-rack_value[0], -rack_value[1]]
    state.scores[0] += adj[0]
    state.scores[1] += adj[1]
    return adj[0], adj[1]


def play_game(ruleset: RuleSet, lexicon: Lexicon, reservoir: Reservoir, bot1, bot2,
              game_rng: np.random.Generator, order_id: int = 0, replicate_id: int = 0,
              seed: int | None = None, generator: MoveGenerator | None = None,
              validate: bool = True, max_turns: int = 500) -> GameRecord:
    """Play one game to completion and return its record.

    Bots expose ``choose(state, generator, rng) -> MoveChoice`` and may set
    ``last_audit_margin`` (max raw utility minus the chosen one).
    """
    gen = generator or MoveGenerator(ruleset, lexicon)
    state = GameState.empty(reservoir.sequence)
    for p in (0, 1):
        state.racks[p] = reservoir.draw(end_of(p), ruleset.rack_size)
    state.bag_remaining = reservoir.remaining()
    bots = (bot1, bot2)
    moves: list[MoveRecord] = []
    reason = None
    mover = None
    for _ in range(max_turns):
        p = state.to_move
        rack_before = state.rack_letters(p)
        drawn_before = len(reservoir.drawn[end_of(p)])
        bot = bots[p]
        choice = bot.choose(state, gen, game_rng)
        margin = getattr(bot, "last_audit_margin", None)
        try:
            apply_move(state, choice, reservoir, ruleset, lexicon, game_rng, validate=validate)
        except TilebenchError as exc:
            raise IllegalMoveError(exc.category, f"player {p + 1}, rack {rack_before}: {exc}") from exc
        drawn = reservoir.letters(reservoir.drawn[end_of(p)][drawn_before:])
        rec = MoveRecord(player=p, kind=choice.kind, rack_before=rack_before, drawn=drawn,
                         audit_margin=None if margin is None else float(margin))
        if choice.kind == PLACE:
            pl = choice.placement
            rec.score, rec.row, rec.col, rec.direction, rec.word = pl.score, pl.row, pl.col, pl.direction, pl.word
            rec.tiles = [list(t) for t in pl.tiles]
        elif choice.kind == EXCHANGE:
            rec.exchanged = "".join(choice.exchange)
            rec.insertions = list(reservoir.last_insertions)
        moves.append(rec)
        if not state.racks[p] and reservoir.remaining() == 0:
            reason, mover = "played_out", p
            break
        if state.consecutive_scoreless >= ruleset.scoreless_turn_limit:
            reason = "scoreless_turns"
            break
    else:
        reason = "turn_limit"
    adj = _finish(state, ruleset, reason, mover)
    return GameRecord(ruleset.name, order_id, replicate_id, seed, reservoir.sequence.letters, moves,
                      (state.scores[0], state.scores[1]), reason, adj,
                      (list(reservoir.drawn[FRONT]), list(reservoir.drawn[BACK])))


def replay(record: GameRecord, ruleset: RuleSet, lexicon: Lexicon | None = None,
           on_move=None) -> GameState:
    """Re-apply a record's moves from its initial sequence; returns the final state.

    Every placement is re-validated (when a lexicon is given) and
    re-scored; the final state's scores include end-of-game adjustments.
    """
    res = Reservoir(TileSequence(record.sequence, record.order_id),
                    exchange_min_reserve=ruleset.exchange_min_reserve)
    state = GameState.empty(res.sequence)
    for p in (0, 1):
        state.racks[p] = res.draw(end_of(p), ruleset.rack_size)
    state.bag_remaining = res.remaining()
    for m in record.moves:
        if m.player != state.to_move:
            raise TilebenchError("corrupt_record", "move out of turn order")
        choice = m.choice()
        if choice.kind == PLACE:
            expected = score_move(state, choice.placement, ruleset)
            if expected != m.score:
                raise TilebenchError("corrupt_record", f"{choice.placement}: recomputed score {expected}")
        apply_move(state, choice, res, ruleset, lexicon, ScriptedRng(m.insertions or []),
                   validate=lexicon is not None)
        if on_move is not None:
            on_move(m, state)
    mover = record.moves[-1].player if record.end_reason == "played_out" else None
    _finish(state, ruleset, record.end_reason, mover)
    return state
