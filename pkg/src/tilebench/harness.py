"""Two-level simulation experiment: many tile orders, each replayed many times.

Every game's randomness comes from a seed derived by BLAKE2b from
``(master_seed, order_id, replicate_id)``, and every tile order from
``(master_seed, order_id)``, so results do not depend on the number of
workers or on the order in which games finish. Completed orders are
appended to ``<output>.partial`` as they arrive; rerunning the same
config resumes from that file.

Output CSV (first line ``# tilebench-outcomes/1``), one row per game:

=====================  ===================================================
order_id, replicate_id  experiment coordinates
seed                    per-game seed
status, error           ``ok`` or ``aborted`` with a diagnostic
p1_score, p2_score      final scores after end-of-game adjustments
diff, winner            ``p1_score - p2_score``; 1, 2 or 0 for a tie
end_reason              ``played_out``, ``scoreless_turns`` or ``turn_limit``
n_moves                 turns taken
p1_bingos, p2_bingos    plays using all seven tiles
p1_exchanges, ...       exchanges per player
p1_tiles_available ..   distinct tiles each player drew
blank1_pos, blank2_pos  0-based positions of the blanks in the tile order
s_positions             0-based S positions, ``;``-separated
p1_drawn_<L>            distinct tiles of letter L drawn by player 1
                        (``blank`` for the blank)
p1_played_<L>           tiles of letter L played by player 1
audit_max_margin        largest (best raw utility - chosen raw utility)
audit_violations        selections at least 2 points below the best
=====================  ===================================================
"""

from __future__ import annotations

import hashlib
import io
import json
import logging
import multiprocessing
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from .bot import BotConfig, SpeedyBot, load_leave_table
from .engine import GameRecord, MoveGenerator, play_game
from .errors import FormatVersionError, TilebenchError
from .lexicon import load_any
from .reservoir import Reservoir, TileSequence, generate_sequence
from .ruleset import ALPHABET, BLANK, load_ruleset

log = logging.getLogger(__name__)

CSV_FORMAT = "tilebench-outcomes/1"
AUDIT_GAP = 2.0
LETTER_COLUMNS = [ch if ch != BLANK else "blank" for ch in ALPHABET]


@dataclass(frozen=True)
class BotSettings:
    leave_table: str | None = None
    perturbation_half_width: float = 1.0
    openness_weight: float = 0.0
    exchange_threshold: float = 2.0

    def build(self) -> BotConfig:
        return BotConfig(load_leave_table(self.leave_table), self.perturbation_half_width,
                         self.openness_weight, self.exchange_threshold)


@dataclass(frozen=True)
class ExperimentConfig:
    ruleset: str = "scrabble"
    lexicon: str = "enable"
    n_orders: int = 200
    replicates_per_order: int = 20
    master_seed: int = 0
    bot1: BotSettings = field(default_factory=BotSettings)
    bot2: BotSettings = field(default_factory=BotSettings)
    workers: int = 1
    output: str | None = None
    audit: bool = False
    validate_moves: bool = False
    records_dir: str | None = None

    def __post_init__(self):
        if self.n_orders < 1 or self.replicates_per_order < 1:
            raise ValueError("n_orders and replicates_per_order must be >= 1")

    def identity(self) -> dict:
        """Fields that determine the results (workers and paths excluded)."""
        d = asdict(self)
        for k in ("workers", "output", "records_dir"):
            d.pop(k)
        return d

    def fingerprint(self) -> str:
        return hashlib.sha256(json.dumps(self.identity(), sort_keys=True).encode()).hexdigest()[:16]


@dataclass
class OutcomeTable:
    metadata: dict
    frame: pd.DataFrame
    sequences: dict[int, str] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.frame)

    @property
    def ok(self) -> pd.DataFrame:
        return self.frame[self.frame["status"] == "ok"]

    @property
    def n_aborted(self) -> int:
        return int((self.frame["status"] != "ok").sum())

    def by_order(self):
        return self.ok.groupby("order_id")

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        buf.write(f"# {CSV_FORMAT}\n")
        self.frame.to_csv(buf, index=False, lineterminator="\n")
        return buf.getvalue()

    def write(self, path: str | Path) -> None:
        path = Path(path)
        path.write_text(self.to_csv_text())
        meta = dict(self.metadata, format=CSV_FORMAT, n_rows=len(self.frame), n_aborted=self.n_aborted)
        Path(str(path) + ".meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
        if self.sequences:
            Path(str(path) + ".orders.txt").write_text(
                "".join(f"{k}\t{v}\n" for k, v in sorted(self.sequences.items())))


def read_outcomes(path: str | Path) -> OutcomeTable:
    path = Path(path)
    with open(path) as fh:
        first = fh.readline().strip()
    if first != f"# {CSV_FORMAT}":
        raise FormatVersionError(message=f"{path}: expected header '# {CSV_FORMAT}', got {first[:40]!r}")
    frame = pd.read_csv(path, comment=None, skiprows=1, keep_default_na=False, na_values=[""],
                        dtype={"s_positions": str, "error": str})
    frame["s_positions"] = frame["s_positions"].fillna("")
    frame["error"] = frame["error"].fillna("")
    meta_path = Path(str(path) + ".meta.json")
    meta = json.loads(meta_path.read_text()) if meta_path.exists() else {}
    seq_path = Path(str(path) + ".orders.txt")
    sequences = {}
    if seq_path.exists():
        for line in seq_path.read_text().splitlines():
            k, v = line.split("\t")
            sequences[int(k)] = v
    return OutcomeTable(meta, frame, sequences)


# --------------------------------------------------------------------------
# Seeds


def derive_seed(master_seed: int, *parts) -> int:
    """Stable 63-bit seed from BLAKE2b over ``master_seed/part/part...``."""
    text = "/".join(str(p) for p in (master_seed, *parts))
    return int.from_bytes(hashlib.blake2b(text.encode(), digest_size=8).digest(), "little") >> 1


def order_sequence(ruleset, master_seed: int, order_id: int) -> TileSequence:
    rng = np.random.default_rng(derive_seed(master_seed, "order", order_id))
    return generate_sequence(ruleset, rng, order_id)


# --------------------------------------------------------------------------
# Per-game outcome rows


def outcome_row(record: GameRecord, audit: bool = False) -> dict:
    seq = record.sequence
    blanks = [i for i, ch in enumerate(seq) if ch == BLANK]
    row = {
        "order_id": record.order_id,
        "replicate_id": record.replicate_id,
        "seed": record.seed,
        "status": "ok",
        "error": "",
        "p1_score": record.final_scores[0],
        "p2_score": record.final_scores[1],
        "diff": record.diff,
        "winner": 1 if record.diff > 0 else (2 if record.diff < 0 else 0),
        "end_reason": record.end_reason,
        "n_moves": len(record.moves),
        "p1_bingos": record.bingos(0),
        "p2_bingos": record.bingos(1),
        "p1_exchanges": record.exchanges(0),
        "p2_exchanges": record.exchanges(1),
        "p1_tiles_available": record.tiles_available(0),
        "p2_tiles_available": record.tiles_available(1),
        "blank1_pos": blanks[0] if blanks else -1,
        "blank2_pos": blanks[1] if len(blanks) > 1 else -1,
        "s_positions": ";".join(str(i) for i, ch in enumerate(seq) if ch == "S"),
    }
    drawn = record.exposure(0)
    played = record.played(0)
    for ch, name in zip(ALPHABET, LETTER_COLUMNS):
        row[f"p1_drawn_{name}"] = drawn[ch]
    for ch, name in zip(ALPHABET, LETTER_COLUMNS):
        row[f"p1_played_{name}"] = played[ch]
    margins = record.audit_margins()
    row["audit_max_margin"] = round(max(margins), 9) if (audit and margins) else 0.0
    row["audit_violations"] = sum(1 for m in margins if m >= AUDIT_GAP) if audit else 0
    return row


def aborted_row(order_id: int, replicate_id: int, seed: int, error: str) -> dict:
    return {"order_id": order_id, "replicate_id": replicate_id, "seed": seed, "status": "aborted",
            "error": error.replace("\n", " ")}


# --------------------------------------------------------------------------
# Workers

_CTX: dict = {}


def _init_worker(config: ExperimentConfig) -> None:
    key = (config.ruleset, config.lexicon)
    if _CTX.get("key") != key:
        ruleset = load_ruleset(config.ruleset)
        lexicon = load_any(config.lexicon)
        _CTX.update(key=key, ruleset=ruleset, lexicon=lexicon, gen=MoveGenerator(ruleset, lexicon))
    _CTX["config"] = config
    _CTX["bots"] = (config.bot1.build(), config.bot2.build())


def _run_order(order_id: int) -> tuple[int, str, list[dict]]:
    config: ExperimentConfig = _CTX["config"]
    ruleset, lexicon, gen = _CTX["ruleset"], _CTX["lexicon"], _CTX["gen"]
    seq = order_sequence(ruleset, config.master_seed, order_id)
    rows = []
    for rep in range(config.replicates_per_order):
        seed = derive_seed(config.master_seed, "game", order_id, rep)
        bots = [SpeedyBot(cfg, audit=config.audit) for cfg in _CTX["bots"]]
        res = Reservoir(seq, exchange_min_reserve=ruleset.exchange_min_reserve)
        try:
            rec = play_game(ruleset, lexicon, res, bots[0], bots[1], np.random.default_rng(seed),
                            order_id=order_id, replicate_id=rep, seed=seed, generator=gen,
                            validate=config.validate_moves)
        except TilebenchError as exc:
            log.warning("order %d replicate %d aborted: %s", order_id, rep, exc)
            rows.append(aborted_row(order_id, rep, seed, str(exc)))
            continue
        if config.records_dir:
            rec.save(Path(config.records_dir) / f"game_{order_id:06d}_{rep:04d}.rec")
        rows.append(outcome_row(rec, config.audit))
    return order_id, seq.letters, rows


def _read_partial(path: Path, fingerprint: str) -> dict[int, tuple[str, list[dict]]]:
    done: dict[int, tuple[str, list[dict]]] = {}
    if not path.exists():
        return done
    lines = path.read_text().split("\n")
    if not lines or not lines[0]:
        return done
    head = json.loads(lines[0])
    if head.get("fingerprint") != fingerprint:
        log.info("ignoring %s: written by a different config", path)
        return done
    for line in lines[1:]:
        try:
            chunk = json.loads(line)
        except json.JSONDecodeError:
            continue  # unterminated last chunk from an interrupted run
        done[int(chunk["order_id"])] = (chunk["sequence"], chunk["rows"])
    return done


def run_experiment(config: ExperimentConfig, stop_after: int | None = None,
                   progress: bool = False) -> OutcomeTable:
    """Play every (order, replicate) game of ``config`` and collect the outcomes.

    ``stop_after`` ends the run (as an interruption would) once that many
    new orders have been completed; the returned table is then partial.
    """
    partial = Path(config.output + ".partial") if config.output else None
    fp = config.fingerprint()
    if config.output and Path(config.output).exists() and Path(config.output + ".meta.json").exists():
        existing = read_outcomes(config.output)
        if existing.metadata.get("fingerprint") == fp and existing.metadata.get("complete"):
            return existing
    done = _read_partial(partial, fp) if partial else {}
    pending = [k for k in range(config.n_orders) if k not in done]
    if config.records_dir:
        Path(config.records_dir).mkdir(parents=True, exist_ok=True)

    fh = None
    if partial:
        fresh = not done
        fh = open(partial, "w" if fresh else "a")
        if fresh:
            fh.write(json.dumps({"format": CSV_FORMAT, "fingerprint": fp}) + "\n")
            fh.flush()

    def consume(results):
        n_new = 0
        for order_id, letters, rows in results:
            done[order_id] = (letters, rows)
            if fh:
                fh.write(json.dumps({"order_id": order_id, "sequence": letters, "rows": rows}) + "\n")
                fh.flush()
            n_new += 1
            if progress:
                print(f"\r{len(done)}/{config.n_orders} orders", end="", flush=True)
            if stop_after is not None and n_new >= stop_after:
                return False
        return True

    completed = True
    try:
        if config.workers <= 1 or len(pending) <= 1:
            _init_worker(config)
            completed = consume(_run_order(k) for k in pending)
        else:
            ctx = multiprocessing.get_context("fork")
            with ctx.Pool(config.workers, initializer=_init_worker, initargs=(config,)) as pool:
                completed = consume(pool.imap_unordered(_run_order, pending))
                if not completed:
                    pool.terminate()
    finally:
        if fh:
            fh.close()
        if progress:
            print()

    rows = [r for k in sorted(done) for r in sorted(done[k][1], key=lambda r: r["replicate_id"])]
    frame = pd.DataFrame(rows)
    if "audit_violations" in frame:
        int_cols = [c for c in frame.columns if c not in ("status", "error", "end_reason", "s_positions",
                                                          "audit_max_margin")]
        frame[int_cols] = frame[int_cols].fillna(-1).astype(np.int64)
    meta = {"config": config.identity(), "fingerprint": fp, "complete": len(done) == config.n_orders}
    table = OutcomeTable(meta, frame, {k: v[0] for k, v in done.items()})
    if config.output and meta["complete"]:
        table.write(config.output)
        if partial and partial.exists():
            partial.unlink()
    return table


def summarize_orders(table: OutcomeTable | pd.DataFrame) -> pd.DataFrame:
    """Per-order mean, variance and sd of p1_score and diff.

    Variances use the unbiased (n - 1) estimator and are NaN, with
    ``variance_defined`` False, for orders with a single replicate.
    """
    frame = table.ok if isinstance(table, OutcomeTable) else table
    g = frame.groupby("order_id")
    out = pd.DataFrame({"n": g.size()})
    for m in ("p1_score", "diff"):
        out[f"{m}_mean"] = g[m].mean()
        out[f"{m}_var"] = g[m].var(ddof=1)
        out[f"{m}_sd"] = np.sqrt(out[f"{m}_var"])
    out["variance_defined"] = out["n"] >= 2
    return out


def default_workers() -> int:
    return int(os.environ.get("TILEBENCH_WORKERS", "1"))
