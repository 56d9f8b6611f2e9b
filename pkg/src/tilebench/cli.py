"""Command-line entry point: ``tilebench <command> ...``.

Exit codes: 0 success, 1 unexpected error, 2 usage error, 3 invalid input
file (ruleset, lexicon, record, outcome table or version mismatch),
4 simulation aborted games, 5 analysis error. Errors are reported on
stderr as ``error: <category>: <message>``.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import (AnalysisError, FormatVersionError, IllegalMoveError, LexiconError, RulesetError,
                     TilebenchError)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_ABORTED = 4
EXIT_ANALYSIS = 5

INPUT_CATEGORIES = {"parse_error", "corrupt_record", "corrupt_lexicon", "file_not_found"}


def exit_code_for(exc: TilebenchError) -> int:
    if isinstance(exc, (RulesetError, LexiconError, FormatVersionError)) or exc.category in INPUT_CATEGORIES:
        return EXIT_INPUT
    if isinstance(exc, IllegalMoveError):
        return EXIT_ABORTED
    if isinstance(exc, AnalysisError):
        return EXIT_ANALYSIS
    return EXIT_ERROR


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return None if np.isnan(o) else float(o)
    raise TypeError(type(o))


def _clean(o):
    """NaN -> None so the JSON output stays standard."""
    if isinstance(o, float) and np.isnan(o):
        return None
    if isinstance(o, dict):
        return {str(k): _clean(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_clean(v) for v in o]
    return o


def _emit(summary: dict, out_dir: Path | None, name: str) -> None:
    text = json.dumps(_clean(summary), indent=2, sort_keys=True, default=_json_default) + "\n"
    sys.stdout.write(text)
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / f"{name}.json").write_text(text)


# --------------------------------------------------------------------------
# Commands


def cmd_lexicon_build(args) -> int:
    from .lexicon import build_lexicon, read_wordlist, save_lexicon
    lex = build_lexicon(read_wordlist(args.wordlist))
    save_lexicon(lex, args.output)
    r = lex.report
    print(f"{lex.word_count} words, {lex.node_count} nodes, {lex.edge_count} edges "
          f"(rejected {r.rejected_length} by length, {r.duplicates} duplicates) -> {args.output}")
    return EXIT_OK


def cmd_ruleset_validate(args) -> int:
    from .ruleset import parse_ruleset, validate_ruleset, BUNDLED
    from importlib import resources
    if args.path in BUNDLED:
        text = resources.files("tilebench.data").joinpath(f"{args.path}.yaml").read_text()
    else:
        try:
            text = Path(args.path).read_text()
        except OSError as exc:
            raise RulesetError("file_not_found", str(exc)) from None
    rs = parse_ruleset(text)
    findings = validate_ruleset(rs)
    for f in findings:
        print(f"{f.code}\t{f.field}\t{f.message}")
    if findings:
        print(f"error: invalid_ruleset: {len(findings)} finding(s)", file=sys.stderr)
        return EXIT_INPUT
    print(f"{rs.name}: ok ({rs.total_tiles} tiles, bingo bonus {rs.bingo_bonus})")
    return EXIT_OK


def _bot_settings(args):
    from .harness import BotSettings
    return BotSettings(args.leave_table, args.perturb, args.openness, args.exchange_threshold)


def cmd_simulate(args) -> int:
    from .harness import ExperimentConfig, run_experiment
    bot = _bot_settings(args)
    cfg = ExperimentConfig(ruleset=args.ruleset, lexicon=args.lexicon, n_orders=args.orders,
                           replicates_per_order=args.reps, master_seed=args.seed, bot1=bot, bot2=bot,
                           workers=args.workers, output=args.output, audit=args.audit,
                           validate_moves=args.validate, records_dir=args.records)
    if not args.resume:
        Path(args.output + ".partial").unlink(missing_ok=True)
    table = run_experiment(cfg, progress=args.progress)
    ok = table.ok
    print(f"{len(ok)} games ({table.n_aborted} aborted) -> {args.output}")
    if len(ok):
        print(f"mean p1_score {ok['p1_score'].mean():.2f}, mean p2_score {ok['p2_score'].mean():.2f}, "
              f"mean diff {ok['diff'].mean():.2f}")
    if args.audit:
        print(f"audit: {int(ok['audit_violations'].sum())} selections >= 2 points below the best, "
              f"largest margin {ok['audit_max_margin'].max():.4f}")
    if table.n_aborted:
        print(f"error: illegal_move: {table.n_aborted} game(s) aborted; see the error column",
              file=sys.stderr)
        return EXIT_ABORTED
    return EXIT_OK


def cmd_replay(args) -> int:
    from .engine import GameRecord, replay
    from .lexicon import load_any
    from .ruleset import load_ruleset
    rec = GameRecord.load(args.record)
    rs = load_ruleset(args.ruleset or rec.ruleset)
    lex = None if args.no_validate else load_any(args.lexicon)

    def show(m, state):
        if args.moves:
            print(f"P{m.player + 1} {m.kind:8s} {m.word or m.exchanged or '':15s} {m.score:4d}  "
                  f"{state.scores[0]:4d} {state.scores[1]:4d}")

    state = replay(rec, rs, lex, on_move=show)
    final = (state.scores[0], state.scores[1])
    print(f"final scores {final[0]} {final[1]} ({rec.end_reason})")
    if final != tuple(rec.final_scores):
        print(f"error: replay_mismatch: record stores {tuple(rec.final_scores)}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


def _load_table(path):
    from .harness import read_outcomes
    return read_outcomes(path)


def cmd_decompose(args) -> int:
    from .analysis import balance_table, null_between_fractions, sd_histogram, variance_decomposition
    table = _load_table(args.table)
    frame = balance_table(table) if args.rebalance else table
    summary = {"n_aborted": table.n_aborted}
    for metric in args.metric:
        res = variance_decomposition(frame, metric)
        d = res.as_dict()
        d["identity_holds"] = bool(res.identity_error <= 1e-9)
        if args.shuffles:
            null = null_between_fractions(frame, metric, args.shuffles, seed=args.seed)
            d["null_fraction_mean"] = float(null.mean())
            d["null_fraction_q99"] = float(np.quantile(null, 0.99))
        hist = sd_histogram(frame, metric, bins=args.bins)
        d["sd_histogram"] = {"counts": hist["counts"], "edges": hist["edges"], "between_sd": hist["between_sd"]}
        summary[metric] = d
    _emit(summary, args.out_dir, "decompose")
    return EXIT_OK


def cmd_advantage(args) -> int:
    from .analysis import first_player_advantage, within_sd_quantiles
    table = _load_table(args.table)
    adv = first_player_advantage(table, args.metric[0])
    summary = dict(adv.__dict__)
    summary["within_sd_quantiles"] = {m: within_sd_quantiles(table, m) for m in ("diff", "p1_score")}
    _emit(summary, args.out_dir, "advantage")
    return EXIT_OK


def cmd_blanks(args) -> int:
    from .analysis import blank_decile_table
    table = _load_table(args.table)
    grid = blank_decile_table(table, table.sequences or None, args.metric[0], args.min_count)
    if args.out_dir:
        args.out_dir.mkdir(parents=True, exist_ok=True)
        grid.to_frame().to_csv(args.out_dir / "blank_deciles.csv", index=False, lineterminator="\n")
    _emit({"metric": grid.metric, "min_count": grid.min_count, "front_half_contrast": grid.contrast,
           "front_half_contrast_se": grid.contrast_se, "mean": grid.masked_mean(), "count": grid.count},
          args.out_dir, "blanks")
    return EXIT_OK


def cmd_sletters(args) -> int:
    from .analysis import s_position_table
    table = _load_table(args.table)
    st = s_position_table(table, table.sequences or None, args.metric[0], args.min_count)
    if args.out_dir:
        args.out_dir.mkdir(parents=True, exist_ok=True)
        st.to_frame().to_csv(args.out_dir / "s_positions.csv", index=False, lineterminator="\n")
    _emit({"metric": st.metric, "min_count": st.min_count, "adjacent_gaps_cols_31_50": st.adjacent_gaps(),
           "mean": np.where(st.mask, np.nan, st.mean), "count": st.count}, args.out_dir, "sletters")
    return EXIT_OK


def cmd_regress(args) -> int:
    from .analysis import tile_effects, tile_regression
    table = _load_table(args.table)
    if args.letter:
        rows = {m: tile_regression(table, args.letter, m, args.exposure).__dict__ for m in args.metric}
        _emit(rows, args.out_dir, f"regress_{args.letter}")
        return EXIT_OK
    frames = {m: tile_effects(table, m, args.exposure) for m in args.metric}
    if args.out_dir:
        args.out_dir.mkdir(parents=True, exist_ok=True)
        for m, f in frames.items():
            f.to_csv(args.out_dir / f"tile_effects_{m}.csv", lineterminator="\n")
    _emit({m: f[["slope", "se", "mean_exposure"]].to_dict(orient="index") for m, f in frames.items()},
          args.out_dir, "regress")
    return EXIT_OK


def cmd_compare(args) -> int:
    from .analysis import compare_rulesets
    a, b = _load_table(args.scrabble), _load_table(args.wwf)
    cmp = compare_rulesets(a, b, args.metric[0])
    if args.out_dir:
        args.out_dir.mkdir(parents=True, exist_ok=True)
        cmp.to_csv(args.out_dir / "compare.csv", lineterminator="\n")
    _emit({"metric": args.metric[0], "mean_p1_score": {"scrabble": float(a.ok["p1_score"].mean()),
                                                         "wwf": float(b.ok["p1_score"].mean())},
           "letters": cmp.to_dict(orient="index")}, args.out_dir, "compare")
    return EXIT_OK


# --------------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    from .harness import default_workers
    p = argparse.ArgumentParser(prog="tilebench", description="Crossword-game simulation and tile-luck analysis.")
    p.add_argument("--version", action="version", version=f"tilebench {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    lx = sub.add_parser("lexicon", help="word-list utilities").add_subparsers(dest="action", required=True)
    b = lx.add_parser("build", help="compile a word list into a binary lexicon")
    b.add_argument("wordlist", help="one word per line (.gz allowed)")
    b.add_argument("-o", "--output", required=True, help="binary lexicon file to write")
    b.set_defaults(func=cmd_lexicon_build)

    rs = sub.add_parser("ruleset", help="ruleset utilities").add_subparsers(dest="action", required=True)
    v = rs.add_parser("validate", help="check a ruleset file and list every finding")
    v.add_argument("path", help="ruleset file, or a bundled name (scrabble, wwf)")
    v.set_defaults(func=cmd_ruleset_validate)

    s = sub.add_parser("simulate", help="run an orders x replicates experiment")
    s.add_argument("--ruleset", default="scrabble", help="ruleset file or bundled name (default scrabble)")
    s.add_argument("--lexicon", default="enable",
                   help="binary lexicon, word list, or 'enable' for the bundled list (default)")
    s.add_argument("--orders", type=int, default=200, help="number of tile orders (default 200)")
    s.add_argument("--reps", type=int, default=20, help="games per tile order (default 20)")
    s.add_argument("--seed", type=int, default=0, help="master seed; all randomness derives from it")
    s.add_argument("--workers", type=int, default=default_workers(),
                   help="worker processes (default $TILEBENCH_WORKERS or 1)")
    s.add_argument("-o", "--output", required=True, help="outcome CSV to write")
    s.add_argument("--leave-table", default=None, help="leave table file (default: bundled)")
    s.add_argument("--perturb", type=float, default=1.0, help="utility perturbation half-width (default 1)")
    s.add_argument("--openness", type=float, default=0.0, help="weight of the board-openness term (default 0)")
    s.add_argument("--exchange-threshold", type=float, default=2.0,
                   help="consider exchanging when no play reaches this utility (default 2)")
    s.add_argument("--audit", action="store_true", help="record selection margins for every move")
    s.add_argument("--validate", action="store_true", help="re-check every bot move with the reference checker")
    s.add_argument("--records", default=None, help="directory for per-game records")
    s.add_argument("--no-resume", dest="resume", action="store_false",
                   help="discard any partial results from an earlier run")
    s.add_argument("--progress", action="store_true", help="print a running order counter")
    s.set_defaults(func=cmd_simulate)

    r = sub.add_parser("replay", help="replay a game record and check its final scores")
    r.add_argument("record", help="game record file")
    r.add_argument("--ruleset", default=None, help="ruleset (default: the one named in the record)")
    r.add_argument("--lexicon", default="enable", help="lexicon used to re-check each play")
    r.add_argument("--no-validate", action="store_true", help="skip dictionary checks")
    r.add_argument("--moves", action="store_true", help="print every move")
    r.set_defaults(func=cmd_replay)

    an = sub.add_parser("analyze", help="estimators over an outcome CSV").add_subparsers(dest="action", required=True)

    def common(q, metrics=("p1_score",), table=True):
        if table:
            q.add_argument("table", help="outcome CSV written by simulate")
        q.add_argument("--metric", nargs="+", default=list(metrics), help=f"metric column(s) (default {' '.join(metrics)})")
        q.add_argument("--out-dir", type=Path, default=None, help="directory for CSV and JSON outputs")

    d = an.add_parser("decompose", help="between/within-order variance decomposition")
    common(d, ("p1_score", "diff"))
    d.add_argument("--shuffles", type=int, default=0, help="label shuffles for a null calibration (default 0)")
    d.add_argument("--seed", type=int, default=0, help="seed for the shuffles")
    d.add_argument("--bins", type=int, default=30, help="bins for the within-order sd histogram")
    d.add_argument("--rebalance", action="store_true", help="trim orders to a common replicate count first")
    d.set_defaults(func=cmd_decompose)

    a = an.add_parser("advantage", help="first-player advantage and within-order sd quantiles")
    common(a, ("diff",))
    a.set_defaults(func=cmd_advantage)

    bl = an.add_parser("blanks", help="mean score by the deciles of both blanks")
    common(bl)
    bl.add_argument("--min-count", type=int, default=50, help="mask cells with fewer games (default 50)")
    bl.set_defaults(func=cmd_blanks)

    sl = an.add_parser("sletters", help="mean score by the decile of each S")
    common(sl)
    sl.add_argument("--min-count", type=int, default=50, help="mask cells with fewer games (default 50)")
    sl.set_defaults(func=cmd_sletters)

    rg = an.add_parser("regress", help="per-tile score slopes with clustered standard errors")
    common(rg, ("p1_score", "diff"))
    rg.add_argument("--letter", default=None, help="single tile (A-Z or ?); default all tiles")
    rg.add_argument("--exposure", choices=("drawn", "played"), default="drawn",
                    help="regress on tiles drawn (default) or played by player 1")
    rg.set_defaults(func=cmd_regress)

    c = an.add_parser("compare", help="per-tile effects under Scrabble and WWF tables")
    c.add_argument("scrabble", help="Scrabble outcome CSV")
    c.add_argument("wwf", help="WWF outcome CSV")
    common(c, table=False)
    c.set_defaults(func=cmd_compare)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except TilebenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exit_code_for(exc)
    except FileNotFoundError as exc:
        print(f"error: file_not_found: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
