import numpy as np
import pytest

from brute_force import brute_force_moves, random_instance
from conftest import make_state
from positions import CASES, WORDS, placement_for
from tilebench.bot import PassBot, SpeedyBot
from tilebench.engine import (ACROSS, DOWN, GameRecord, MoveChoice, MoveGenerator, Placement, apply_move,
                              check_placement, legal_moves, play_game, replay, score_move)
from tilebench.errors import IllegalMoveError
from tilebench.lexicon import build_lexicon, bundled_wordlist_path, read_wordlist
from tilebench.reservoir import Reservoir, generate_sequence
from tilebench.ruleset import load_ruleset


@pytest.fixture(scope="module")
def case_lexicon():
    return build_lexicon(WORDS)


@pytest.mark.parametrize("case", CASES, ids=[c[0] for c in CASES])
def test_hand_scored(case, case_lexicon):
    _, rs_name, existing, move, expected = case
    rs = load_ruleset(rs_name)
    state = make_state(existing)
    p = placement_for(state, move, expected)
    assert score_move(state, p, rs) == expected
    check_placement(state, p, case_lexicon, rs)
    found = {frozenset(q.tiles): q for q in legal_moves(state, p.tiles_used, case_lexicon, rs)}
    assert found[frozenset(p.tiles)].score == expected
    assert found[frozenset(p.tiles)].word == p.word


def test_generator_matches_brute_force_sample():
    pool = [w for w in read_wordlist(bundled_wordlist_path()) if len(w) <= 6]
    rng = np.random.default_rng(77)
    for i in range(25):
        rs = load_ruleset("scrabble" if i % 2 else "wwf")
        state, rack, words = random_instance(rng, pool, rs)
        got = legal_moves(state, rack, build_lexicon(words), rs)
        as_map = {frozenset(p.tiles): p.score for p in got}
        assert len(as_map) == len(got)
        assert as_map == brute_force_moves(state, rack, words, rs)


def test_single_tile_reported_once(small_lexicon, scrabble):
    state = make_state([(7, 6, ACROSS, "CAT"), (7, 8, DOWN, "TO")])
    moves = [p for p in legal_moves(state, "D", build_lexicon(["AD", "DO", "CAT", "TO"]), scrabble)]
    assert len(moves) == 1
    assert moves[0].direction == ACROSS and moves[0].word == "DO"


def test_buffer_growth(enable, scrabble):
    gen = MoveGenerator(scrabble, enable, capacity=4)
    batch = gen.generate(make_state().letters, make_state().blanks, "AEINRST")
    ref = MoveGenerator(scrabble, enable).generate(make_state().letters, make_state().blanks, "AEINRST")
    assert len(batch) == len(ref) > 100
    assert set(batch.placements()) == set(ref.placements())


def test_every_generated_move_passes_reference_check(enable, scrabble):
    state = make_state([(7, 4, ACROSS, "QUIRK"), (4, 6, DOWN, "TAXI")])
    for p in legal_moves(state, "SE?TAR", enable, scrabble):
        check_placement(state, p, enable, scrabble)


@pytest.mark.parametrize("bad, reason", [
    (Placement(0, 0, ACROSS, ((0, 0, "A", False), (0, 1, "T", False)), "AT", 2), "centre"),
    (Placement(7, 7, ACROSS, ((7, 7, "X", False), (7, 8, "X", False)), "XX", 32), "lexicon"),
    (Placement(7, 6, ACROSS, ((7, 6, "A", False), (7, 8, "T", False)), "AT", 4), "contiguous"),
    (Placement(7, 7, ACROSS, ((7, 7, "A", False), (7, 8, "T", False)), "AT", 5), "worth"),
    (Placement(7, 7, ACROSS, ((7, 7, "A", False), (8, 7, "T", False)), "AT", 4), "one row"),
])
def test_illegal_first_moves(bad, reason, small_lexicon, scrabble):
    with pytest.raises(IllegalMoveError, match=reason):
        check_placement(make_state(), bad, small_lexicon, scrabble)


def test_play_must_touch(small_lexicon, scrabble):
    state = make_state([(7, 6, ACROSS, "CAT")])
    far = Placement(1, 1, ACROSS, ((1, 1, "A", False), (1, 2, "T", False)), "AT", 2)
    with pytest.raises(IllegalMoveError, match="touch"):
        check_placement(state, far, small_lexicon, scrabble)


def test_illegal_move_is_not_applied(small_lexicon, scrabble):
    res = Reservoir("CAT" + "E" * 97)
    state = make_state(sequence="CAT" + "E" * 97)
    state.racks[0] = res.draw("front", 7)
    bad = MoveChoice.place(Placement(7, 7, ACROSS, ((7, 7, "E", False), (7, 8, "E", False)), "EE", 4))
    with pytest.raises(IllegalMoveError):
        apply_move(state, bad, res, scrabble, small_lexicon)
    assert (state.letters < 0).all()


def test_apply_move_refills_from_own_end(small_lexicon, scrabble):
    seq = "CATXXXX" + "E" * 86 + "YYYYYYY"
    res = Reservoir(seq)
    state = make_state(sequence=seq)
    state.racks[0] = res.draw("front", 7)
    state.racks[1] = res.draw("back", 7)
    move = MoveChoice.place(Placement(7, 6, ACROSS, ((7, 6, "C", False), (7, 7, "A", False), (7, 8, "T", False)),
                                      "CAT", 10))
    apply_move(state, move, res, scrabble, small_lexicon)
    assert state.scores == [10, 0]
    assert state.rack_letters(0) == "XXXXEEE"
    assert state.to_move == 1 and state.consecutive_scoreless == 0


def test_scoreless_turns_end_game(scrabble, enable):
    seq = generate_sequence(scrabble, np.random.default_rng(0))
    res = Reservoir(seq)
    rec = play_game(scrabble, enable, res, PassBot(), PassBot(), np.random.default_rng(0))
    assert rec.end_reason == "scoreless_turns"
    assert len(rec.moves) == 6
    values = scrabble.tile_values
    rack_value = [sum(values[ch] for ch in seq.letters[:7]), sum(values[ch] for ch in seq.letters[::-1][:7])]
    assert rec.final_scores == (-rack_value[0], -rack_value[1])


def test_full_game_and_replay(scrabble, enable, tmp_path):
    seq = generate_sequence(scrabble, np.random.default_rng(42))
    rec = play_game(scrabble, enable, Reservoir(seq), SpeedyBot(), SpeedyBot(), np.random.default_rng(7),
                    seed=7, validate=True)
    assert rec.end_reason == "played_out"
    assert sum(rec.end_adjustments) == 0
    path = tmp_path / "g.rec"
    rec.save(path)
    again = GameRecord.load(path)
    assert again == rec
    final = replay(again, scrabble, enable)
    assert (final.scores[0], final.scores[1]) == rec.final_scores
    # every tile ends on the board or a rack
    assert int((final.letters >= 0).sum()) + sum(len(r) for r in final.racks) == 100


def test_game_is_deterministic(scrabble, enable):
    seq = generate_sequence(scrabble, np.random.default_rng(3))
    a = play_game(scrabble, enable, Reservoir(seq), SpeedyBot(), SpeedyBot(), np.random.default_rng(11))
    b = play_game(scrabble, enable, Reservoir(seq), SpeedyBot(), SpeedyBot(), np.random.default_rng(11))
    assert a == b


def test_played_out_adjustment(scrabble, enable):
    for seed in range(3):
        seq = generate_sequence(scrabble, np.random.default_rng(100 + seed))
        rec = play_game(scrabble, enable, Reservoir(seq), SpeedyBot(), SpeedyBot(), np.random.default_rng(seed))
        if rec.end_reason != "played_out":
            continue
        mover = rec.moves[-1].player
        gain = rec.end_adjustments[mover]
        assert gain >= 0 and rec.end_adjustments[1 - mover] == -gain
