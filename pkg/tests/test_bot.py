import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import make_state
from tilebench.bot import (BotConfig, LeaveTable, SpeedyBot, _counts_to_letters, _extra_candidates, best_exchange,
                           load_leave_table, parse_leave_table, pick, select_move, utility)
from tilebench.engine import ACROSS, EXCHANGE, PASS, PLACE, MoveChoice, MoveGenerator, legal_moves, rack_to_counts
from tilebench.errors import FormatVersionError


@pytest.fixture(scope="module")
def leaves():
    return load_leave_table()


def test_leave_formula_by_hand(leaves):
    # S 8 + ? 25 = 33; one vowel-free pair is balanced
    assert leaves.value("S?") == pytest.approx(33.0)
    # E 2.5 x2 + duplicate -2 = 3; two vowels, no consonants -> |2-0|-1 = 1 -> -2
    assert leaves.value("EE") == pytest.approx(1.0)
    # Q -7.5 U -4: one vowel one consonant
    assert leaves.value("QU") == pytest.approx(-11.5)
    # five consonants, no vowels: balance -2*(5-1) = -8
    assert leaves.value("BCDFG") == pytest.approx(-2 + 0.5 + 0.5 - 2 - 2.5 - 8)
    assert leaves.value("") == 0.0


def test_leave_table_format_is_checked():
    with pytest.raises(FormatVersionError):
        parse_leave_table("format: other/1\nvalues: {}\n")


def test_kernel_leave_matches_python(enable, scrabble, leaves):
    state = make_state([(7, 5, ACROSS, "JOUST")])
    rack = "AEQRS?T"
    batch = MoveGenerator(scrabble, enable).generate(state.letters, state.blanks, rack, leaves.kernel_params)
    counts = rack_to_counts(rack)
    for i in range(0, len(batch), 37):
        left = counts - np.bincount(batch.tiles_used(i), minlength=27)
        assert batch.leave[i] == pytest.approx(leaves.value(left))


@given(st.lists(st.floats(-50, 50), min_size=1, max_size=200), st.floats(0, 3), st.integers(0, 2**32 - 1))
@settings(max_examples=200, deadline=None)
def test_pick_never_two_w_below_max(raw, w, seed):
    raw = np.array(raw)
    i = pick(raw, w, np.random.default_rng(seed))
    assert raw[i] > raw.max() - 2 * w or raw[i] == raw.max()


def test_pick_is_argmax_without_noise():
    raw = np.array([1.0, 5.0, 5.0, 2.0])
    assert pick(raw, 0.0, None, tie_keys=lambda k: -k) == 2
    assert pick(raw, 0.0, None) == 1


def test_best_exchange_enumerates_keeps(leaves):
    rack = rack_to_counts("QUVVWXE")
    keep, val = best_exchange(rack, leaves)
    brute = max(leaves.value(np.array(k)) for k in itertools.product(*[range(int(n) + 1) for n in rack])
                if sum(k) < rack.sum())
    assert val == pytest.approx(brute)
    assert keep.sum() < rack.sum()


def test_unplayable_rack_exchanges(enable, scrabble, leaves):
    state = make_state()
    state.bag_remaining = 80
    cfg = BotConfig(leaves, perturbation_half_width=0.0)
    rack = "QVVWWXJ"
    assert legal_moves(state, rack, enable, scrabble) == set()
    move = select_move(state, rack, set(), cfg, np.random.default_rng(0), scrabble)
    assert move.kind == EXCHANGE
    keep, _ = best_exchange(rack_to_counts(rack), leaves)
    assert sorted(move.exchange) == sorted(_counts_to_letters(rack_to_counts(rack) - keep))


def test_pass_only_when_nothing_else(enable, scrabble, leaves):
    state = make_state()
    state.bag_remaining = 3
    cfg = BotConfig(leaves, perturbation_half_width=0.0)
    move = select_move(state, "QVVWWXJ", set(), cfg, np.random.default_rng(0), scrabble)
    assert move.kind == PASS


@pytest.mark.parametrize("best, bag, offered", [
    (1.9, 7, True), (2.0, 7, False), (-30.0, 6, False), (-30.0, 80, True),
])
def test_exchange_offer_rule(best, bag, offered, scrabble, leaves):
    state = make_state()
    state.bag_remaining = bag
    extra = _extra_candidates(best, rack_to_counts("QVVWWXJ"), state, BotConfig(leaves), scrabble)
    assert bool(extra) == offered


def test_exchange_can_lose_to_a_play(enable, scrabble, leaves):
    state = make_state([(7, 6, ACROSS, "CAT")])
    state.bag_remaining = 80
    cfg = BotConfig(leaves, perturbation_half_width=0.0, exchange_threshold=100.0)
    rack = "QVVWWUU"
    move = select_move(state, rack, legal_moves(state, rack, enable, scrabble), cfg,
                       np.random.default_rng(0), scrabble)
    assert move.kind == PLACE


def test_fast_and_reference_selection_agree(enable, scrabble, leaves):
    cfg = BotConfig(leaves, perturbation_half_width=0.0)
    gen = MoveGenerator(scrabble, enable)
    state = make_state([(7, 5, ACROSS, "JOUST"), (5, 9, "down", "BOAST")], sequence="AERTLIN" + "E" * 93)
    state.racks[0] = list(range(7))
    state.bag_remaining = 60
    fast = SpeedyBot(cfg).choose(state, gen, np.random.default_rng(0))
    slow = select_move(state, "AERTLIN", legal_moves(state, "AERTLIN", enable, scrabble), cfg,
                       np.random.default_rng(0), scrabble)
    assert fast == slow
    assert utility(fast, state, cfg, scrabble) == pytest.approx(
        max(utility(MoveChoice.place(p), state, cfg, scrabble) for p in legal_moves(state, "AERTLIN", enable, scrabble)))


def test_audit_margin_is_bounded(enable, scrabble, leaves):
    gen = MoveGenerator(scrabble, enable)
    state = make_state(sequence="AERTLIS" + "E" * 93)
    state.racks[0] = list(range(7))
    state.bag_remaining = 86
    bot = SpeedyBot(BotConfig(leaves), audit=True)
    rng = np.random.default_rng(1)
    for _ in range(50):
        bot.choose(state, gen, rng)
        assert 0.0 <= bot.last_audit_margin < 2.0


def test_negative_width_rejected(leaves):
    with pytest.raises(ValueError):
        BotConfig(leaves, perturbation_half_width=-1)


def test_leave_table_shape(leaves):
    assert isinstance(leaves, LeaveTable)
    assert leaves.values.shape == (27,) and leaves.is_vowel.sum() == 5
