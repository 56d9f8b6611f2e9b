import gzip

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tilebench.errors import LexiconError
from tilebench.lexicon import (build_lexicon, load_any, load_lexicon, read_wordlist,
                               save_lexicon)

words_st = st.lists(st.text(alphabet="ABCDE", min_size=1, max_size=7), min_size=1, max_size=60)


def test_contains_and_prefix(small_lexicon):
    assert "CAT" in small_lexicon
    assert small_lexicon.contains("cats")
    assert not small_lexicon.contains("CA")
    assert small_lexicon.is_prefix("CA")
    assert not small_lexicon.is_prefix("CX")
    assert not small_lexicon.contains("")


def test_hooks(small_lexicon):
    assert small_lexicon.hooks_after("CAT") == {"S"}
    assert small_lexicon.hooks_before("CAT") == {"S"}
    assert small_lexicon.hooks_after("TA") == {"B"}
    assert small_lexicon.extensions("CA") == {"B", "T"}


def test_length_filter_and_report():
    lex = build_lexicon(["A", "AB", "AB", "ABCDEFGHIJKLMNOP", "CAB"])
    assert sorted(lex.words()) == ["AB", "CAB"]
    assert lex.report.rejected_length == 2
    assert lex.report.duplicates == 1


def test_bad_input():
    with pytest.raises(LexiconError) as exc:
        build_lexicon(["CAT", "DO-G"])
    assert exc.value.category == "non_alphabetic"
    with pytest.raises(LexiconError):
        build_lexicon(["A"])


def test_suffix_sharing_minimizes():
    # the three words share one path after their first letter
    lex = build_lexicon(["BATS", "CATS", "RATS"])
    assert lex.node_count == 5
    assert lex.edge_count == 6


@given(words_st)
@settings(max_examples=60, deadline=None)
def test_membership_matches_set(words):
    valid = {w for w in words if 2 <= len(w) <= 15}
    if not valid:
        return
    lex = build_lexicon(words)
    assert list(lex.words()) == sorted(valid)
    for w in words:
        assert lex.contains(w) == (w in valid)
        assert lex.contains(w + "E") == (w + "E" in valid)
        for k in range(1, len(w)):
            assert lex.is_prefix(w[:k]) == any(v.startswith(w[:k]) for v in valid)


@given(words_st)
@settings(max_examples=30, deadline=None)
def test_hooks_match_brute_force(words):
    valid = {w for w in words if 2 <= len(w) <= 15}
    if not valid:
        return
    lex = build_lexicon(words)
    for w in list(valid)[:5]:
        stem = w[:-1]
        assert lex.hooks_after(stem) == {ch for ch in "ABCDE" if stem + ch in valid}
        tail = w[1:]
        assert lex.hooks_before(tail) == {ch for ch in "ABCDE" if ch + tail in valid}


def test_save_load_round_trip(tmp_path, small_lexicon):
    path = tmp_path / "lex.bin"
    save_lexicon(small_lexicon, path)
    again = load_lexicon(path)
    assert list(again.words()) == list(small_lexicon.words())
    np.testing.assert_array_equal(again.child, small_lexicon.child)
    assert load_any(path).word_count == small_lexicon.word_count


def test_corrupt_file_detected(tmp_path, small_lexicon):
    path = tmp_path / "lex.bin"
    save_lexicon(small_lexicon, path)
    data = bytearray(path.read_bytes())
    data[-3] ^= 0xFF
    path.write_bytes(bytes(data))
    with pytest.raises(LexiconError) as exc:
        load_lexicon(path)
    assert exc.value.category == "corrupt_lexicon"


def test_version_mismatch(tmp_path, small_lexicon):
    path = tmp_path / "lex.bin"
    save_lexicon(small_lexicon, path)
    data = bytearray(path.read_bytes())
    data[4] = 9
    path.write_bytes(bytes(data))
    with pytest.raises(LexiconError) as exc:
        load_lexicon(path)
    assert exc.value.category == "format_version_mismatch"


def test_wordlist_reader(tmp_path):
    path = tmp_path / "w.txt.gz"
    with gzip.open(path, "wt") as fh:
        fh.write("# comment\ncat\n\nDOG\n")
    assert read_wordlist(path) == ["cat", "DOG"]


def test_bundled_list(enable):
    assert enable.word_count == 168_548  # ENABLE words of 2-15 letters
    for w in ("AA", "QAT", "XI", "JO", "RETAINS", "ZEBRA", "OXYPHENBUTAZONE"):
        assert w in enable
    assert "QI" not in enable and "ZA" not in enable
    assert not enable.terminal.flags.writeable
