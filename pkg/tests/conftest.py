import numpy as np
import pytest

from tilebench.engine import GameState
from tilebench.lexicon import build_lexicon, load_any
from tilebench.ruleset import load_ruleset

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def scrabble():
    return load_ruleset("scrabble")


@pytest.fixture(scope="session")
def wwf():
    return load_ruleset("wwf")


@pytest.fixture(scope="session")
def enable():
    return load_any("enable")


@pytest.fixture(scope="session")
def small_lexicon():
    return build_lexicon("AA AB AD AT CAB CAT CATS BAT BATS TAB TABS SCAT AX EX OX TA TO AN NA".split())


def make_state(placed=(), sequence="A" * 100) -> GameState:
    """GameState with words laid on the board.

    ``placed`` holds ``(row, col, direction, word)``; lower-case letters are blanks.
    """
    state = GameState.empty(sequence)
    for r, c, d, word in placed:
        dr, dc = (0, 1) if d == "across" else (1, 0)
        for k, ch in enumerate(word):
            state.letters[r + dr * k, c + dc * k] = ord(ch.upper()) - 65
            state.blanks[r + dr * k, c + dc * k] = ch.islower()
    return state


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
