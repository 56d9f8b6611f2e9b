"""Exception hierarchy shared by every tilebench module.

Each error carries a short machine-readable ``category`` string; the CLI
prints it and maps it to an exit code.
"""

from __future__ import annotations


class TilebenchError(Exception):
    category = "error"

    def __init__(self, category: str | None = None, message: str = "", **detail):
        if category is not None:
            self.category = category
        self.detail = detail
        text = f"{self.category}: {message}" if message else self.category
        super().__init__(text)


class RulesetError(TilebenchError):
    category = "invalid_ruleset"


class LexiconError(TilebenchError):
    category = "invalid_lexicon"


class IllegalMoveError(TilebenchError):
    category = "illegal_move"


class ExchangeNotAllowed(TilebenchError):
    category = "exchange_not_allowed"


class AnalysisError(TilebenchError):
    category = "analysis_error"


class FormatVersionError(TilebenchError):
    category = "format_version_mismatch"
