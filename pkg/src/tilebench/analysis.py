"""Estimators over an outcome table: luck decomposition and tile values.

Every function takes either an :class:`~tilebench.harness.OutcomeTable`
(aborted games are dropped) or a plain :class:`pandas.DataFrame` with the
same column names, and never modifies its input.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy import stats

from .errors import AnalysisError
from .ruleset import ALPHABET, BLANK

DECILE_WIDTH = 10
N_DECILES = 10
FRONT_HALF = 50
QUANTILES = (5, 25, 50, 75, 95)
METRICS = ("p1_score", "p2_score", "diff")


def as_frame(table) -> pd.DataFrame:
    """Rows of completed games from an OutcomeTable or DataFrame."""
    frame = table.frame if hasattr(table, "frame") else table
    if not isinstance(frame, pd.DataFrame):
        raise TypeError("expected an OutcomeTable or DataFrame")
    if "status" in frame:
        frame = frame[frame["status"] == "ok"]
    return frame


def _check_metric(frame: pd.DataFrame, metric: str) -> None:
    if metric not in frame:
        raise AnalysisError(message=f"no column {metric!r} in outcome table")


# --------------------------------------------------------------------------
# Variance decomposition


@dataclass(frozen=True)
class DecompositionResult:
    """One-way ANOVA of a metric with tile order as the factor.

    Attributes
    ----------
    ss_total, ss_between, ss_within : float
        Sums of squares about the grand mean, of order means about the
        grand mean (weighted by ``replicates``) and about order means.
    between_fraction_naive : float
        Population variance of order means over population variance of all
        values, ``SS_between / SS_total``. Overstates the between share by
        roughly ``sigma_w**2 / R``.
    between_component, within_component : float
        Method-of-moments variance components,
        ``max(0, (MSB - MSW) / R)`` and ``MSW``.
    between_fraction_anova : float
        ``between_component / (between_component + within_component)``.
    defined : bool
        False when the data have no variance; the fractions are NaN then.
    """

    metric: str
    n_orders: int
    replicates: int
    grand_mean: float
    ss_total: float
    ss_between: float
    ss_within: float
    ms_between: float
    ms_within: float
    between_fraction_naive: float
    between_component: float
    within_component: float
    between_fraction_anova: float
    defined: bool

    @property
    def identity_error(self) -> float:
        """Relative error of ``SS_total = SS_between + SS_within``."""
        scale = max(abs(self.ss_total), np.finfo(float).tiny)
        if self.ss_total == 0:
            return abs(self.ss_between + self.ss_within)
        return abs(self.ss_total - self.ss_between - self.ss_within) / scale

    def as_dict(self) -> dict:
        d = dict(self.__dict__)
        d["identity_error"] = self.identity_error
        return d


def balanced_matrix(table, metric: str) -> np.ndarray:
    """Metric values as an (orders x replicates) array; rows sorted by order_id.

    Raises
    ------
    AnalysisError
        If orders have different numbers of completed replicates. Use
        :func:`balance_table` to drop or trim them first.
    """
    frame = as_frame(table)
    _check_metric(frame, metric)
    sizes = frame.groupby("order_id").size()
    if sizes.empty:
        raise AnalysisError(message="outcome table is empty")
    if sizes.nunique() != 1:
        raise AnalysisError("unbalanced_table",
                            f"replicates per order range from {sizes.min()} to {sizes.max()}; "
                            "apply balance_table() first")
    ordered = frame.sort_values(["order_id", "replicate_id"])
    return ordered[metric].to_numpy(dtype=float).reshape(len(sizes), int(sizes.iloc[0]))


def balance_table(table, replicates: int | None = None) -> pd.DataFrame:
    """Keep orders with at least ``replicates`` completed games, trimmed to that many.

    ``replicates`` defaults to the largest count that every order reaches.
    """
    frame = as_frame(table).sort_values(["order_id", "replicate_id"])
    sizes = frame.groupby("order_id").size()
    if replicates is None:
        replicates = int(sizes.min())
    keep = sizes.index[sizes >= replicates]
    frame = frame[frame["order_id"].isin(keep)]
    return frame.groupby("order_id", group_keys=False).head(replicates).reset_index(drop=True)


def decompose_matrix(x: np.ndarray, metric: str = "value") -> DecompositionResult:
    """Variance decomposition of an (orders x replicates) array."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2 or x.shape[1] < 2:
        raise AnalysisError(message=f"need at least 2 orders and 2 replicates, got shape {x.shape}")
    k, r = x.shape
    grand = x.mean()
    # work with deviations from an observed value so constant data give exact zeros
    d = x - x.flat[0]
    d = d - d.mean()
    m = d.mean(axis=1)
    ss_between = float(r * np.sum(m ** 2))
    ss_within = float(np.sum((d - m[:, None]) ** 2))
    ss_total = float(np.sum(d ** 2))
    msb = ss_between / (k - 1)
    msw = ss_within / (k * (r - 1))
    comp_b = max(0.0, (msb - msw) / r)
    defined = ss_total > 0
    if defined:
        naive = ss_between / ss_total
        frac = comp_b / (comp_b + msw) if comp_b + msw > 0 else np.nan
    else:
        naive = frac = np.nan
    return DecompositionResult(metric, k, r, float(grand), ss_total, ss_between, ss_within, msb, msw,
                               float(naive), comp_b, msw, float(frac), bool(defined))


def variance_decomposition(table, metric: str = "p1_score") -> DecompositionResult:
    """Split the variance of ``metric`` into between-order and within-order parts.

    Parameters
    ----------
    table : OutcomeTable or DataFrame
        Balanced outcome table.
    metric : str
        Column to decompose, usually ``p1_score`` or ``diff``.

    Returns
    -------
    DecompositionResult
    """
    return decompose_matrix(balanced_matrix(table, metric), metric)


def null_between_fractions(table, metric: str = "diff", n_shuffles: int = 200,
                           seed: int = 0) -> np.ndarray:
    """ANOVA between-fractions after randomly reassigning games to orders.

    Shuffling breaks any real order effect while keeping group sizes, so
    the returned values show what the estimator gives under no effect.
    """
    x = balanced_matrix(table, metric)
    flat = x.ravel()
    rng = np.random.default_rng(seed)
    out = np.empty(n_shuffles)
    for i in range(n_shuffles):
        out[i] = decompose_matrix(rng.permutation(flat).reshape(x.shape)).between_fraction_anova
    return out


def summarize(table, metric: str) -> pd.DataFrame:
    """Per-order n, mean and unbiased sd of ``metric``."""
    frame = as_frame(table)
    _check_metric(frame, metric)
    g = frame.groupby("order_id")[metric]
    return pd.DataFrame({"n": g.size(), "mean": g.mean(), "sd": g.std(ddof=1)})


def within_sd_quantiles(table, metric: str = "diff", q=QUANTILES) -> dict[int, float]:
    """Quantiles of the per-order standard deviation.

    Uses linear interpolation between order statistics (``numpy``'s
    default ``linear`` method). Orders with one replicate are ignored.
    """
    sd = summarize(table, metric)["sd"].dropna().to_numpy()
    if sd.size == 0:
        raise AnalysisError(message="no order has two or more replicates")
    return {int(p): float(v) for p, v in zip(q, np.percentile(sd, q))}


def sd_histogram(table, metric: str = "p1_score", bins: int = 30) -> dict:
    """Histogram of within-order sds plus the sd of order means.

    The sd of order means is the between-order reference line.
    """
    s = summarize(table, metric)
    sd = s["sd"].dropna().to_numpy()
    counts, edges = np.histogram(sd, bins=bins)
    return {"metric": metric, "counts": counts, "edges": edges,
            "between_sd": float(s["mean"].std(ddof=0)), "overall_sd": float(as_frame(table)[metric].std(ddof=0))}


# --------------------------------------------------------------------------
# Clustered OLS


@dataclass(frozen=True)
class ClusteredFit:
    coef: np.ndarray
    se: np.ndarray
    n: int
    n_clusters: int


def ols_clustered(y: np.ndarray, X: np.ndarray, groups: np.ndarray) -> ClusteredFit:
    """OLS with cluster-robust (CR1) standard errors.

    The sandwich ``(X'X)^-1 (sum_g X_g'e_g e_g'X_g) (X'X)^-1`` is scaled
    by ``G/(G-1) * (N-1)/(N-K)``.
    """
    y = np.asarray(y, dtype=float)
    X = np.asarray(X, dtype=float)
    n, p = X.shape
    xtx_inv = np.linalg.inv(X.T @ X)
    coef = xtx_inv @ (X.T @ y)
    resid = y - X @ coef
    codes, uniq = pd.factorize(groups, sort=True)
    g = len(uniq)
    scores = np.zeros((g, p))
    np.add.at(scores, codes, X * resid[:, None])
    meat = scores.T @ scores
    cov = xtx_inv @ meat @ xtx_inv
    if g > 1 and n > p:
        cov *= g / (g - 1) * (n - 1) / (n - p)
    return ClusteredFit(coef, np.sqrt(np.clip(np.diag(cov), 0, None)), n, g)


@dataclass(frozen=True)
class Advantage:
    mean: float
    se: float
    ci_low: float
    ci_high: float
    n_games: int
    n_clusters: int


def first_player_advantage(table, metric: str = "diff", level: float = 0.95) -> Advantage:
    """Mean of ``diff`` with an order-clustered standard error and t CI.

    The interval uses a t distribution with ``G - 1`` degrees of freedom,
    G being the number of orders.
    """
    frame = as_frame(table)
    _check_metric(frame, metric)
    if len(frame) < 2:
        raise AnalysisError(message="need at least two games")
    y = frame[metric].to_numpy(dtype=float)
    fit = ols_clustered(y, np.ones((len(y), 1)), frame["order_id"].to_numpy())
    mean, se = float(fit.coef[0]), float(fit.se[0])
    df = max(fit.n_clusters - 1, 1)
    half = stats.t.ppf(0.5 + level / 2, df) * se
    return Advantage(mean, se, mean - half, mean + half, fit.n, fit.n_clusters)


@dataclass(frozen=True)
class TileEffect:
    """Change in ``metric`` per extra copy of ``letter`` drawn by player 1."""

    letter: str
    metric: str
    slope: float
    se: float
    intercept: float
    n: int
    n_clusters: int
    mean_exposure: float
    defined: bool = True


def exposure_column(letter: str, kind: str = "drawn") -> str:
    letter = letter.upper() if letter != BLANK else BLANK
    if letter not in ALPHABET and letter.lower() != "blank":
        raise AnalysisError(message=f"unknown tile {letter!r}")
    name = "blank" if letter in (BLANK, "BLANK") else letter
    return f"p1_{kind}_{name}"


def tile_regression(table, letter: str, metric: str = "p1_score", exposure: str = "drawn") -> TileEffect:
    """Regress ``metric`` on player 1's exposure count of ``letter``.

    Parameters
    ----------
    exposure : {"drawn", "played"}
        Tiles drawn (default) or tiles played by player 1.

    Returns
    -------
    TileEffect
        ``defined`` is False, and the slope NaN, when the exposure never varies.
    """
    frame = as_frame(table)
    _check_metric(frame, metric)
    col = exposure_column(letter, exposure)
    _check_metric(frame, col)
    x = frame[col].to_numpy(dtype=float)
    y = frame[metric].to_numpy(dtype=float)
    label = "?" if col.endswith("blank") else col[-1]
    if len(x) < 2 or np.ptp(x) == 0:
        return TileEffect(label, metric, np.nan, np.nan, float(y.mean()) if len(y) else np.nan,
                          len(x), frame["order_id"].nunique(), float(x.mean()) if len(x) else np.nan, False)
    X = np.column_stack([np.ones_like(x), x])
    fit = ols_clustered(y, X, frame["order_id"].to_numpy())
    return TileEffect(label, metric, float(fit.coef[1]), float(fit.se[1]), float(fit.coef[0]),
                      fit.n, fit.n_clusters, float(x.mean()))


def tile_effects(table, metric: str = "p1_score", exposure: str = "drawn") -> pd.DataFrame:
    """:func:`tile_regression` for every tile, one row per letter."""
    rows = [tile_regression(table, ch, metric, exposure).__dict__ for ch in ALPHABET]
    return pd.DataFrame(rows).set_index("letter")


def compare_rulesets(scrabble_table, wwf_table, metric: str = "p1_score") -> pd.DataFrame:
    """Per-letter effects under both rulesets and ``delta = wwf - scrabble``."""
    a = tile_effects(scrabble_table, metric)
    b = tile_effects(wwf_table, metric)
    out = pd.DataFrame({
        "scrabble_slope": a["slope"], "scrabble_se": a["se"], "scrabble_exposure": a["mean_exposure"],
        "wwf_slope": b["slope"], "wwf_se": b["se"], "wwf_exposure": b["mean_exposure"],
    })
    out["delta"] = out["wwf_slope"] - out["scrabble_slope"]
    out["delta_se"] = np.hypot(out["scrabble_se"], out["wwf_se"])
    return out


# --------------------------------------------------------------------------
# Position tables


def decile(pos) -> np.ndarray:
    """Decile of 0-based tile positions: 0-9 -> 0, ..., 90 and beyond -> 9."""
    return np.minimum(np.asarray(pos) // DECILE_WIDTH, N_DECILES - 1)


def _positions(frame: pd.DataFrame, letter: str, sequences: dict | None) -> list[list[int]]:
    if sequences:
        return [[i for i, ch in enumerate(sequences[int(o)]) if ch == letter] for o in frame["order_id"]]
    if letter == BLANK:
        return [[int(a), int(b)] for a, b in zip(frame["blank1_pos"], frame["blank2_pos"])]
    if letter == "S":
        return [[int(t) for t in str(s).split(";") if t != ""] for s in frame["s_positions"]]
    raise AnalysisError(message=f"positions of {letter!r} need the tile sequences")


@dataclass(frozen=True)
class DecileGrid:
    """Mean metric by the deciles of the two blanks (symmetrized).

    A game with blanks in deciles (a, b) contributes to cells (a, b) and
    (b, a), once if a == b. ``mask`` is True where ``count < min_count``.
    """

    mean: np.ndarray
    count: np.ndarray
    mask: np.ndarray
    min_count: int
    metric: str
    contrast: float
    contrast_se: float

    def masked_mean(self) -> np.ndarray:
        return np.where(self.mask, np.nan, self.mean)

    def to_frame(self) -> pd.DataFrame:
        rows = [{"decile_a": a, "decile_b": b, "mean": self.mean[a, b], "count": int(self.count[a, b]),
                 "masked": bool(self.mask[a, b])}
                for a in range(N_DECILES) for b in range(N_DECILES)]
        return pd.DataFrame(rows)


def blank_contrast(table, sequences: dict | None = None, metric: str = "p1_score") -> tuple[float, float]:
    """Value to player 1 of the second blank being in the front half.

    Among games with at least one blank in positions 50 and beyond, the
    mean ``metric`` when the other blank is in positions 0-49 minus the
    mean when both are in the back half. Returns (contrast, clustered se).
    """
    frame = as_frame(table)
    pos = np.array(_positions(frame, BLANK, sequences))
    n_front = (pos < FRONT_HALF).sum(axis=1)
    sub = frame[n_front <= 1]
    if sub.empty:
        return np.nan, np.nan
    x = (n_front[n_front <= 1] == 1).astype(float)
    if np.ptp(x) == 0:
        return np.nan, np.nan
    fit = ols_clustered(sub[metric].to_numpy(dtype=float), np.column_stack([np.ones_like(x), x]),
                        sub["order_id"].to_numpy())
    return float(fit.coef[1]), float(fit.se[1])


def blank_decile_table(table, sequences: dict | None = None, metric: str = "p1_score",
                       min_count: int = 50) -> DecileGrid:
    """Mean ``metric`` for each pair of blank deciles.

    Parameters
    ----------
    sequences : dict, optional
        order_id -> tile string. Without it the ``blank1_pos`` and
        ``blank2_pos`` columns are used.
    min_count : int
        Cells with fewer games are masked (50 suits 4,000-game runs).
    """
    frame = as_frame(table)
    _check_metric(frame, metric)
    pos = np.array(_positions(frame, BLANK, sequences))
    if pos.ndim != 2 or pos.shape[1] != 2:
        raise AnalysisError(message="blank_decile_table needs exactly two blanks per game")
    d = decile(pos)
    y = frame[metric].to_numpy(dtype=float)
    sums = np.zeros((N_DECILES, N_DECILES))
    counts = np.zeros((N_DECILES, N_DECILES), dtype=np.int64)
    np.add.at(sums, (d[:, 0], d[:, 1]), y)
    np.add.at(counts, (d[:, 0], d[:, 1]), 1)
    off = d[:, 0] != d[:, 1]
    np.add.at(sums, (d[off, 1], d[off, 0]), y[off])
    np.add.at(counts, (d[off, 1], d[off, 0]), 1)
    with np.errstate(invalid="ignore", divide="ignore"):
        mean = sums / counts
    c, se = blank_contrast(frame, sequences, metric)
    return DecileGrid(mean, counts, counts < min_count, min_count, metric, c, se)


@dataclass(frozen=True)
class SPositionTable:
    """Mean metric when the k-th S (k = 1..n) lies in each decile.

    Row ``k - 1`` holds the line for the k-th S in tile order.
    """

    mean: np.ndarray
    count: np.ndarray
    mask: np.ndarray
    min_count: int
    metric: str

    def adjacent_gaps(self, columns=(3, 4)) -> np.ndarray:
        """Mean of line k+1 minus line k, per column; shape (n_s - 1, len(columns)).

        Column 3 is positions 30-39 and column 4 is 40-49 (0-based). Masked
        cells give NaN.
        """
        m = np.where(self.mask, np.nan, self.mean)[:, list(columns)]
        return m[1:] - m[:-1]

    def to_frame(self) -> pd.DataFrame:
        rows = [{"k": k + 1, "decile": d, "mean": self.mean[k, d], "count": int(self.count[k, d]),
                 "masked": bool(self.mask[k, d])}
                for k in range(self.mean.shape[0]) for d in range(N_DECILES)]
        return pd.DataFrame(rows)


def s_position_table(table, sequences: dict | None = None, metric: str = "p1_score",
                     min_count: int = 50) -> SPositionTable:
    """Mean ``metric`` by the decile of the first, second, ... S in the tile order."""
    frame = as_frame(table)
    _check_metric(frame, metric)
    pos = _positions(frame, "S", sequences)
    n_s = max((len(p) for p in pos), default=0)
    if n_s == 0 or any(len(p) != n_s for p in pos):
        raise AnalysisError(message="every game needs the same positive number of S tiles")
    d = decile(np.sort(np.array(pos), axis=1))
    y = frame[metric].to_numpy(dtype=float)
    sums = np.zeros((n_s, N_DECILES))
    counts = np.zeros((n_s, N_DECILES), dtype=np.int64)
    for k in range(n_s):
        np.add.at(sums[k], d[:, k], y)
        np.add.at(counts[k], d[:, k], 1)
    with np.errstate(invalid="ignore", divide="ignore"):
        mean = sums / counts
    return SPositionTable(mean, counts, counts < min_count, min_count, metric)
