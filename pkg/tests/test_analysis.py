from math import comb

import numpy as np
import pandas as pd
import pytest
import statsmodels.api as sm
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

import synthetic
from tilebench.analysis import (balance_table, blank_contrast, blank_decile_table, compare_rulesets, decile,
                                decompose_matrix, first_player_advantage, null_between_fractions, ols_clustered,
                                s_position_table, sd_histogram, tile_effects, tile_regression,
                                variance_decomposition, within_sd_quantiles)
from tilebench.errors import AnalysisError


def frame_from(groups, metric="diff"):
    rows = [{"order_id": o, "replicate_id": r, "status": "ok", metric: v}
            for o, vals in enumerate(groups) for r, v in enumerate(vals)]
    return pd.DataFrame(rows)


# --------------------------------------------------------------------------
# decomposition

def test_two_by_two_example():
    res = variance_decomposition(frame_from([[0, 0], [10, 10]], "p1_score"))
    assert res.ss_within == 0 and res.ss_total == 100 and res.ss_between == 100
    assert res.between_fraction_naive == 1.0
    assert res.between_fraction_anova == 1.0


def test_constant_values_are_flagged():
    res = variance_decomposition(frame_from([[0.1] * 3] * 4, "p1_score"))
    assert res.ss_total == 0 and not res.defined
    assert np.isnan(res.between_fraction_naive) and np.isnan(res.between_fraction_anova)


@given(arrays(np.float64, st.tuples(st.integers(2, 12), st.integers(2, 12)),
              elements=st.floats(-1e4, 1e4, allow_subnormal=False)))
@settings(max_examples=300, deadline=None)
def test_anova_identity(x):
    res = decompose_matrix(x)
    assert res.identity_error <= 1e-9
    if res.defined:
        assert 0 <= res.between_fraction_naive <= 1 + 1e-12
        assert 0 <= res.between_fraction_anova <= 1


def test_decomposition_by_hand():
    x = np.array([[1.0, 3.0], [4.0, 8.0], [0.0, 2.0]])
    res = decompose_matrix(x)
    # grand 3, order means 2, 6, 1
    assert res.ss_between == pytest.approx(2 * (1 + 9 + 4))
    assert res.ss_within == pytest.approx(2 + 8 + 2)
    assert res.ms_between == pytest.approx(14.0) and res.ms_within == pytest.approx(4.0)
    assert res.between_component == pytest.approx(5.0)
    assert res.between_fraction_anova == pytest.approx(5 / 9)


def test_synthetic_recovery():
    frame = synthetic.two_level(np.random.default_rng(11), 500, 50)
    res = variance_decomposition(frame, "p1_score")
    assert abs(res.between_fraction_anova - 0.5) <= 0.05
    # the naive ratio carries an extra sigma_w^2 / R
    assert res.between_fraction_naive > res.between_fraction_anova


def test_unbalanced_table_rejected():
    frame = frame_from([[1, 2, 3], [4, 5]], "p1_score")
    with pytest.raises(AnalysisError) as exc:
        variance_decomposition(frame, "p1_score")
    assert exc.value.category == "unbalanced_table"
    fixed = balance_table(frame)
    assert variance_decomposition(fixed, "p1_score").replicates == 2


def test_aborted_rows_excluded():
    frame = frame_from([[1, 2], [4, 5]], "p1_score")
    extra = pd.DataFrame([{"order_id": 0, "replicate_id": 2, "status": "aborted", "p1_score": np.nan}])
    res = variance_decomposition(pd.concat([frame, extra]), "p1_score")
    assert res.replicates == 2


def test_null_shuffle_is_centred_on_no_effect():
    rng = np.random.default_rng(4)
    none = synthetic.two_level(rng, 60, 10, sd_between=0.0, metric="diff")
    some = synthetic.two_level(rng, 60, 10, sd_between=1.0, metric="diff")
    null = null_between_fractions(some, "diff", n_shuffles=100, seed=1)
    assert variance_decomposition(some, "diff").between_fraction_anova > np.quantile(null, 0.99)
    assert np.quantile(null_between_fractions(none, "diff", 100), 0.5) < 0.05


# --------------------------------------------------------------------------
# first-player advantage and quantiles

def test_constant_advantage():
    adv = first_player_advantage(frame_from([[14, 14], [14, 14]]))
    assert adv.mean == 14 and adv.se == 0 and adv.ci_low == adv.ci_high == 14


def test_advantage_ci_coverage():
    rng = np.random.default_rng(2024)
    hits = 0
    for _ in range(1000):
        adv = first_player_advantage(synthetic.two_level(rng, 40, 5, 1.0, 2.0, metric="diff"))
        hits += adv.ci_low <= 0 <= adv.ci_high
    assert 0.93 <= hits / 1000 <= 0.97


def test_quantiles_follow_linear_convention():
    frame = frame_from([[-c, 0, c] for c in (10, 20, 30, 40)])
    q = within_sd_quantiles(frame, "diff")
    assert 10 < q[25] < 20
    assert q[25] == pytest.approx(17.5) and q[50] == pytest.approx(25.0)
    assert q[5] == pytest.approx(11.5) and q[95] == pytest.approx(38.5)


def test_equal_sds_give_equal_quantiles():
    q = within_sd_quantiles(frame_from([[-3, 0, 3]] * 5), "diff")
    assert all(v == pytest.approx(3.0) for v in q.values())


def test_sd_histogram_counts_orders():
    h = sd_histogram(frame_from([[-3, 0, 3]] * 5 + [[0, 0, 0]], "p1_score"), bins=4)
    assert h["counts"].sum() == 6 and h["between_sd"] == 0


# --------------------------------------------------------------------------
# clustered regression

def test_cluster_se_matches_statsmodels():
    rng = np.random.default_rng(8)
    groups = np.repeat(np.arange(30), 7)
    x = rng.normal(size=210) + np.repeat(rng.normal(size=30), 7)
    y = 1.5 + 2.0 * x + np.repeat(rng.normal(size=30), 7) + rng.normal(size=210)
    X = np.column_stack([np.ones_like(x), x])
    ours = ols_clustered(y, X, groups)
    ref = sm.OLS(y, X).fit(cov_type="cluster", cov_kwds={"groups": groups})
    np.testing.assert_allclose(ours.coef, ref.params, rtol=1e-10)
    np.testing.assert_allclose(ours.se, ref.bse, rtol=1e-8)


def test_planted_slope():
    frame = synthetic.exposures(np.random.default_rng(5), 200, 20, {"Q": 5.0})
    eff = tile_regression(frame, "Q")
    assert abs(eff.slope - 5.0) <= 3 * eff.se
    assert eff.se > 0 and eff.n == 4000 and eff.n_clusters == 200


def test_constant_metric_has_zero_slope():
    frame = synthetic.exposures(np.random.default_rng(5), 20, 5, {})
    frame["p1_score"] = 300.0
    eff = tile_regression(frame, "Z")
    assert eff.slope == pytest.approx(0.0, abs=1e-9) and eff.se == pytest.approx(0.0, abs=1e-9)


def test_no_exposure_variance_is_undefined():
    frame = synthetic.exposures(np.random.default_rng(5), 20, 5, {})
    frame["p1_drawn_J"] = 1
    eff = tile_regression(frame, "J")
    assert not eff.defined and np.isnan(eff.slope)


def test_blank_column_and_played_exposure():
    frame = synthetic.exposures(np.random.default_rng(6), 100, 10, {"blank": 20.0})
    assert tile_regression(frame, "?").letter == "?"
    eff = tile_regression(frame, "?", exposure="played")
    assert abs(eff.slope - 20.0) <= 3 * eff.se
    assert len(tile_effects(frame)) == 27


def test_compare_identical_tables():
    frame = synthetic.exposures(np.random.default_rng(1), 50, 5, {"J": 2.0})
    out = compare_rulesets(frame, frame)
    assert (out["delta"] == 0).all()


def test_compare_planted_delta():
    rng = np.random.default_rng(3)
    scrabble = synthetic.exposures(rng, 200, 20, {"J": 0.0, "S": 8.0})
    wwf = synthetic.exposures(rng, 200, 20, {"J": 4.0, "S": 8.0})
    out = compare_rulesets(scrabble, wwf)
    assert abs(out.loc["J", "delta"] - 4.0) <= 3 * out.loc["J", "delta_se"]
    assert abs(out.loc["S", "delta"]) <= 3 * out.loc["S", "delta_se"]


# --------------------------------------------------------------------------
# position tables

def test_decile_boundaries():
    assert list(decile([0, 9, 10, 49, 50, 89, 90, 99, 100, 103])) == [0, 0, 1, 4, 5, 8, 9, 9, 9, 9]


def test_planted_blank_step():
    frame, seqs = synthetic.positional(np.random.default_rng(12), 2000, 5, blank_step=30.0)
    grid = blank_decile_table(frame, seqs, min_count=10)
    np.testing.assert_array_equal(grid.mean, grid.mean.T)
    m = grid.masked_mean()
    ff, fb, bb = np.nanmean(m[:5, :5]), np.nanmean(m[:5, 5:]), np.nanmean(m[5:, 5:])
    assert ff - fb == pytest.approx(30, abs=3)
    assert fb - bb == pytest.approx(30, abs=3)
    assert abs(grid.contrast - 30) <= 3 * grid.contrast_se
    # sequences and the position columns give the same grid
    np.testing.assert_allclose(blank_decile_table(frame).mean, grid.mean)


def test_flat_blank_grid():
    frame, seqs = synthetic.positional(np.random.default_rng(2), 300, 2, sd_order=0, sd_game=0)
    grid = blank_decile_table(frame, seqs, min_count=1)
    assert np.nanmax(np.abs(grid.mean)) == 0
    assert grid.count.sum() >= 600 and (grid.mask == (grid.count < 1)).all()


def test_blank_contrast_definition():
    # one game per arrangement; only games with at most one front-half blank count
    frame = pd.DataFrame({"order_id": [0, 1, 2, 3], "status": "ok", "p1_score": [100.0, 70.0, 40.0, 44.0],
                          "blank1_pos": [3, 10, 60, 70], "blank2_pos": [20, 80, 90, 99]})
    c, _ = blank_contrast(frame)
    assert c == pytest.approx(70 - 42)


def expected_s_lines(step):
    """E[p1_score | k-th S in decile d] when each of 4 S in the front half adds ``step``."""
    lines = np.zeros((4, 10))
    for k in range(1, 5):
        for d in range(10):
            num = den = 0.0
            for p in range(10 * d, 10 * d + 10):
                w = comb(p, k - 1) * comb(99 - p, 4 - k)
                later_front = (4 - k) * max(0, 49 - p) / (99 - p) if p < 99 else 0.0
                num += w * (k - 1 + (p < 50) + later_front)
                den += w
            lines[k - 1, d] = step * num / den if den else np.nan
    return lines


def test_planted_s_effect():
    step = 10.0
    frame, seqs = synthetic.positional(np.random.default_rng(21), 4000, 5, s_step=step, sd_order=5, sd_game=10)
    tab = s_position_table(frame, seqs, min_count=50)
    expect = expected_s_lines(step)
    gaps = tab.adjacent_gaps()
    want = (expect[1:] - expect[:-1])[:, [3, 4]]
    ok = ~np.isnan(gaps)
    assert ok.sum() >= 4
    np.testing.assert_allclose(gaps[ok], want[ok], atol=2.0)
    # later S tend to fall in the front half too, so the gap sits a little under the step
    assert np.all((want[ok] > 0.6 * step) & (want[ok] <= step))


def test_flat_s_lines():
    frame, seqs = synthetic.positional(np.random.default_rng(22), 300, 2, sd_order=0, sd_game=0)
    tab = s_position_table(frame, seqs, min_count=1)
    assert np.nanmax(np.abs(tab.mean)) == 0
    assert tab.to_frame().shape[0] == 40


def test_positions_need_sequences_for_other_letters():
    frame, _ = synthetic.positional(np.random.default_rng(1), 3, 1)
    with pytest.raises(AnalysisError):
        s_position_table(frame.drop(columns="s_positions").assign(s_positions=""))
