import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lagrank.correlation import reduce_matrix, shifted_matrix
from lagrank.dataset import (
    DatasetConfig,
    aggregate_region,
    assemble_features,
    build_windows,
    export_dataset,
    prepare_datasets,
    region_pseudo_location,
    split_panel,
    with_aggregate_target,
)
from lagrank.errors import ValidationError
from lagrank.geo import build_ranking, rank_pics
from lagrank.synth import TARGET_ID, SynthConfig, pic_id, synth_panel
from lagrank.windowing import WindowingConfig, fixed_windows

from conftest import make_panel


def tiny_ranking(target, ids):
    n = len(ids)
    return build_ranking(
        target,
        ids,
        np.linspace(1.0, 0.5, n),
        np.linspace(1.0, 0.0, n) if n > 1 else np.array([1.0]),
        np.linspace(1.0, 0.0, n) if n > 1 else np.array([1.0]),
        np.arange(1.0, n + 1.0),
    )


def test_split_frozen_ratios():
    assert split_panel(100) == ((0, 50), (50, 80), (80, 100))


def test_split_remainder_goes_to_train():
    assert split_panel(101) == ((0, 51), (51, 81), (81, 101))


def test_split_too_small_for_windows():
    with pytest.raises(ValidationError):
        split_panel(10, min_rows=12)


def test_split_validates_ratios():
    with pytest.raises(ValidationError):
        split_panel(100, (0.5, 0.5, 0.2))
    with pytest.raises(ValidationError):
        split_panel(100, (1.0, -0.5, 0.5))


def test_build_windows_sample_count():
    rows = np.arange(15.0)[:, None]
    ds = build_windows(rows, 0, t_in=8, t_out=4)
    assert ds.n_samples == 4  # 15 - 12 + 1


def test_build_windows_single_sample():
    ds = build_windows(np.arange(12.0)[:, None], 0, t_in=8, t_out=4)
    assert ds.n_samples == 1
    assert ds.inputs[0][:, 0].tolist() == list(range(8))
    assert ds.labels[0].tolist() == [8.0, 9.0, 10.0, 11.0]


def test_build_windows_too_short():
    with pytest.raises(ValidationError):
        build_windows(np.arange(11.0)[:, None], 0, t_in=8, t_out=4)


def test_build_windows_batches_keep_short_tail():
    rows = np.arange(60.0)[:, None]
    ds = build_windows(rows, 0, t_in=4, t_out=2, batch_size=32)
    assert ds.n_samples == 55
    assert ds.batches == [(0, 32), (32, 55)]
    got = list(ds.iter_batches())
    assert got[0][0].shape == (32, 4, 1)
    assert got[1][0].shape == (23, 4, 1)


def test_build_windows_deterministic():
    rng = np.random.default_rng(4)
    rows = rng.normal(size=(40, 3))
    a = build_windows(rows, 1, 8, 4)
    b = build_windows(rows, 1, 8, 4)
    assert np.array_equal(a.inputs, b.inputs) and np.array_equal(a.labels, b.labels)


@settings(max_examples=40, deadline=None)
@given(
    n=st.integers(min_value=13, max_value=80),
    t_in=st.integers(min_value=1, max_value=8),
    t_out=st.integers(min_value=1, max_value=4),
)
def test_build_windows_blocks_adjacent_disjoint(n, t_in, t_out):
    rows = np.arange(float(n))[:, None]
    ds = build_windows(rows, 0, t_in, t_out)
    assert ds.n_samples == n - (t_in + t_out) + 1
    for i in range(ds.n_samples):
        # output block starts exactly where the input block ends
        assert ds.labels[i][0] == ds.inputs[i][-1, 0] + 1.0
        if i:
            assert ds.inputs[i][0, 0] == ds.inputs[i - 1][0, 0] + 1.0


def panel_with_three():
    rng = np.random.default_rng(8)
    series = {
        "ic": rng.uniform(0, 20, 100),
        "p1": rng.uniform(0, 20, 100),
        "p2": rng.uniform(0, 20, 100),
    }
    return make_panel(series)


def test_assemble_baseline_has_target_only():
    panel = panel_with_three()
    ranking = tiny_ranking("ic", ["p1", "p2"])
    fm = assemble_features(panel, "ic", ranking, 0)
    assert fm.feature_names == ["inc:ic"]
    assert fm.label_col == 0
    assert fm.values[:, 0] == pytest.approx(panel.incidence["ic"])


def test_assemble_appends_in_rank_order():
    panel = panel_with_three()
    ranking = tiny_ranking("ic", ["p2", "p1"])  # p2 ranked first
    fm = assemble_features(panel, "ic", ranking, 2)
    assert fm.feature_names == ["inc:ic", "inc:p2", "inc:p1"]


def test_assemble_rank_order_wins_over_panel_order():
    panel = panel_with_three()
    a = assemble_features(panel, "ic", tiny_ranking("ic", ["p2", "p1"]), 2)
    reordered = make_panel(
        {k: panel.incidence[k] for k in ["p2", "p1", "ic"]},
    )
    b = assemble_features(reordered, "ic", tiny_ranking("ic", ["p2", "p1"]), 2)
    assert a.feature_names == b.feature_names
    assert np.array_equal(a.values, b.values)


def test_assemble_rejects_oversized_n_pic():
    panel = panel_with_three()
    with pytest.raises(ValidationError):
        assemble_features(panel, "ic", tiny_ranking("ic", ["p1", "p2"]), 3)


def test_assemble_weather_columns_interpolated():
    panel = panel_with_three()
    n = panel.n_weeks
    rng = np.random.default_rng(1)
    cols = {}
    masks = {}
    from lagrank.preprocess import WEEKLY_FEATURES

    for var in WEEKLY_FEATURES:
        col = rng.uniform(10, 20, n)
        mask = np.zeros(n, dtype=bool)
        mask[5] = True
        col[5] = np.nan
        cols[var], masks[var] = col, mask
    panel.weather["ic"] = cols
    panel.weather_missing["ic"] = masks
    fm = assemble_features(panel, "ic", tiny_ranking("ic", ["p1"]), 1, include_weather=True)
    assert fm.feature_names[:2] == ["wx:t_avg", "wx:t_min"]
    assert fm.label_col == 12
    assert not np.isnan(fm.values).any()
    expected = (cols["t_avg"][4] + cols["t_avg"][6]) / 2
    assert fm.values[5, 0] == pytest.approx(expected)


def test_assemble_weather_missing_for_target_errors():
    panel = panel_with_three()
    with pytest.raises(ValidationError, match="weather"):
        assemble_features(panel, "ic", tiny_ranking("ic", ["p1"]), 1, include_weather=True)


def test_aggregate_single_member_identity():
    panel = panel_with_three()
    got = aggregate_region(panel, ["p1"])
    assert got == pytest.approx(panel.incidence["p1"])


def test_aggregate_equal_populations_average():
    panel = make_panel({"a": np.array([2.0, 4.0]), "b": np.array([6.0, 0.0])})
    assert aggregate_region(panel, ["a", "b"]) == pytest.approx([4.0, 2.0])


def test_aggregate_matches_raw_count_oracle():
    rng = np.random.default_rng(12)
    pops = {"a": 50_000, "b": 125_000, "c": 400_000}
    series = {k: rng.uniform(0, 30, 40) for k in pops}
    panel = make_panel(series, populations=pops)
    got = aggregate_region(panel, ["a", "b", "c"])
    raw_counts = sum(series[k] * pops[k] / 1e5 for k in pops)
    want = raw_counts / sum(pops.values()) * 1e5
    assert got == pytest.approx(want, rel=1e-9)


def test_aggregate_permutation_invariant():
    panel = panel_with_three()
    a = aggregate_region(panel, ["ic", "p1", "p2"])
    b = aggregate_region(panel, ["p2", "ic", "p1"])
    assert np.array_equal(a, b)


def test_aggregate_empty_membership_errors():
    with pytest.raises(ValidationError):
        aggregate_region(panel_with_three(), [])


def test_region_pseudo_location_weighted_centroid():
    panel = make_panel(
        {"a": np.zeros(4), "b": np.zeros(4)},
        coords={"a": (-20.0, -40.0), "b": (-22.0, -42.0)},
        populations={"a": 300_000, "b": 100_000},
    )
    rec = region_pseudo_location(panel, "region:x", ["a", "b"])
    assert rec.latitude == pytest.approx(-20.5)
    assert rec.longitude == pytest.approx(-40.5)
    assert rec.population == 400_000


def test_with_aggregate_target_builds_rankable_panel():
    cfg = SynthConfig(n_pics=4, source_lags=((0, 2),), noise=0.3, length=260, seed=2)
    panel, _ = synth_panel(cfg)
    members = [pic_id(k) for k in range(4)]
    panel2 = with_aggregate_target(panel, "region:r1", members)
    assert set(panel2.location_ids()) == set(members) | {"region:r1"}
    ranking = rank_pics(panel2, "region:r1", WindowingConfig(method="fixed", fixed_count=5))
    assert len(ranking.rows) == 4


def test_synth_deterministic_by_seed():
    cfg = SynthConfig(n_pics=5, source_lags=((1, 2),), noise=0.5, length=260, seed=42)
    p1, t1 = synth_panel(cfg)
    p2, t2 = synth_panel(cfg)
    assert t1 == t2
    for loc in p1.location_ids():
        assert np.array_equal(p1.incidence[loc], p2.incidence[loc])


def test_synth_noiseless_source_peaks_at_its_lag():
    cfg = SynthConfig(n_pics=3, source_lags=((0, 3),), noise=0.0, length=260, seed=5)
    panel, truth = synth_panel(cfg)
    assert truth == {pic_id(0): 3}
    windows = fixed_windows(260, 5)
    matrix = shifted_matrix(panel.incidence[TARGET_ID], panel.incidence[pic_id(0)], windows)
    red = reduce_matrix(matrix, theta_e=0)
    active = [p for p in red.theta_peak if p is not None]
    assert active and all(p == 3 for p in active)


def test_synth_zero_sources_uncorrelated():
    vals = []
    for seed in range(30):
        cfg = SynthConfig(n_pics=6, source_lags=(), noise=1.0, length=260, seed=seed, ic_seasonal_amp=5.0)
        panel, truth = synth_panel(cfg)
        assert truth == {}
        windows = fixed_windows(260, 5)
        for k in range(6):
            red = reduce_matrix(
                shifted_matrix(panel.incidence[TARGET_ID], panel.incidence[pic_id(k)], windows)
            )
            vals.append(abs(red.gamma_hat))
    assert np.mean(vals) < 0.2


def test_prepare_datasets_splits_share_stats():
    cfg = SynthConfig(n_pics=3, source_lags=((0, 1),), noise=0.3, length=200, seed=1)
    panel, _ = synth_panel(cfg)
    ranking = rank_pics(panel, TARGET_ID, WindowingConfig(method="fixed", fixed_count=4))
    prep = prepare_datasets(panel, TARGET_ID, ranking, 2, DatasetConfig())
    assert prep.train.stats_rows == prep.val.stats_rows == prep.test.stats_rows == (0, 100)
    assert prep.train.split == "train" and prep.test.split == "test"
    assert prep.train.inputs.shape[2] == 3  # target + 2 candidates


def test_export_dataset_files_and_manifest(tmp_path):
    cfg = SynthConfig(n_pics=3, source_lags=((0, 1),), noise=0.3, length=200, seed=1)
    panel, _ = synth_panel(cfg)
    ranking = rank_pics(panel, TARGET_ID, WindowingConfig(method="fixed", fixed_count=4))
    out = export_dataset(tmp_path / "export", panel, TARGET_ID, ranking, DatasetConfig(), seed=7)
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["t_in"] == 8 and manifest["t_out"] == 4 and manifest["batch_size"] == 32
    assert manifest["label"] == "inc:ic"
    assert manifest["pic_columns"] == [f"inc:{p}" for p in ranking.pic_order()]
    assert manifest["splits"]["train"] == [0, 100]
    assert manifest["seed"] == 7

    lines = (out / "features.csv").read_text().splitlines()
    assert lines[0].split(",") == manifest["columns"]
    assert len(lines) == 1 + 200
    # normalized with train stats: recompute first column mean over train rows
    data = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
    assert data[:100].mean(axis=0) == pytest.approx(np.zeros(data.shape[1]), abs=1e-7)
    std_train = data[:100].std(axis=0)
    assert std_train == pytest.approx(np.ones_like(std_train), abs=1e-6)
