"""Sliding-window datasets, feature assembly, regional aggregation, export."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .geo import PredictorRanking
from .ingest import AlignedPanel, LocationRecord
from .preprocess import (
    WEEKLY_FEATURES,
    NormStats,
    SplitRanges,
    normalize_with,
    zscore_split_normalize,
)


@dataclass(frozen=True)
class DatasetConfig:
    t_in: int = 8
    t_out: int = 4
    batch_size: int = 32
    split: tuple[float, float, float] = (0.5, 0.3, 0.2)
    include_weather: bool = False

    def validate(self) -> None:
        if self.t_in < 1 or self.t_out < 1:
            raise ValidationError("t_in and t_out must be >= 1")
        if self.batch_size < 1:
            raise ValidationError("batch_size must be >= 1")


def split_panel(
    n_rows: int,
    ratios: tuple[float, float, float] = (0.5, 0.3, 0.2),
    min_rows: int = 1,
) -> SplitRanges:
    """Cut [0, n_rows) into contiguous train/val/test ranges.

    Sizes are floor(ratio * n) with the remainder handed to train. Every
    split must hold at least ``min_rows`` rows (t_in + t_out for sliding
    windows).
    """
    if any(r <= 0 for r in ratios):
        raise ValidationError(f"ratios must be positive, got {ratios}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValidationError(f"ratios must sum to 1, got {sum(ratios)}")
    sizes = [int(r * n_rows) for r in ratios]
    sizes[0] += n_rows - sum(sizes)
    if min(sizes) < min_rows:
        raise ValidationError(
            f"split sizes {sizes} for {n_rows} rows fall below the minimum of {min_rows}"
        )
    bounds = np.cumsum([0] + sizes)
    return ((int(bounds[0]), int(bounds[1])), (int(bounds[1]), int(bounds[2])), (int(bounds[2]), int(bounds[3])))


@dataclass
class FeatureMatrix:
    values: np.ndarray  # (T, F)
    feature_names: list[str]
    label_col: int
    target: str


@dataclass
class SlidingWindowDataset:
    """Time-ordered (input block, label block) samples grouped into batches.

    Sample i covers rows [i, i + t_in) as input and rows [i + t_in,
    i + t_in + t_out) of the label column as output, so consecutive samples
    differ by one time step and input/output blocks touch without
    overlapping. Order is never shuffled.
    """

    inputs: np.ndarray  # (n, t_in, F)
    labels: np.ndarray  # (n, t_out)
    t_in: int
    t_out: int
    batch_size: int
    split: str = ""
    stats_rows: tuple[int, int] | None = None  # NormStats provenance
    batches: list[tuple[int, int]] = field(default_factory=list)

    @property
    def n_samples(self) -> int:
        return self.inputs.shape[0]

    def iter_batches(self):
        for lo, hi in self.batches:
            yield self.inputs[lo:hi], self.labels[lo:hi]


def build_windows(
    rows: np.ndarray,
    label_col: int,
    t_in: int,
    t_out: int,
    batch_size: int = 32,
    split: str = "",
    stats_rows: tuple[int, int] | None = None,
) -> SlidingWindowDataset:
    """Slide a (t_in + t_out)-week window over one split's rows."""
    rows = np.asarray(rows, dtype=float)
    span = t_in + t_out
    n = len(rows) - span + 1
    if n < 1:
        raise ValidationError(f"split of {len(rows)} rows cannot fit t_in+t_out={span}")
    inputs = np.stack([rows[i : i + t_in] for i in range(n)])
    labels = np.stack([rows[i + t_in : i + span, label_col] for i in range(n)])
    batches = [(lo, min(lo + batch_size, n)) for lo in range(0, n, batch_size)]
    return SlidingWindowDataset(
        inputs=inputs,
        labels=labels,
        t_in=t_in,
        t_out=t_out,
        batch_size=batch_size,
        split=split,
        stats_rows=stats_rows,
        batches=batches,
    )


def _fill_gaps(col: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Linearly interpolate masked cells from observed neighbors."""
    if not mask.any():
        return col
    if mask.all():
        raise ValidationError("weather column has no observed weeks")
    idx = np.arange(len(col))
    out = col.copy()
    out[mask] = np.interp(idx[mask], idx[~mask], col[~mask])
    return out


def assemble_features(
    panel: AlignedPanel,
    target_ic: str,
    ranking: PredictorRanking,
    n_pic: int,
    include_weather: bool = False,
) -> FeatureMatrix:
    """Stack [weather columns?] + target incidence + top-n ranked candidates.

    The label is the target incidence column. Candidate columns follow the
    ranking's order, never the caller's. Masked weather cells are linearly
    interpolated so the matrix is NaN-free.
    """
    if target_ic not in panel.incidence:
        raise ValidationError(f"target {target_ic!r} not in panel")
    order = ranking.pic_order()
    if n_pic < 0 or n_pic > len(order):
        raise ValidationError(f"n_pic={n_pic} exceeds ranking of {len(order)} candidates")
    columns: list[np.ndarray] = []
    names: list[str] = []
    if include_weather:
        weather = panel.weather.get(target_ic)
        if not weather:
            raise ValidationError(f"no weather columns for target {target_ic!r}")
        for var in WEEKLY_FEATURES:
            columns.append(_fill_gaps(weather[var], panel.weather_missing[target_ic][var]))
            names.append(f"wx:{var}")
    label_col = len(columns)
    columns.append(panel.incidence[target_ic])
    names.append(f"inc:{target_ic}")
    for pic in order[:n_pic]:
        columns.append(panel.incidence[pic])
        names.append(f"inc:{pic}")
    return FeatureMatrix(
        values=np.column_stack(columns),
        feature_names=names,
        label_col=label_col,
        target=target_ic,
    )


def aggregate_region(panel: AlignedPanel, member_ids: list[str]) -> np.ndarray:
    """Population-weighted regional incidence, as per-100k of the combined population."""
    if not member_ids:
        raise ValidationError("empty region membership")
    missing = [m for m in member_ids if m not in panel.incidence]
    if missing:
        raise ValidationError(f"region members not in panel: {', '.join(missing)}")
    members = sorted(set(member_ids))  # canonical order: permutation-invariant sums
    total_pop = sum(panel.locations[m].population for m in members)
    counts = np.zeros(panel.n_weeks)
    for m in members:
        counts = counts + panel.incidence[m] * (panel.locations[m].population / 1e5)
    return counts * (1e5 / total_pop)


def region_pseudo_location(panel: AlignedPanel, region_id: str, member_ids: list[str]) -> LocationRecord:
    """A stand-in location at the members' population-weighted centroid."""
    total_pop = sum(panel.locations[m].population for m in member_ids)
    lat = sum(panel.locations[m].latitude * panel.locations[m].population for m in member_ids) / total_pop
    lon = sum(panel.locations[m].longitude * panel.locations[m].population for m in member_ids) / total_pop
    return LocationRecord(region_id, region_id, lat, lon, total_pop)


def with_aggregate_target(panel: AlignedPanel, region_id: str, member_ids: list[str]) -> AlignedPanel:
    """Panel restricted to region members plus a pseudo-location holding the aggregate."""
    if region_id in panel.incidence:
        raise ValidationError(f"panel already has a location named {region_id!r}")
    series = aggregate_region(panel, member_ids)
    rec = region_pseudo_location(panel, region_id, member_ids)
    members = set(member_ids)
    keep = [loc for loc in panel.location_ids() if loc in members]
    sub = lambda d: {loc: d[loc] for loc in keep if loc in d}  # noqa: E731
    return AlignedPanel(
        weeks=panel.weeks,
        locations={**sub(panel.locations), region_id: rec},
        incidence={**sub(panel.incidence), region_id: series},
        cases={**sub(panel.cases), region_id: series * (rec.population / 1e5)},
        incidence_missing={
            **sub(panel.incidence_missing),
            region_id: np.zeros(panel.n_weeks, dtype=bool),
        },
        weather=sub(panel.weather),
        weather_missing=sub(panel.weather_missing),
    )


@dataclass
class PreparedData:
    """Normalized train/val/test sliding-window datasets plus provenance."""

    train: SlidingWindowDataset
    val: SlidingWindowDataset
    test: SlidingWindowDataset
    stats: NormStats
    feature_names: list[str]
    label_col: int
    split_ranges: SplitRanges
    matrix: FeatureMatrix  # pre-normalization


def prepare_datasets(
    panel: AlignedPanel,
    target_ic: str,
    ranking: PredictorRanking,
    n_pic: int,
    cfg: DatasetConfig,
) -> PreparedData:
    """Assemble, split, normalize, and window one experiment's data."""
    cfg.validate()
    fm = assemble_features(panel, target_ic, ranking, n_pic, cfg.include_weather)
    span = cfg.t_in + cfg.t_out
    ranges = split_panel(fm.values.shape[0], cfg.split, min_rows=span)
    xt, xv, xs, stats = zscore_split_normalize(fm.values, ranges, fm.feature_names)
    if fm.label_col not in stats.kept:
        raise ValidationError("target incidence is constant over the train split")
    label_col = stats.kept.index(fm.label_col)
    mk = lambda rows, tag: build_windows(  # noqa: E731
        rows, label_col, cfg.t_in, cfg.t_out, cfg.batch_size, tag, stats.train_rows
    )
    return PreparedData(
        train=mk(xt, "train"),
        val=mk(xv, "val"),
        test=mk(xs, "test"),
        stats=stats,
        feature_names=stats.feature_names or [],
        label_col=label_col,
        split_ranges=ranges,
        matrix=fm,
    )


def export_dataset(
    out_dir,
    panel: AlignedPanel,
    target_ic: str,
    ranking: PredictorRanking,
    cfg: DatasetConfig,
    seed: int = 0,
    config_hash: str = "",
    n_pic: int | None = None,
) -> Path:
    """Write features.csv + manifest.json for out-of-process harnesses.

    The matrix holds the full normalized panel at ``n_pic`` candidate columns
    (all ranked candidates by default); consumers slice splits and candidate
    subsets per the manifest and must not re-normalize.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if n_pic is None:
        n_pic = len(ranking.rows)
    prep = prepare_datasets(panel, target_ic, ranking, n_pic, cfg)
    # full normalized matrix, train stats applied everywhere
    x_all = normalize_with(prep.matrix.values, prep.stats)
    names = prep.feature_names
    with open(out / "features.csv", "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(names)
        for row in x_all:
            writer.writerow([f"{v:.9f}" for v in row])
    label_name = names[prep.label_col]
    pic_cols = [f"inc:{pic}" for pic in ranking.pic_order()[:n_pic] if f"inc:{pic}" in names]
    base_cols = [c for c in names if c != label_name and c not in pic_cols]
    (tr, va, te) = prep.split_ranges
    manifest = {
        "t_in": cfg.t_in,
        "t_out": cfg.t_out,
        "batch_size": cfg.batch_size,
        "columns": names,
        "label": label_name,
        "pic_columns": pic_cols,
        "base_columns": base_cols,
        "splits": {"train": list(tr), "val": list(va), "test": list(te)},
        "norm": {
            "mean": {n: float(m) for n, m in zip(names, prep.stats.mean)},
            "std": {n: float(s) for n, s in zip(names, prep.stats.std)},
            "train_rows": list(prep.stats.train_rows),
        },
        "ranking": {
            "target": ranking.target,
            "order": ranking.pic_order(),
            "windowing": ranking.windowing,
            "correlation": ranking.correlation,
        },
        "seed": seed,
        "config_hash": config_hash,
    }
    with open(out / "manifest.json", "w", encoding="utf-8") as handle:
        json.dump(manifest, handle, indent=2, sort_keys=True)
        handle.write("\n")
    return out
