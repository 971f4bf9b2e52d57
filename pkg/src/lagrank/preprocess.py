"""Weekly resampling, derived weather features, and split-aware normalization."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

#: the 12 weekly weather/environment features, in column order
WEEKLY_FEATURES = (
    "t_avg",        # weekly mean of daily average temperature
    "t_min",        # weekly minimum of daily minima
    "t_max",        # weekly maximum of daily maxima
    "precip",       # weekly total precipitation
    "dtr_avg",      # diurnal temperature range, weekly mean
    "dtr_min",      # diurnal temperature range, weekly min
    "dtr_max",      # diurnal temperature range, weekly max
    "rainy_days",   # days with precip > 0
    "rean_t",       # reanalysis temperature, weekly mean
    "rean_rh",      # reanalysis relative humidity, weekly mean
    "rean_pressure",
    "rean_pwat",    # precipitable water, weekly mean
)

SplitRanges = tuple[tuple[int, int], tuple[int, int], tuple[int, int]]


def _nanagg(fn, block: np.ndarray) -> float:
    vals = block[~np.isnan(block)]
    return float(fn(vals)) if vals.size else np.nan


def weekly_resample(
    dates: np.ndarray,
    daily: dict[str, np.ndarray],
    weeks: np.ndarray,
) -> tuple[dict[str, np.ndarray], dict[str, np.ndarray]]:
    """Down-sample one location's daily weather onto a weekly axis.

    ``daily`` maps variable name (t_avg, t_min, t_max, precip, rh, pressure,
    pwat, optionally rean_t) to arrays aligned with ``dates``; NaN marks a
    missing day. Emits the 12 ``WEEKLY_FEATURES`` columns plus masks that are
    True where a week had no contributing daily record. Four features are
    derived from the observed records: the weekly mean/min/max of the daily
    diurnal range (t_max - t_min) and the count of rainy days. When no
    ``rean_t`` column was supplied, the observed t_avg fills in.
    """
    n = len(weeks)
    week0 = weeks[0]
    day_idx = ((dates - week0) / np.timedelta64(7, "D")).astype(np.int64)
    in_range = (dates >= week0) & (day_idx >= 0) & (day_idx < n)

    def per_week(var: str) -> list[np.ndarray]:
        col = daily.get(var)
        if col is None:
            col = np.full(len(dates), np.nan)
        return [col[in_range & (day_idx == w)] for w in range(n)]

    t_avg, t_min, t_max = per_week("t_avg"), per_week("t_min"), per_week("t_max")
    precip = per_week("precip")
    rean_t_daily = daily.get("rean_t")
    rean_t = per_week("rean_t") if rean_t_daily is not None and not np.all(np.isnan(rean_t_daily)) else t_avg
    rh, pressure, pwat = per_week("rh"), per_week("pressure"), per_week("pwat")

    cols = {name: np.full(n, np.nan) for name in WEEKLY_FEATURES}
    for w in range(n):
        cols["t_avg"][w] = _nanagg(np.mean, t_avg[w])
        cols["t_min"][w] = _nanagg(np.min, t_min[w])
        cols["t_max"][w] = _nanagg(np.max, t_max[w])
        pr = precip[w][~np.isnan(precip[w])]
        if pr.size:
            cols["precip"][w] = pr.sum()
            cols["rainy_days"][w] = np.count_nonzero(pr > 0.0)
        dtr = t_max[w] - t_min[w]
        cols["dtr_avg"][w] = _nanagg(np.mean, dtr)
        cols["dtr_min"][w] = _nanagg(np.min, dtr)
        cols["dtr_max"][w] = _nanagg(np.max, dtr)
        cols["rean_t"][w] = _nanagg(np.mean, rean_t[w])
        cols["rean_rh"][w] = _nanagg(np.mean, rh[w])
        cols["rean_pressure"][w] = _nanagg(np.mean, pressure[w])
        cols["rean_pwat"][w] = _nanagg(np.mean, pwat[w])

    masks = {name: np.isnan(col) for name, col in cols.items()}
    n_masked = int(sum(m.sum() for m in masks.values()))
    if n_masked:
        warnings.warn(
            f"weekly resample: {n_masked} week-cells had no daily records and were masked",
            stacklevel=2,
        )
    return cols, masks


@dataclass
class NormStats:
    """Train-split mean/std per kept column, for normalizing and inverting.

    ``train_rows`` records which rows the statistics came from, so downstream
    consumers can assert no validation/test leakage.
    """

    mean: np.ndarray
    std: np.ndarray
    kept: list[int]
    dropped: list[int]
    train_rows: tuple[int, int]
    feature_names: list[str] | None = None


def zscore_split_normalize(
    X: np.ndarray,
    split: SplitRanges,
    feature_names: list[str] | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, NormStats]:
    """Z-score train/val/test slices of X using train-row statistics only.

    Standard deviations are population (N-divisor). Columns with zero train
    variance are dropped from all three outputs with a warning.
    """
    (tr0, tr1), (va0, va1), (te0, te1) = split
    if tr1 <= tr0:
        raise ValidationError("empty train split")
    train = X[tr0:tr1]
    mean = train.mean(axis=0)
    std = train.std(axis=0)  # ddof=0
    degenerate = std <= 1e-12 * np.maximum(1.0, np.abs(mean))
    kept = [i for i in range(X.shape[1]) if not degenerate[i]]
    dropped = [i for i in range(X.shape[1]) if degenerate[i]]
    if dropped:
        labels = [feature_names[i] if feature_names else str(i) for i in dropped]
        warnings.warn(f"dropping zero-variance columns: {', '.join(labels)}", stacklevel=2)
    stats = NormStats(
        mean=mean[kept],
        std=std[kept],
        kept=kept,
        dropped=dropped,
        train_rows=(tr0, tr1),
        feature_names=[feature_names[i] for i in kept] if feature_names else None,
    )
    xt = normalize_with(X[tr0:tr1], stats)
    xv = normalize_with(X[va0:va1], stats)
    xs = normalize_with(X[te0:te1], stats)
    return xt, xv, xs, stats


def normalize_with(X: np.ndarray, stats: NormStats) -> np.ndarray:
    return (X[:, stats.kept] - stats.mean) / stats.std


def denormalize(Xhat: np.ndarray, stats: NormStats) -> np.ndarray:
    return Xhat * stats.std + stats.mean


def denormalize_column(yhat: np.ndarray, stats: NormStats, col: int) -> np.ndarray:
    """Invert the z-score of one kept column (index into the kept set)."""
    return yhat * stats.std[col] + stats.mean[col]


def minmax_normalize(x: np.ndarray) -> np.ndarray:
    """Rescale a series to [0, 1]; a constant series maps to zeros."""
    x = np.asarray(x, dtype=float)
    lo, hi = x.min(), x.max()
    if hi == lo:
        warnings.warn("min-max normalize: constant series mapped to zeros", stacklevel=2)
        return np.zeros_like(x)
    return (x - lo) / (hi - lo)
