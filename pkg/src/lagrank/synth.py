"""Synthetic coupled-outbreak panels with known lag structure, for testing.

The target's series is a sum of lagged, scaled copies of designated source
candidates plus a seasonal term and noise; the remaining candidates are
independent bump trains. The generator returns the ground-truth lag map so
tests can score recovery.
"""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .ingest import WEEK, AlignedPanel, LocationRecord

TARGET_ID = "ic"
_BASE_LAT, _BASE_LON = -20.3, -40.3
_KM_PER_DEG_LAT = 111.32


@dataclass(frozen=True)
class SynthConfig:
    n_pics: int = 10
    source_lags: tuple[tuple[int, int], ...] = ()  # (pic index, lead weeks)
    noise: float = 0.3
    period: int = 52
    length: int = 520
    seed: int = 0
    ic_seasonal_amp: float = 0.0  # target's own seasonal bump height

    def validate(self) -> None:
        if self.n_pics < 1:
            raise ValidationError("need at least one candidate location")
        if self.length < 2 * self.period:
            raise ValidationError("series shorter than two seasonal periods")
        for idx, lag in self.source_lags:
            if not 0 <= idx < self.n_pics:
                raise ValidationError(f"source index {idx} out of range")
            if not 0 <= lag < self.length:
                raise ValidationError(f"lag {lag} outside [0, length)")


def pic_id(index: int) -> str:
    return f"pic{index:02d}"


def _bumps(length: int, centers, widths, amps) -> np.ndarray:
    t = np.arange(length, dtype=float)
    out = np.zeros(length)
    for c, w, a in zip(centers, widths, amps):
        out += a * np.exp(-0.5 * ((t - c) / w) ** 2)
    return out


def _seasonal_outbreaks(rng, length: int, period: int, amp: float) -> np.ndarray:
    """One outbreak per season, with jittered timing, width, and height."""
    n_seasons = length // period + 2
    phase = rng.uniform(0, period)
    centers = [phase + y * period + rng.normal(0, 3.0) for y in range(n_seasons)]
    widths = rng.uniform(4.0, 8.0, size=n_seasons)
    amps = amp * rng.uniform(0.6, 1.4, size=n_seasons)
    return _bumps(length, centers, widths, amps)


def _random_bumps(rng, length: int, period: int, amp: float) -> np.ndarray:
    """Unstructured outbreak train: bumps at uniform-random times."""
    n = max(2, int(round(length / period)) + rng.integers(-1, 2))
    centers = rng.uniform(0, length, size=n)
    widths = rng.uniform(3.0, 15.0, size=n)
    amps = amp * rng.uniform(0.4, 1.0, size=n)
    return _bumps(length, centers, widths, amps)


def _place(rng, radius_km: float) -> tuple[float, float]:
    bearing = rng.uniform(0, 2 * math.pi)
    dlat = radius_km * math.cos(bearing) / _KM_PER_DEG_LAT
    dlon = radius_km * math.sin(bearing) / (_KM_PER_DEG_LAT * math.cos(math.radians(_BASE_LAT)))
    return _BASE_LAT + dlat, _BASE_LON + dlon


def synth_panel(cfg: SynthConfig) -> tuple[AlignedPanel, dict[str, int]]:
    """Build a panel of 1 target + n_pics candidates; returns (panel, true lags).

    Sources sit closer to the target and run somewhat larger outbreaks than
    decoys, mimicking a regional seeding hub; decoys are independent of the
    target. Deterministic per seed.
    """
    cfg.validate()
    rng = np.random.default_rng(cfg.seed)
    lags = dict(cfg.source_lags)
    pad = max(lags.values(), default=0)
    n_ext = cfg.length + pad

    series: dict[str, np.ndarray] = {}
    locations: dict[str, LocationRecord] = {TARGET_ID: LocationRecord(TARGET_ID, "target", _BASE_LAT, _BASE_LON, 100_000)}
    truth: dict[str, int] = {}
    ic = np.zeros(cfg.length)
    for k in range(cfg.n_pics):
        loc = pic_id(k)
        if k in lags:
            amp = rng.uniform(25.0, 40.0)
            ext = _seasonal_outbreaks(rng, n_ext, cfg.period, amp)
            ext = ext + cfg.noise * amp * rng.normal(size=n_ext)
            series[loc] = ext[pad:]
            ic += ext[pad - lags[k] : pad - lags[k] + cfg.length]
            truth[loc] = lags[k]
            lat, lon = _place(rng, rng.uniform(10.0, 60.0))
        else:
            amp = rng.uniform(8.0, 30.0)
            ext = _random_bumps(rng, n_ext, cfg.period, amp)
            ext = ext + cfg.noise * amp * rng.normal(size=n_ext)
            series[loc] = ext[pad:]
            lat, lon = _place(rng, rng.uniform(40.0, 250.0))
        locations[loc] = LocationRecord(loc, loc, lat, lon, 100_000)

    if cfg.ic_seasonal_amp > 0.0:
        ic = ic + _seasonal_outbreaks(rng, cfg.length, cfg.period, cfg.ic_seasonal_amp)
    scale = max(np.abs(ic).max(), 1.0)
    ic = ic + cfg.noise * (scale / 3.0) * rng.normal(size=cfg.length)
    series[TARGET_ID] = ic

    start = np.datetime64(dt.date(2010, 1, 3), "D")
    weeks = start + np.arange(cfg.length) * WEEK
    ids = [TARGET_ID] + [pic_id(k) for k in range(cfg.n_pics)]
    panel = AlignedPanel(
        weeks=weeks,
        locations=locations,
        incidence={loc: series[loc] for loc in ids},
        cases={loc: series[loc] * (locations[loc].population / 1e5) for loc in ids},
        incidence_missing={loc: np.zeros(cfg.length, dtype=bool) for loc in ids},
    )
    return panel, truth
