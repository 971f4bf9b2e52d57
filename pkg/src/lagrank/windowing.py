"""Correlation-window allocation: fixed-count intervals or outbreak detection."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import savgol_filter

from .errors import ValidationError
from .preprocess import minmax_normalize


@dataclass(frozen=True)
class SmoothingConfig:
    window_length: int = 11  # weeks; odd
    polyorder: int = 3

    def validate(self) -> None:
        if self.window_length <= 0 or self.window_length % 2 == 0:
            raise ValidationError(f"window_length must be odd and positive, got {self.window_length}")
        if not 0 <= self.polyorder < self.window_length:
            raise ValidationError(
                f"polyorder must be in [0, window_length), got {self.polyorder}"
            )


@dataclass(frozen=True)
class WindowSet:
    """Sorted, disjoint [start, end) week intervals plus how they were made."""

    intervals: tuple[tuple[int, int], ...]
    method: str  # "fixed" | "detected"
    params: dict = field(default_factory=dict, hash=False, compare=False)

    def __len__(self) -> int:
        return len(self.intervals)

    def __iter__(self):
        return iter(self.intervals)


def fixed_windows(n_weeks: int, count: int) -> WindowSet:
    """Split [0, n_weeks) into ``count`` contiguous windows.

    Lengths are floor(T/count) with the remainder spread one week at a time
    from the front, so earlier windows may be one week longer.
    """
    if count < 1:
        raise ValidationError(f"window count must be >= 1, got {count}")
    if count > n_weeks:
        raise ValidationError(f"cannot cut {n_weeks} weeks into {count} windows")
    base, extra = divmod(n_weeks, count)
    intervals = []
    start = 0
    for m in range(count):
        length = base + (1 if m < extra else 0)
        intervals.append((start, start + length))
        start += length
    return WindowSet(tuple(intervals), "fixed", {"m_f": count})


def savgol_smooth(series: np.ndarray, cfg: SmoothingConfig = SmoothingConfig()) -> np.ndarray:
    """Savitzky-Golay least-squares smoothing, same length as the input.

    Edges are handled by mirroring half a filter window beyond each end.
    """
    cfg.validate()
    series = np.asarray(series, dtype=float)
    if len(series) < cfg.window_length:
        raise ValidationError(
            f"series length {len(series)} shorter than filter window {cfg.window_length}"
        )
    return savgol_filter(series, cfg.window_length, cfg.polyorder, mode="mirror")


def detect_windows(series01: np.ndarray, i_min: float = 0.05, min_length: int = 10) -> WindowSet:
    """Find outbreak windows on a smoothed, [0,1]-normalized incidence curve.

    A window is a maximal run of weeks with value strictly above ``i_min``,
    kept only when the run spans at least ``min_length`` weeks. An empty
    result is valid.
    """
    series01 = np.asarray(series01, dtype=float)
    if min_length < 1:
        raise ValidationError(f"min_length must be >= 1, got {min_length}")
    above = series01 > i_min
    intervals: list[tuple[int, int]] = []
    start = None
    for t, hot in enumerate(above):
        if hot and start is None:
            start = t
        elif not hot and start is not None:
            if t - start >= min_length:
                intervals.append((start, t))
            start = None
    if start is not None and len(above) - start >= min_length:
        intervals.append((start, len(above)))
    return WindowSet(tuple(intervals), "detected", {"i_min": i_min, "min_length": min_length})


@dataclass(frozen=True)
class WindowingConfig:
    method: str = "fixed"  # "fixed" | "detect"
    fixed_count: int = 20
    i_min: float = 0.05
    min_length: int = 10
    smoothing: SmoothingConfig = SmoothingConfig()

    def validate(self) -> None:
        if self.method not in ("fixed", "detect"):
            raise ValidationError(f"unknown windowing method {self.method!r}")
        self.smoothing.validate()

    def params(self) -> dict:
        if self.method == "fixed":
            return {"method": "fixed", "m_f": self.fixed_count}
        return {
            "method": "detect",
            "i_min": self.i_min,
            "min_length": self.min_length,
            "smooth_window": self.smoothing.window_length,
            "smooth_polyorder": self.smoothing.polyorder,
        }


def make_windows(series: np.ndarray, cfg: WindowingConfig) -> WindowSet:
    """Allocate correlation windows over the target's incidence series.

    Fixed mode ignores the values; detect mode smooths the raw series, then
    min-max normalizes it (the order keeps the detection input inside [0,1]
    regardless of filter overshoot) and thresholds it.
    """
    cfg.validate()
    if cfg.method == "fixed":
        return fixed_windows(len(series), cfg.fixed_count)
    curve = minmax_normalize(savgol_smooth(series, cfg.smoothing))
    return detect_windows(curve, cfg.i_min, cfg.min_length)
