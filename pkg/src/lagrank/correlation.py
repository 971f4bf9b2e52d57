"""Windowed time-shifted Pearson cross-correlation and the correlation weight.

For a target series i0 and a candidate series ik, every window w and shift
theta gets R[w][theta] = pearson(i0 over w, ik over w shifted back by theta).
Positive theta means the candidate's curve runs ahead of the target's. Each
window row reduces to a peak shift, a strength around the peak, and a
predictor probability that is zeroed when the candidate lags; probabilities
average across windows and min-max normalize across candidates into the
correlation weight.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .windowing import WindowSet


@dataclass(frozen=True)
class CorrelationConfig:
    theta_max: int = 8   # weeks of shift swept in each direction
    theta_e: int = 1     # half-width of the averaging band around the peak
    min_overlap: int = 3  # fewest paired samples for a defined cell

    def validate(self) -> None:
        if self.theta_max < 1:
            raise ValidationError(f"theta_max must be >= 1, got {self.theta_max}")
        if self.theta_e < 0:
            raise ValidationError(f"theta_e must be >= 0, got {self.theta_e}")


def pearson(x: np.ndarray, y: np.ndarray) -> float | None:
    """Product-moment correlation; None when either side has zero variance.

    Zero-variance input makes the coefficient undefined, which is distinct
    from "uncorrelated": coercing it to 0 would fabricate anti-signal.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) != len(y):
        raise ValidationError(f"length mismatch: {len(x)} vs {len(y)}")
    if len(x) < 2:
        raise ValidationError("need at least 2 samples")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        return None
    r = float(dx @ dy) / np.sqrt(sxx * syy)
    return float(min(1.0, max(-1.0, r)))


@dataclass
class PhasedCorrelationMatrix:
    """R[m][j] over windows m and shifts theta = j - theta_max; invalid cells masked."""

    values: np.ndarray  # (M, 2*theta_max + 1), NaN where invalid
    valid: np.ndarray   # bool, same shape
    theta_max: int
    windows: WindowSet

    @property
    def thetas(self) -> np.ndarray:
        return np.arange(-self.theta_max, self.theta_max + 1)

    @property
    def n_windows(self) -> int:
        return self.values.shape[0]


def shifted_matrix(
    i0: np.ndarray,
    ik: np.ndarray,
    windows: WindowSet,
    theta_max: int = 8,
    min_overlap: int = 3,
) -> PhasedCorrelationMatrix:
    """Correlate the target over each window against shifted candidate samples.

    The window anchors the target; candidate samples ik[t - theta] come from
    the full series, so a shift only loses samples where it runs off the
    series ends. Cells with fewer than max(3, min_overlap) paired samples, or
    zero variance on either side, are masked invalid.
    """
    i0 = np.asarray(i0, dtype=float)
    ik = np.asarray(ik, dtype=float)
    if len(i0) != len(ik):
        raise ValidationError(f"series length mismatch: {len(i0)} vs {len(ik)}")
    if theta_max < 1:
        raise ValidationError(f"theta_max must be >= 1, got {theta_max}")
    need = max(3, min_overlap)
    n = len(i0)
    shifts = np.arange(-theta_max, theta_max + 1)
    values = np.full((len(windows), len(shifts)), np.nan)
    valid = np.zeros_like(values, dtype=bool)
    for m, (w_start, w_end) in enumerate(windows):
        if not 0 <= w_start < w_end <= n:
            raise ValidationError(f"window [{w_start}, {w_end}) outside series of length {n}")
        for j, theta in enumerate(shifts):
            lo = max(w_start, theta)          # need 0 <= t - theta
            hi = min(w_end, n + theta)        # need t - theta < n
            if hi - lo < need:
                continue
            r = pearson(i0[lo:hi], ik[lo - theta : hi - theta])
            if r is not None:
                values[m, j] = r
                valid[m, j] = True
    return PhasedCorrelationMatrix(values, valid, theta_max, windows)


@dataclass
class CorrelationReduction:
    """Per-window peak shift, strength, and predictor probability for one pair."""

    theta_peak: list[int | None]  # None where the whole row is masked
    strength: np.ndarray          # NaN where undefined
    probability: np.ndarray       # (M,), 0 for lagging peaks and masked rows
    gamma_hat: float              # mean probability across windows


def reduce_matrix(matrix: PhasedCorrelationMatrix, theta_e: int = 1) -> CorrelationReduction:
    """Reduce a correlation matrix row-by-row.

    Peak = argmax over defined cells; ties prefer the smallest |theta| and,
    among those, the non-negative one. Strength = mean of R over theta within
    theta_e of the peak, restricted to cells that exist and are defined. The
    probability keeps the strength only when the peak is at a non-negative
    shift; rows with no defined cell contribute 0 but still count in the
    window mean.
    """
    if theta_e < 0:
        raise ValidationError(f"theta_e must be >= 0, got {theta_e}")
    tmax = matrix.theta_max
    m_windows = matrix.n_windows
    peaks: list[int | None] = []
    strengths = np.full(m_windows, np.nan)
    probs = np.zeros(m_windows)
    for m in range(m_windows):
        row = matrix.values[m]
        ok = matrix.valid[m]
        if not ok.any():
            peaks.append(None)
            continue
        best = row[ok].max()
        candidates = [j - tmax for j in np.flatnonzero(ok & (row == best))]
        theta_peak = min(candidates, key=lambda t: (abs(t), t < 0))
        peaks.append(int(theta_peak))
        lo = max(-tmax, theta_peak - theta_e)
        hi = min(tmax, theta_peak + theta_e)
        band = np.arange(lo, hi + 1) + tmax
        band = band[ok[band]]
        strengths[m] = row[band].mean()
        if theta_peak >= 0:
            probs[m] = strengths[m]
    return CorrelationReduction(
        theta_peak=peaks,
        strength=strengths,
        probability=probs,
        gamma_hat=float(probs.mean()) if m_windows else 0.0,
    )


def minmax_unit(values: np.ndarray, degenerate: float = 1.0) -> np.ndarray:
    """Min-max rescale across candidates; all-equal inputs map to ``degenerate``.

    The degenerate default of 1 keeps a lone or tied candidate from being
    zeroed out of the combined ranking metric.
    """
    values = np.asarray(values, dtype=float)
    lo, hi = values.min(), values.max()
    if hi == lo:
        return np.full_like(values, degenerate)
    return (values - lo) / (hi - lo)


def correlation_weights(reductions: list[CorrelationReduction]) -> np.ndarray:
    """Normalize mean predictor probabilities across candidates into [0, 1]."""
    if not reductions:
        raise ValidationError("no candidates to weight")
    gamma_hat = np.array([r.gamma_hat for r in reductions])
    return minmax_unit(gamma_hat)


def write_matrix_csv(matrix: PhasedCorrelationMatrix, path, metadata: str | None = None) -> None:
    """Dump per-cell values as ``m,theta,r,valid`` rows for external heatmaps."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        if metadata:
            handle.write(f"# {metadata}\n")
        writer = csv.writer(handle)
        writer.writerow(["m", "theta", "r", "valid"])
        for m in range(matrix.n_windows):
            for j, theta in enumerate(matrix.thetas):
                ok = bool(matrix.valid[m, j])
                writer.writerow([m, theta, f"{matrix.values[m, j]:.9f}" if ok else "", int(ok)])
