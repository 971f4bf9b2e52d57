"""Geodesic distances, distance/prevalence weights, and the predictor ranking."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .correlation import (
    CorrelationConfig,
    correlation_weights,
    minmax_unit,
    reduce_matrix,
    shifted_matrix,
)
from .errors import ValidationError
from .ingest import AlignedPanel, LocationRecord
from .windowing import WindowingConfig, make_windows

# WGS84 ellipsoid
_A = 6378137.0
_B = 6356752.314245
_F = 1.0 / 298.257223563
_MEAN_RADIUS = 6371008.8  # meters


def _vincenty_m(lat1: float, lon1: float, lat2: float, lon2: float) -> float | None:
    """Vincenty inverse geodesic in meters; None when the iteration diverges.

    Divergence only happens for near-antipodal pairs.
    """
    u1 = math.atan((1.0 - _F) * math.tan(math.radians(lat1)))
    u2 = math.atan((1.0 - _F) * math.tan(math.radians(lat2)))
    big_l = math.radians(((lon2 - lon1 + 540.0) % 360.0) - 180.0)
    sin_u1, cos_u1 = math.sin(u1), math.cos(u1)
    sin_u2, cos_u2 = math.sin(u2), math.cos(u2)

    lam = big_l
    for _ in range(200):
        sin_lam, cos_lam = math.sin(lam), math.cos(lam)
        sin_sigma = math.sqrt(
            (cos_u2 * sin_lam) ** 2 + (cos_u1 * sin_u2 - sin_u1 * cos_u2 * cos_lam) ** 2
        )
        cos_sigma = sin_u1 * sin_u2 + cos_u1 * cos_u2 * cos_lam
        if sin_sigma == 0.0:
            return 0.0 if cos_sigma > 0.0 else None  # coincident vs antipodal
        sigma = math.atan2(sin_sigma, cos_sigma)
        sin_alpha = min(1.0, max(-1.0, cos_u1 * cos_u2 * sin_lam / sin_sigma))
        cos_sq_alpha = 1.0 - sin_alpha * sin_alpha
        if cos_sq_alpha == 0.0:
            cos_2sigma_m = 0.0  # equatorial line
        else:
            cos_2sigma_m = cos_sigma - 2.0 * sin_u1 * sin_u2 / cos_sq_alpha
        c = _F / 16.0 * cos_sq_alpha * (4.0 + _F * (4.0 - 3.0 * cos_sq_alpha))
        lam_prev = lam
        lam = big_l + (1.0 - c) * _F * sin_alpha * (
            sigma
            + c * sin_sigma * (cos_2sigma_m + c * cos_sigma * (-1.0 + 2.0 * cos_2sigma_m**2))
        )
        if abs(lam) > math.pi:
            return None  # antipodal region, classic non-convergence
        if abs(lam - lam_prev) < 1e-12:
            u_sq = cos_sq_alpha * (_A * _A - _B * _B) / (_B * _B)
            a = 1.0 + u_sq / 16384.0 * (4096.0 + u_sq * (-768.0 + u_sq * (320.0 - 175.0 * u_sq)))
            b = u_sq / 1024.0 * (256.0 + u_sq * (-128.0 + u_sq * (74.0 - 47.0 * u_sq)))
            delta_sigma = b * sin_sigma * (
                cos_2sigma_m
                + b / 4.0 * (
                    cos_sigma * (-1.0 + 2.0 * cos_2sigma_m**2)
                    - b / 6.0 * cos_2sigma_m * (-3.0 + 4.0 * sin_sigma**2) * (-3.0 + 4.0 * cos_2sigma_m**2)
                )
            )
            return _B * a * (sigma - delta_sigma)
    return None


def _great_circle_m(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dlon = math.radians(lon2 - lon1)
    h = math.sin((p2 - p1) / 2.0) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dlon / 2.0) ** 2
    return 2.0 * _MEAN_RADIUS * math.asin(min(1.0, math.sqrt(h)))


def geodesic_km(a: LocationRecord, b: LocationRecord) -> float:
    """Shortest surface distance between two locations, in kilometers.

    Ellipsoidal (Vincenty inverse, sub-meter) everywhere it converges;
    near-antipodal pairs fall back to the mean-radius great circle, which
    stays within 0.3% there. Sub-percent error is immaterial downstream
    because distances are min-max normalized before use.
    """
    meters = _vincenty_m(a.latitude, a.longitude, b.latitude, b.longitude)
    if meters is None:
        meters = _great_circle_m(a.latitude, a.longitude, b.latitude, b.longitude)
    return meters / 1000.0


def distance_weights(distances: np.ndarray) -> np.ndarray:
    """Inverse-distance weight: 1 at the nearest candidate, 0 at the farthest."""
    distances = np.asarray(distances, dtype=float)
    if distances.size == 0:
        raise ValidationError("no distances given")
    return 1.0 - minmax_unit(distances, degenerate=0.0)


def prevalence_weights(series_per_pic: list[np.ndarray]) -> np.ndarray:
    """Normalize full-timeline incidence sums across candidates into [0, 1]."""
    if not series_per_pic:
        raise ValidationError("no series given")
    totals = np.array([float(np.asarray(s, dtype=float).sum()) for s in series_per_pic])
    return minmax_unit(totals)


def predictor_strength(gamma_c: np.ndarray, gamma_p: np.ndarray, gamma_d: np.ndarray) -> np.ndarray:
    """Combined metric: correlation weight gates the sum of prevalence and distance."""
    gamma_c = np.asarray(gamma_c, dtype=float)
    gamma_p = np.asarray(gamma_p, dtype=float)
    gamma_d = np.asarray(gamma_d, dtype=float)
    for name, arr in (("gamma_c", gamma_c), ("gamma_p", gamma_p), ("gamma_d", gamma_d)):
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ValidationError(f"{name} outside [0, 1]")
    return gamma_c * (gamma_p + gamma_d)


@dataclass(frozen=True)
class RankedPic:
    pic_id: str
    gamma_c: float
    gamma_p: float
    gamma_d: float
    gamma: float
    rank: int
    distance_km: float


@dataclass
class PredictorRanking:
    target: str
    rows: list[RankedPic]  # sorted by gamma descending, ranks 1..N
    windowing: dict
    correlation: dict

    def pic_order(self) -> list[str]:
        return [row.pic_id for row in self.rows]


def build_ranking(
    target: str,
    pic_ids: list[str],
    gamma_c: np.ndarray,
    gamma_p: np.ndarray,
    gamma_d: np.ndarray,
    distances_km: np.ndarray,
    windowing: dict | None = None,
    correlation: dict | None = None,
) -> PredictorRanking:
    """Sort candidates by predictor strength into a dense 1..N ranking.

    Ties break by higher correlation weight, then shorter distance, then id.
    """
    gamma = predictor_strength(gamma_c, gamma_p, gamma_d)
    order = sorted(
        range(len(pic_ids)),
        key=lambda k: (-gamma[k], -gamma_c[k], distances_km[k], pic_ids[k]),
    )
    rows = [
        RankedPic(
            pic_id=pic_ids[k],
            gamma_c=float(gamma_c[k]),
            gamma_p=float(gamma_p[k]),
            gamma_d=float(gamma_d[k]),
            gamma=float(gamma[k]),
            rank=rank,
            distance_km=float(distances_km[k]),
        )
        for rank, k in enumerate(order, start=1)
    ]
    return PredictorRanking(target, rows, windowing or {}, correlation or {})


def rank_pics(
    panel: AlignedPanel,
    target_ic: str,
    windowing_cfg: WindowingConfig = WindowingConfig(),
    correlation_cfg: CorrelationConfig = CorrelationConfig(),
) -> PredictorRanking:
    """Rank every other panel location as a predictor for the target.

    Windows come from the target's series only; the same windows are reused
    for every candidate pair.
    """
    correlation_cfg.validate()
    if target_ic not in panel.incidence:
        raise ValidationError(f"target {target_ic!r} not in panel")
    pic_ids = [loc for loc in panel.location_ids() if loc != target_ic]
    if not pic_ids:
        raise ValidationError("no candidate locations besides the target")

    i0 = panel.incidence[target_ic]
    windows = make_windows(i0, windowing_cfg)
    if len(windows) == 0:
        raise ValidationError("windowing produced no windows; relax detection parameters")

    reductions = [
        reduce_matrix(
            shifted_matrix(
                i0,
                panel.incidence[pic],
                windows,
                theta_max=correlation_cfg.theta_max,
                min_overlap=correlation_cfg.min_overlap,
            ),
            theta_e=correlation_cfg.theta_e,
        )
        for pic in pic_ids
    ]
    gamma_c = correlation_weights(reductions)
    gamma_p = prevalence_weights([panel.incidence[pic] for pic in pic_ids])
    target_rec = panel.locations[target_ic]
    distances = np.array([geodesic_km(target_rec, panel.locations[pic]) for pic in pic_ids])
    gamma_d = distance_weights(distances)

    return build_ranking(
        target_ic,
        pic_ids,
        gamma_c,
        gamma_p,
        gamma_d,
        distances,
        windowing={**windowing_cfg.params(), "windows": len(windows)},
        correlation={"theta_max": correlation_cfg.theta_max, "theta_e": correlation_cfg.theta_e},
    )


def write_ranking_csv(ranking: PredictorRanking, path, metadata: str | None = None) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        if metadata:
            handle.write(f"# {metadata}\n")
        writer = csv.writer(handle)
        writer.writerow(["rank", "pic_id", "gamma_c", "gamma_p", "gamma_d", "gamma"])
        for row in ranking.rows:
            writer.writerow(
                [
                    row.rank,
                    row.pic_id,
                    f"{row.gamma_c:.6f}",
                    f"{row.gamma_p:.6f}",
                    f"{row.gamma_d:.6f}",
                    f"{row.gamma:.6f}",
                ]
            )
