"""Command-line pipeline: rank, sweep, predict, riskmap.

Exit codes: 0 success, 2 validation/configuration error, 3 runtime or
numerical failure. Every output file carries a metadata line (CSV) or block
(GeoJSON) with the config hash and seed, so identical configs reproduce
byte-identical artifacts.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from . import dataset as ds
from . import geo, ingest, model
from .config import RunConfig, load_config
from .correlation import shifted_matrix, write_matrix_csv
from .errors import ValidationError
from .preprocess import normalize_with

log = logging.getLogger("lagrank")


def _load_panel(cfg: RunConfig) -> ingest.AlignedPanel:
    incidence = ingest.load_incidence(cfg.incidence)
    locations = ingest.load_locations(cfg.locations)
    weather = ingest.load_weather(cfg.weather) if cfg.weather else None
    return ingest.align_panel(incidence, locations, weather)


def _resolve_target(cfg: RunConfig) -> tuple[ingest.AlignedPanel, str]:
    """Panel plus the id to rank against; region targets get a pseudo-location."""
    panel = _load_panel(cfg)
    if cfg.region:
        if not cfg.regions:
            raise ValidationError("region target given but no regions file configured")
        regions = ingest.load_regions(cfg.regions)
        if cfg.region not in regions:
            raise ValidationError(f"region {cfg.region!r} not in {cfg.regions}")
        members = [m for m in regions[cfg.region] if m in panel.incidence]
        if not members:
            raise ValidationError(f"region {cfg.region!r} has no members with data")
        target = f"region:{cfg.region}"
        return ds.with_aggregate_target(panel, target, members), target
    if not cfg.target:
        raise ValidationError("no target configured (set target or region)")
    return panel, cfg.target


def _metadata(cfg: RunConfig) -> str:
    return f"config_hash={cfg.hash()} seed={cfg.seed}"


def cmd_rank(cfg: RunConfig, out_dir: Path) -> int:
    panel, target = _resolve_target(cfg)
    ranking = geo.rank_pics(panel, target, cfg.windowing, cfg.correlation)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "ranking.csv"
    geo.write_ranking_csv(ranking, path, metadata=_metadata(cfg))
    log.info(
        "ranked %d candidates for %s using %s windowing (%s windows)",
        len(ranking.rows),
        target,
        ranking.windowing.get("method"),
        ranking.windowing.get("windows"),
    )
    for row in ranking.rows:
        log.info(
            "  #%d %s gamma_c=%.3f gamma_p=%.3f gamma_d=%.3f gamma=%.3f",
            row.rank, row.pic_id, row.gamma_c, row.gamma_p, row.gamma_d, row.gamma,
        )
    if cfg.dump_matrices:
        mdir = out_dir / "matrices"
        mdir.mkdir(exist_ok=True)
        from .windowing import make_windows

        windows = make_windows(panel.incidence[target], cfg.windowing)
        for row in ranking.rows:
            matrix = shifted_matrix(
                panel.incidence[target],
                panel.incidence[row.pic_id],
                windows,
                cfg.correlation.theta_max,
                cfg.correlation.min_overlap,
            )
            write_matrix_csv(matrix, mdir / f"{row.pic_id}.csv", metadata=_metadata(cfg))
    log.info("wrote %s", path)
    return 0


def cmd_sweep(cfg: RunConfig, out_dir: Path, n_max: int) -> int:
    panel, target = _resolve_target(cfg)
    ranking = geo.rank_pics(panel, target, cfg.windowing, cfg.correlation)
    result = model.sweep_n_pic(panel, target, ranking, n_max, cfg.data, cfg.train)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "sweep.csv"
    with open(path, "w", newline="", encoding="utf-8") as handle:
        handle.write(f"# {_metadata(cfg)}\n")
        writer = csv.writer(handle)
        writer.writerow(["n_pic", "mae_norm", "mae_raw"])
        for p in result.points:
            writer.writerow(
                [p.n_pic, "" if p.failed else f"{p.mae_norm:.6f}", "" if p.failed else f"{p.mae_raw:.6f}"]
            )
    summary = {
        "optimal_n_pic": result.optimal_n_pic,
        "optimal_mae_norm": result.optimal_mae,
        "baseline_mae_norm": result.baseline_mae,
        "improvement": result.improvement,
        "failed_points": [p.n_pic for p in result.points if p.failed],
        "seed": cfg.seed,
        "config_hash": cfg.hash(),
    }
    (out_dir / "sweep_summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    log.info(
        "sweep done: optimal N_PIC=%d (MAE %.4f), baseline MAE %.4f, improvement %.1f%%",
        result.optimal_n_pic, result.optimal_mae, result.baseline_mae, 100 * result.improvement,
    )
    log.info("wrote %s", path)
    return 0


def cmd_predict(cfg: RunConfig, out_dir: Path, n_pic: int) -> int:
    panel, target = _resolve_target(cfg)
    ranking = geo.rank_pics(panel, target, cfg.windowing, cfg.correlation)
    fitted, prep = model.train_for_n_pic(panel, target, ranking, n_pic, cfg.data, cfg.train)
    preds = model.predict_batch(fitted, prep.test.inputs)
    preds_raw = preds * prep.stats.std[prep.label_col] + prep.stats.mean[prep.label_col]
    test_start = prep.split_ranges[2][0]
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "predictions.csv"
    with open(path, "w", newline="", encoding="utf-8") as handle:
        handle.write(f"# {_metadata(cfg)}\n")
        writer = csv.writer(handle)
        writer.writerow(
            ["week_start", "actual"] + [f"predicted_step{j + 1}" for j in range(cfg.data.t_out)]
        )
        for i in range(prep.test.n_samples):
            week_idx = test_start + i + cfg.data.t_in  # first predicted week
            week = str(panel.weeks[week_idx].astype("datetime64[D]"))
            actual = prep.matrix.values[week_idx, prep.matrix.label_col]
            writer.writerow([week, f"{actual:.6f}"] + [f"{v:.6f}" for v in preds_raw[i]])
    mae = model.evaluate_mae(fitted, prep.test)
    model.save_model(fitted, out_dir / "model.json", prep.stats, cfg.train)
    log.info("test MAE %.4f (normalized) over %d samples", mae, prep.test.n_samples)
    log.info("wrote %s", path)
    return 0


def cmd_riskmap(cfg: RunConfig, out_dir: Path, top_k: int, n_pic: int) -> int:
    if not cfg.region:
        raise ValidationError("riskmap needs a region target (set region in config or --target region)")
    panel, target = _resolve_target(cfg)
    ranking = geo.rank_pics(panel, target, cfg.windowing, cfg.correlation)
    fitted, prep = model.train_for_n_pic(panel, target, ranking, n_pic, cfg.data, cfg.train)

    # one single-shot projection past the end of the series
    x_all = normalize_with(prep.matrix.values, prep.stats)
    block = x_all[-cfg.data.t_in :]
    pred_norm = model.predict(fitted, block)
    pred_raw = pred_norm * prep.stats.std[prep.label_col] + prep.stats.mean[prep.label_col]
    regional_prediction = float(np.mean(pred_raw))

    rows = ranking.rows
    if top_k > len(rows):
        warnings.warn(f"top_k={top_k} exceeds {len(rows)} ranked candidates; clamping")
        top_k = len(rows)
    emitted = rows[:top_k]
    total = sum(r.gamma for r in emitted)
    features = []
    for r in emitted:
        share = (r.gamma / total) if total > 0 else 1.0 / len(emitted)
        rec = panel.locations[r.pic_id]
        features.append(
            {
                "type": "Feature",
                "geometry": {"type": "Point", "coordinates": [rec.longitude, rec.latitude]},
                "properties": {
                    "pic_id": r.pic_id,
                    "rank": r.rank,
                    "gamma": round(r.gamma, 6),
                    "gamma_share": round(share, 6),
                    "predicted_next_window": round(regional_prediction, 6),
                    "risk": round(share * regional_prediction, 6),
                },
            }
        )
    collection = {
        "type": "FeatureCollection",
        "metadata": {
            "config_hash": cfg.hash(),
            "seed": cfg.seed,
            "region": cfg.region,
            "n_pic": n_pic,
            "top_k": top_k,
            "windowing": ranking.windowing,
        },
        "features": features,
    }
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "riskmap.geojson"
    path.write_text(json.dumps(collection, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    log.info("regional next-window prediction %.3f per 100k over %d points", regional_prediction, top_k)
    log.info("wrote %s", path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lagrank",
        description="Rank candidate predictor locations and run forecasting experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("rank", "rank candidate locations for the target"),
        ("sweep", "sweep the added-feature count and report test MAE"),
        ("predict", "train one model and write test-split predictions"),
        ("riskmap", "export a GeoJSON risk map for a region target"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--target", help="override target location id")
        p.add_argument("--region", help="override region target id")
        p.add_argument("--windowing", choices=["fixed", "detect"], help="window allocation method")
        p.add_argument("--mf", type=int, help="fixed window count")
        p.add_argument("--imin", type=float, help="detection incidence threshold")
        p.add_argument("--dmin", type=int, help="detection minimum window length")
        p.add_argument("--theta-max", type=int, help="maximum shift in weeks")
        p.add_argument("--theta-e", type=int, help="peak-averaging half width")
        p.add_argument("--npic", type=int, help="candidate count (sweep: maximum)")
        p.add_argument("--seed", type=int, help="run seed")
        if name == "riskmap":
            p.add_argument("--topk", type=int, default=40, help="points on the map")
    return parser


def _apply_overrides(cfg: RunConfig, args: argparse.Namespace) -> RunConfig:
    if args.target:
        cfg.target, cfg.region = args.target, ""
    if args.region:
        cfg.region = args.region
    win = cfg.windowing
    if args.windowing or args.mf is not None or args.imin is not None or args.dmin is not None:
        win = dataclasses.replace(
            win,
            method=args.windowing or win.method,
            fixed_count=args.mf if args.mf is not None else win.fixed_count,
            i_min=args.imin if args.imin is not None else win.i_min,
            min_length=args.dmin if args.dmin is not None else win.min_length,
        )
        cfg.windowing = win
    if args.theta_max is not None or args.theta_e is not None:
        cfg.correlation = dataclasses.replace(
            cfg.correlation,
            theta_max=args.theta_max if args.theta_max is not None else cfg.correlation.theta_max,
            theta_e=args.theta_e if args.theta_e is not None else cfg.correlation.theta_e,
        )
    if args.seed is not None:
        cfg.seed = args.seed
        cfg.train = dataclasses.replace(cfg.train, seed=args.seed)
    return cfg


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        cfg = _apply_overrides(load_config(args.config), args)
        cfg.validate()
        out_dir = Path(args.out)
        if args.command == "rank":
            return cmd_rank(cfg, out_dir)
        if args.command == "sweep":
            n_max = args.npic if args.npic is not None else 5
            return cmd_sweep(cfg, out_dir, n_max)
        if args.command == "predict":
            return cmd_predict(cfg, out_dir, args.npic if args.npic is not None else 0)
        if args.command == "riskmap":
            return cmd_riskmap(cfg, out_dir, args.topk, args.npic if args.npic is not None else 0)
        raise ValidationError(f"unknown command {args.command!r}")
    except ValidationError as exc:
        log.error("%s", exc)
        return 2
    except Exception as exc:  # noqa: BLE001 - boundary: map anything else to exit 3
        log.error("runtime failure: %s", exc)
        return 3


if __name__ == "__main__":
    sys.exit(main())
