#!/usr/bin/env python3
"""Write sliding-window dataset exports for out-of-process model harnesses.

Two families:
  identity/        one sine/cosine pair; every future label step is an exact
                   linear function of the last input step, so any competent
                   model should fit it almost perfectly
  lagged/seedNNN/  star-topology panels with one true lagged source among
                   decoys, one directory per seed

The identity directory also carries primary_sweep.csv with this package's
own linear-model sweep, so external implementations can cross-check.
"""

import argparse
import csv
import datetime as dt
from pathlib import Path

import numpy as np

from lagrank.dataset import DatasetConfig, export_dataset
from lagrank.geo import rank_pics
from lagrank.ingest import WEEK, AlignedPanel, LocationRecord
from lagrank.model import TrainConfig, sweep_n_pic
from lagrank.synth import TARGET_ID, SynthConfig, synth_panel
from lagrank.windowing import WindowingConfig

TRAIN_DEFAULTS = {"learning_rate": 0.02, "epochs": 120, "patience": 10}


def sine_panel(n_weeks: int = 400) -> AlignedPanel:
    t = np.arange(n_weeks)
    w = 2 * np.pi / 52
    series = {
        "ic": 10.0 * (1 + np.sin(w * t)),
        "helper": 10.0 * (1 + np.cos(w * t)),
    }
    locations = {
        "ic": LocationRecord("ic", "target", -20.3, -40.3, 100_000),
        "helper": LocationRecord("helper", "helper", -20.4, -40.4, 100_000),
    }
    return AlignedPanel(
        weeks=np.datetime64(dt.date(2010, 1, 3), "D") + np.arange(n_weeks) * WEEK,
        locations=locations,
        incidence=series,
        cases={k: v.copy() for k, v in series.items()},
        incidence_missing={k: np.zeros(n_weeks, dtype=bool) for k in series},
    )


def augment_manifest(out_dir: Path) -> None:
    import json

    path = out_dir / "manifest.json"
    manifest = json.loads(path.read_text())
    manifest["train_defaults"] = TRAIN_DEFAULTS
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def export_identity(out_root: Path) -> None:
    panel = sine_panel()
    ranking = rank_pics(panel, "ic", WindowingConfig(method="fixed", fixed_count=5))
    out = export_dataset(out_root / "identity", panel, "ic", ranking, DatasetConfig(), seed=0)
    augment_manifest(out)
    sweep = sweep_n_pic(
        panel, "ic", ranking, 1, DatasetConfig(),
        TrainConfig(learning_rate=TRAIN_DEFAULTS["learning_rate"]),
    )
    with open(out / "primary_sweep.csv", "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["n_pic", "mae_norm"])
        for p in sweep.points:
            writer.writerow([p.n_pic, f"{p.mae_norm:.6f}"])
    print(f"identity export -> {out}")


def export_lagged(out_root: Path, seeds: int) -> None:
    for seed in range(seeds):
        rng = np.random.default_rng(seed + 101)
        cfg = SynthConfig(
            n_pics=4,
            source_lags=((int(rng.integers(0, 4)), int(rng.integers(2, 5))),),
            noise=0.25,
            length=260,
            seed=seed,
        )
        panel, truth = synth_panel(cfg)
        ranking = rank_pics(panel, TARGET_ID, WindowingConfig(method="fixed", fixed_count=5))
        out = export_dataset(
            out_root / "lagged" / f"seed{seed:03d}", panel, TARGET_ID, ranking,
            DatasetConfig(), seed=seed,
        )
        augment_manifest(out)
        print(f"lagged seed {seed}: source={truth} top={ranking.rows[0].pic_id} -> {out}")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="exports", help="output root directory")
    parser.add_argument("--seeds", type=int, default=20, help="lagged-family seed count")
    args = parser.parse_args()
    out_root = Path(args.out)
    export_identity(out_root)
    export_lagged(out_root, args.seeds)


if __name__ == "__main__":
    main()
