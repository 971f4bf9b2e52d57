#!/usr/bin/env python3
"""End-to-end demo on synthetic data: rank, sweep, predict, riskmap.

Builds a star-topology panel with one true lagged source, writes it out as
the CSV files the CLI ingests, then drives every subcommand and prints where
the artifacts landed.
"""

import argparse
import json
from pathlib import Path

from lagrank.cli import main as lagrank_main
from lagrank.synth import SynthConfig, pic_id, synth_panel

import sys

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))
from conftest import write_panel_csvs  # reuse the test fixture writer  # noqa: E402


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="demo_out", help="working directory")
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    work = Path(args.out)
    work.mkdir(parents=True, exist_ok=True)
    cfg = SynthConfig(n_pics=8, source_lags=((2, 3),), noise=0.3, length=520, seed=args.seed)
    panel, truth = synth_panel(cfg)
    print(f"synthetic panel: 1 target + 8 candidates, true source {truth}")
    write_panel_csvs(work, panel)
    (work / "regions.csv").write_text(
        "location_id,region\n" + "\n".join(f"{pic_id(k)},demo" for k in range(8)) + "\n"
    )
    config = {
        "incidence": "incidence.csv",
        "locations": "locations.csv",
        "regions": "regions.csv",
        "target": "ic",
        "windowing": {"method": "fixed", "m_f": 10},
        "train": {"learning_rate": 0.01},
        "seed": args.seed,
    }
    cfg_path = work / "config.json"
    cfg_path.write_text(json.dumps(config, indent=2))

    for argv in (
        ["rank", "--config", str(cfg_path), "--out", str(work / "rank")],
        ["sweep", "--config", str(cfg_path), "--out", str(work / "sweep"), "--npic", "4"],
        ["predict", "--config", str(cfg_path), "--out", str(work / "predict"), "--npic", "2"],
        ["riskmap", "--config", str(cfg_path), "--out", str(work / "riskmap"),
         "--region", "demo", "--topk", "5", "--npic", "2"],
    ):
        print(f"\n$ lagrank {' '.join(argv)}")
        code = lagrank_main(argv)
        if code != 0:
            return code
    print(f"\nartifacts under {work}/: rank/ sweep/ predict/ riskmap/")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
