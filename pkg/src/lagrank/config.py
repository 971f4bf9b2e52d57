"""Run configuration: one JSON file mirrored by a dataclass, plus CLI overrides."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from .correlation import CorrelationConfig
from .dataset import DatasetConfig
from .errors import ValidationError
from .model import TrainConfig
from .windowing import SmoothingConfig, WindowingConfig


@dataclass
class RunConfig:
    incidence: Path
    locations: Path
    weather: Path | None = None
    regions: Path | None = None
    target: str = ""
    region: str = ""  # region id for aggregate/riskmap targets
    windowing: WindowingConfig = field(default_factory=WindowingConfig)
    correlation: CorrelationConfig = field(default_factory=CorrelationConfig)
    data: DatasetConfig = field(default_factory=DatasetConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    seed: int = 0
    dump_matrices: bool = False

    def validate(self) -> None:
        for label, path in (("incidence", self.incidence), ("locations", self.locations)):
            if not Path(path).is_file():
                raise ValidationError(f"{label} file not found: {path}")
        for label, path in (("weather", self.weather), ("regions", self.regions)):
            if path is not None and not Path(path).is_file():
                raise ValidationError(f"{label} file not found: {path}")
        self.windowing.validate()
        self.correlation.validate()
        self.data.validate()
        self.train.validate()

    def as_dict(self) -> dict:
        return {
            "incidence": str(self.incidence),
            "locations": str(self.locations),
            "weather": str(self.weather) if self.weather else None,
            "regions": str(self.regions) if self.regions else None,
            "target": self.target,
            "region": self.region,
            "windowing": {
                "method": self.windowing.method,
                "m_f": self.windowing.fixed_count,
                "i_min": self.windowing.i_min,
                "d_min": self.windowing.min_length,
                "smooth_window": self.windowing.smoothing.window_length,
                "smooth_polyorder": self.windowing.smoothing.polyorder,
            },
            "correlation": {
                "theta_max": self.correlation.theta_max,
                "theta_e": self.correlation.theta_e,
                "min_overlap": self.correlation.min_overlap,
            },
            "split": list(self.data.split),
            "t_in": self.data.t_in,
            "t_out": self.data.t_out,
            "batch_size": self.data.batch_size,
            "include_weather": self.data.include_weather,
            "train": {
                "epochs": self.train.epochs,
                "learning_rate": self.train.learning_rate,
                "beta1": self.train.beta1,
                "beta2": self.train.beta2,
                "epsilon": self.train.epsilon,
                "patience": self.train.patience,
            },
            "seed": self.seed,
            "dump_matrices": self.dump_matrices,
        }

    def hash(self) -> str:
        canon = json.dumps(self.as_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()[:16]


def load_config(path) -> RunConfig:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON: {exc}") from exc

    base = Path(path).resolve().parent

    def resolve(key: str) -> Path | None:
        value = raw.get(key)
        if value is None:
            return None
        p = Path(value)
        return p if p.is_absolute() else base / p

    incidence = resolve("incidence")
    locations = resolve("locations")
    if incidence is None or locations is None:
        raise ValidationError(f"{path}: config must name incidence and locations files")

    win = raw.get("windowing", {})
    windowing = WindowingConfig(
        method=win.get("method", "fixed"),
        fixed_count=int(win.get("m_f", 20)),
        i_min=float(win.get("i_min", 0.05)),
        min_length=int(win.get("d_min", 10)),
        smoothing=SmoothingConfig(
            window_length=int(win.get("smooth_window", 11)),
            polyorder=int(win.get("smooth_polyorder", 3)),
        ),
    )
    corr = raw.get("correlation", {})
    correlation = CorrelationConfig(
        theta_max=int(corr.get("theta_max", 8)),
        theta_e=int(corr.get("theta_e", 1)),
        min_overlap=int(corr.get("min_overlap", 3)),
    )
    split = raw.get("split", [0.5, 0.3, 0.2])
    if len(split) != 3:
        raise ValidationError(f"{path}: split must have 3 ratios")
    data = DatasetConfig(
        t_in=int(raw.get("t_in", 8)),
        t_out=int(raw.get("t_out", 4)),
        batch_size=int(raw.get("batch_size", 32)),
        split=tuple(float(r) for r in split),
        include_weather=bool(raw.get("include_weather", False)),
    )
    tr = raw.get("train", {})
    seed = int(raw.get("seed", 0))
    train = TrainConfig(
        epochs=int(tr.get("epochs", 120)),
        learning_rate=float(tr.get("learning_rate", 1e-3)),
        beta1=float(tr.get("beta1", 0.9)),
        beta2=float(tr.get("beta2", 0.999)),
        epsilon=float(tr.get("epsilon", 1e-8)),
        patience=int(tr.get("patience", 10)),
        seed=seed,
    )
    return RunConfig(
        incidence=incidence,
        locations=locations,
        weather=resolve("weather"),
        regions=resolve("regions"),
        target=str(raw.get("target", "")),
        region=str(raw.get("region", "")),
        windowing=windowing,
        correlation=correlation,
        data=data,
        train=train,
        seed=seed,
        dump_matrices=bool(raw.get("dump_matrices", False)),
    )
