"""Single-shot linear forecaster: MSE loss, adaptive-moment descent, early stop.

The model maps the last input time step's features to all t_out output steps
at once. Weights start at zero. Training follows bias-corrected first/second
moment gradient descent and monitors validation loss, restoring the best
parameters seen when patience runs out.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .dataset import DatasetConfig, PreparedData, SlidingWindowDataset, prepare_datasets
from .errors import ValidationError
from .geo import PredictorRanking
from .ingest import AlignedPanel
from .preprocess import NormStats


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 120
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    patience: int = 10
    seed: int = 0

    def validate(self) -> None:
        if self.epochs < 1:
            raise ValidationError("epochs must be >= 1")
        if self.patience < 1:
            raise ValidationError("patience must be >= 1")


@dataclass
class TrainingHistory:
    train_loss: list[float] = field(default_factory=list)
    val_loss: list[float] = field(default_factory=list)
    best_epoch: int = 0       # 1-based epoch whose parameters were kept
    epochs_ran: int = 0


@dataclass
class LinearModel:
    weights: np.ndarray  # (F, t_out)
    bias: np.ndarray     # (t_out,)
    t_in: int
    t_out: int
    feature_names: list[str] = field(default_factory=list)
    history: TrainingHistory | None = None


def init_model(n_features: int, t_in: int, t_out: int, feature_names: list[str] | None = None) -> LinearModel:
    """Zero-initialized model."""
    return LinearModel(
        weights=np.zeros((n_features, t_out)),
        bias=np.zeros(t_out),
        t_in=t_in,
        t_out=t_out,
        feature_names=feature_names or [],
    )


def predict(model: LinearModel, block: np.ndarray) -> np.ndarray:
    """Single-shot prediction from one (t_in, F) input block."""
    block = np.asarray(block, dtype=float)
    if block.ndim != 2 or block.shape != (model.t_in, model.weights.shape[0]):
        raise ValidationError(
            f"input block must be ({model.t_in}, {model.weights.shape[0]}), got {block.shape}"
        )
    return block[-1] @ model.weights + model.bias


def predict_batch(model: LinearModel, inputs: np.ndarray) -> np.ndarray:
    if inputs.shape[2] != model.weights.shape[0]:
        raise ValidationError(
            f"feature count mismatch: model has {model.weights.shape[0]}, input has {inputs.shape[2]}"
        )
    return inputs[:, -1, :] @ model.weights + model.bias


def mse_loss(model: LinearModel, ds: SlidingWindowDataset) -> float:
    err = predict_batch(model, ds.inputs) - ds.labels
    return float(np.mean(err * err))


def gradients(
    weights: np.ndarray, bias: np.ndarray, x_last: np.ndarray, labels: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Analytic MSE gradients for one batch of last-step features."""
    err = x_last @ weights + bias - labels
    scale = 2.0 / err.size
    return x_last.T @ err * scale, err.sum(axis=0) * scale


def train(
    model: LinearModel,
    ds_train: SlidingWindowDataset,
    ds_val: SlidingWindowDataset,
    cfg: TrainConfig = TrainConfig(),
) -> tuple[LinearModel, TrainingHistory]:
    """Fit in place; returns (model, history) with best-validation parameters."""
    cfg.validate()
    if ds_train.inputs.shape[2] != ds_val.inputs.shape[2]:
        raise ValidationError("train and val datasets disagree on feature count")
    w, b = model.weights, model.bias
    m_w = np.zeros_like(w)
    v_w = np.zeros_like(w)
    m_b = np.zeros_like(b)
    v_b = np.zeros_like(b)
    step = 0
    history = TrainingHistory()
    best_val = np.inf
    best_w, best_b = w.copy(), b.copy()
    bad = 0
    for epoch in range(1, cfg.epochs + 1):
        for xb, yb in ds_train.iter_batches():
            gw, gb = gradients(w, b, xb[:, -1, :], yb)
            step += 1
            m_w = cfg.beta1 * m_w + (1 - cfg.beta1) * gw
            v_w = cfg.beta2 * v_w + (1 - cfg.beta2) * gw * gw
            m_b = cfg.beta1 * m_b + (1 - cfg.beta1) * gb
            v_b = cfg.beta2 * v_b + (1 - cfg.beta2) * gb * gb
            c1 = 1 - cfg.beta1**step
            c2 = 1 - cfg.beta2**step
            w -= cfg.learning_rate * (m_w / c1) / (np.sqrt(v_w / c2) + cfg.epsilon)
            b -= cfg.learning_rate * (m_b / c1) / (np.sqrt(v_b / c2) + cfg.epsilon)
        train_loss = mse_loss(model, ds_train)
        val_loss = mse_loss(model, ds_val)
        if not (np.isfinite(train_loss) and np.isfinite(val_loss)):
            raise RuntimeError(
                f"training diverged: non-finite loss at epoch {epoch} "
                f"(train={train_loss}, val={val_loss}, lr={cfg.learning_rate})"
            )
        history.train_loss.append(train_loss)
        history.val_loss.append(val_loss)
        history.epochs_ran = epoch
        if val_loss < best_val:
            best_val = val_loss
            best_w, best_b = w.copy(), b.copy()
            history.best_epoch = epoch
            bad = 0
        else:
            bad += 1
            if bad >= cfg.patience:
                break
    model.weights[...] = best_w
    model.bias[...] = best_b
    model.history = history
    return model, history


def evaluate_mae(model: LinearModel, ds: SlidingWindowDataset) -> float:
    """Mean |prediction - label| over every sample and output step."""
    if ds.n_samples == 0:
        raise ValidationError("empty dataset")
    return float(np.mean(np.abs(predict_batch(model, ds.inputs) - ds.labels)))


def evaluate_mae_denormalized(
    model: LinearModel, ds: SlidingWindowDataset, stats: NormStats, label_col: int
) -> float:
    """MAE on the original (per-100k) scale of the label column."""
    if ds.n_samples == 0:
        raise ValidationError("empty dataset")
    err = predict_batch(model, ds.inputs) - ds.labels
    return float(np.mean(np.abs(err * stats.std[label_col])))


@dataclass
class SweepPoint:
    n_pic: int
    mae_norm: float  # NaN when failed
    mae_raw: float
    epochs_ran: int = 0
    failed: bool = False
    error: str = ""


@dataclass
class SweepResult:
    points: list[SweepPoint]
    optimal_n_pic: int
    optimal_mae: float
    baseline_mae: float

    @property
    def improvement(self) -> float:
        """Relative decrease in MAE of the optimum versus the no-candidate baseline."""
        return (self.baseline_mae - self.optimal_mae) / self.baseline_mae


def train_for_n_pic(
    panel: AlignedPanel,
    target_ic: str,
    ranking: PredictorRanking,
    n_pic: int,
    data_cfg: DatasetConfig,
    train_cfg: TrainConfig,
) -> tuple[LinearModel, PreparedData]:
    prep = prepare_datasets(panel, target_ic, ranking, n_pic, data_cfg)
    model = init_model(
        prep.train.inputs.shape[2], data_cfg.t_in, data_cfg.t_out, prep.feature_names
    )
    train(model, prep.train, prep.val, train_cfg)
    return model, prep


def sweep_n_pic(
    panel: AlignedPanel,
    target_ic: str,
    ranking: PredictorRanking,
    n_max: int,
    data_cfg: DatasetConfig = DatasetConfig(),
    train_cfg: TrainConfig = TrainConfig(),
) -> SweepResult:
    """Train and score one model per candidate count in [0, n_max].

    The baseline (no added candidates) is always included. A failing count
    marks its curve point failed rather than aborting the sweep.
    """
    if n_max < 0 or n_max > len(ranking.rows):
        raise ValidationError(f"n_max={n_max} exceeds ranking of {len(ranking.rows)} candidates")
    points: list[SweepPoint] = []
    for n in range(n_max + 1):
        try:
            model, prep = train_for_n_pic(panel, target_ic, ranking, n, data_cfg, train_cfg)
            points.append(
                SweepPoint(
                    n_pic=n,
                    mae_norm=evaluate_mae(model, prep.test),
                    mae_raw=evaluate_mae_denormalized(model, prep.test, prep.stats, prep.label_col),
                    epochs_ran=model.history.epochs_ran if model.history else 0,
                )
            )
        except (ValidationError, RuntimeError) as exc:
            points.append(
                SweepPoint(n_pic=n, mae_norm=np.nan, mae_raw=np.nan, failed=True, error=str(exc))
            )
    ok = [p for p in points if not p.failed]
    if not ok:
        raise RuntimeError("every sweep point failed: " + "; ".join(p.error for p in points))
    best = min(ok, key=lambda p: p.mae_norm)
    baseline = points[0]
    return SweepResult(
        points=points,
        optimal_n_pic=best.n_pic,
        optimal_mae=best.mae_norm,
        baseline_mae=baseline.mae_norm,
    )


def save_model(model: LinearModel, path, stats: NormStats | None = None, cfg: TrainConfig | None = None) -> None:
    """Serialize parameters plus normalization provenance to JSON."""
    payload = {
        "weights": model.weights.tolist(),
        "bias": model.bias.tolist(),
        "t_in": model.t_in,
        "t_out": model.t_out,
        "feature_names": model.feature_names,
        "train_config": asdict(cfg) if cfg else None,
        "norm": {
            "mean": stats.mean.tolist(),
            "std": stats.std.tolist(),
            "train_rows": list(stats.train_rows),
            "feature_names": stats.feature_names,
        }
        if stats
        else None,
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def load_model(path) -> LinearModel:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    weights = np.array(payload["weights"], dtype=float)
    bias = np.array(payload["bias"], dtype=float)
    if weights.ndim != 2 or bias.shape != (weights.shape[1],):
        raise ValidationError(f"{path}: inconsistent parameter shapes")
    return LinearModel(
        weights=weights,
        bias=bias,
        t_in=int(payload["t_in"]),
        t_out=int(payload["t_out"]),
        feature_names=list(payload.get("feature_names") or []),
    )
