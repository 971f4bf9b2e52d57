"""lagrank: windowed lagged-correlation feature ranking for incidence forecasting."""

from .correlation import (
    CorrelationConfig,
    PhasedCorrelationMatrix,
    correlation_weights,
    pearson,
    reduce_matrix,
    shifted_matrix,
)
from .dataset import (
    DatasetConfig,
    FeatureMatrix,
    SlidingWindowDataset,
    aggregate_region,
    assemble_features,
    build_windows,
    export_dataset,
    prepare_datasets,
    split_panel,
)
from .errors import ValidationError
from .geo import (
    PredictorRanking,
    distance_weights,
    geodesic_km,
    predictor_strength,
    prevalence_weights,
    rank_pics,
)
from .ingest import (
    AlignedPanel,
    IncidenceTable,
    LocationRecord,
    align_panel,
    load_incidence,
    load_locations,
    load_regions,
    load_weather,
)
from .model import (
    LinearModel,
    TrainConfig,
    evaluate_mae,
    init_model,
    predict,
    sweep_n_pic,
    train,
)
from .preprocess import NormStats, minmax_normalize, weekly_resample, zscore_split_normalize
from .synth import SynthConfig, synth_panel
from .windowing import (
    SmoothingConfig,
    WindowingConfig,
    WindowSet,
    detect_windows,
    fixed_windows,
    make_windows,
    savgol_smooth,
)

__version__ = "0.1.0"

__all__ = [
    "AlignedPanel",
    "CorrelationConfig",
    "DatasetConfig",
    "FeatureMatrix",
    "IncidenceTable",
    "LinearModel",
    "LocationRecord",
    "NormStats",
    "PhasedCorrelationMatrix",
    "PredictorRanking",
    "SlidingWindowDataset",
    "SmoothingConfig",
    "SynthConfig",
    "TrainConfig",
    "ValidationError",
    "WindowSet",
    "WindowingConfig",
    "aggregate_region",
    "align_panel",
    "assemble_features",
    "build_windows",
    "correlation_weights",
    "detect_windows",
    "distance_weights",
    "evaluate_mae",
    "export_dataset",
    "fixed_windows",
    "geodesic_km",
    "init_model",
    "load_incidence",
    "load_locations",
    "load_regions",
    "load_weather",
    "make_windows",
    "minmax_normalize",
    "pearson",
    "predict",
    "predictor_strength",
    "prepare_datasets",
    "prevalence_weights",
    "rank_pics",
    "reduce_matrix",
    "savgol_smooth",
    "shifted_matrix",
    "split_panel",
    "sweep_n_pic",
    "synth_panel",
    "train",
    "weekly_resample",
    "zscore_split_normalize",
]
