"""Learned chunk-size prediction for dynamically scheduled parallel loops."""

__version__ = "0.1.0"

from .core import (
    DEFAULT_GRID,
    AugmentedExample,
    BrutExample,
    ChunkGrid,
    ChunkwiseError,
    FeatureVector,
    InvalidArgumentError,
    OutOfGridError,
    StateError,
    accuracy,
    msop,
    mse,
)
from .dataio import BrutDataset, augment, derive_labels, kfold, load_brut_csv, save_brut_csv, shuffle_split
from .models import (
    BlackBoxModel,
    ModelKind,
    cross_validate,
    evaluate_test,
    fit_posto,
    fit_preto,
    predict_chunk,
)
from .trees import TreeConfig

__all__ = [
    "DEFAULT_GRID",
    "AugmentedExample",
    "BlackBoxModel",
    "BrutDataset",
    "BrutExample",
    "ChunkGrid",
    "ChunkwiseError",
    "FeatureVector",
    "InvalidArgumentError",
    "ModelKind",
    "OutOfGridError",
    "StateError",
    "TreeConfig",
    "accuracy",
    "augment",
    "cross_validate",
    "derive_labels",
    "evaluate_test",
    "fit_posto",
    "fit_preto",
    "kfold",
    "load_brut_csv",
    "msop",
    "mse",
    "predict_chunk",
    "save_brut_csv",
    "shuffle_split",
]
