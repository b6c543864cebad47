"""Multi-label learning via structured decomposition and group sparsity.

Training decomposes the data matrix into one rank-limited component per
label plus a sparse residual; prediction represents a new sample on the
learned per-label subspaces through group lasso and thresholds the
per-group coefficient scores into a label vector.
"""

from .data import (
    DatasetSource,
    FeatureTransform,
    LabeledDataset,
    load_dataset,
    read_matrix,
    save_delimited,
)
from .decomposition import (
    DecompositionState,
    MultiSubspaceModel,
    TrainingConfig,
    TrainingDiagnostics,
    initialize,
    objective,
    train,
    update_label_component,
    update_sparse_residual,
)
from .errors import (
    CorruptModelError,
    DegenerateProjectionError,
    InvalidInputError,
    NumericalDivergenceError,
    ParseError,
    SdgsError,
    UnsupportedVersionError,
)
from .group_lasso import (
    GroupSparseCoefficients,
    SolverConfig,
    kkt_residual,
    objective_value,
    prox_group_soft_threshold,
    solve,
)
from .linalg import (
    LowRankApproxConfig,
    brp_low_rank_approx,
    frobenius_norm_sq,
    hard_threshold_top_k,
    orthonormal_row_basis,
    truncated_svd_approx,
)
from .metrics import EvaluationReport, evaluate, macro_f1, micro_f1
from .model_io import load_model, save_model
from .prediction import (
    LabelPrediction,
    PredictionConfig,
    predict,
    predict_batch,
    threshold_scores,
)
from .synthetic import SyntheticSpec, generate_synthetic

__version__ = "0.1.0"

__all__ = [
    "CorruptModelError",
    "DatasetSource",
    "DecompositionState",
    "DegenerateProjectionError",
    "EvaluationReport",
    "FeatureTransform",
    "GroupSparseCoefficients",
    "InvalidInputError",
    "LabelPrediction",
    "LabeledDataset",
    "LowRankApproxConfig",
    "MultiSubspaceModel",
    "NumericalDivergenceError",
    "ParseError",
    "PredictionConfig",
    "SdgsError",
    "SolverConfig",
    "SyntheticSpec",
    "TrainingConfig",
    "TrainingDiagnostics",
    "UnsupportedVersionError",
    "brp_low_rank_approx",
    "evaluate",
    "frobenius_norm_sq",
    "generate_synthetic",
    "hard_threshold_top_k",
    "initialize",
    "kkt_residual",
    "load_dataset",
    "load_model",
    "macro_f1",
    "micro_f1",
    "objective",
    "objective_value",
    "orthonormal_row_basis",
    "predict",
    "predict_batch",
    "prox_group_soft_threshold",
    "read_matrix",
    "save_delimited",
    "save_model",
    "solve",
    "threshold_scores",
    "train",
    "truncated_svd_approx",
    "update_label_component",
    "update_sparse_residual",
]
