"""Co-clustering of mixed continuous/binary data with a latent block model."""
from .core import (
    FitResult,
    HardPartition,
    MixedDataMatrix,
    ModelParams,
    ModelSpec,
    SoftMemberships,
    hard_assign,
    validate,
)
from .datagen import GenConfig, LabeledDataset, generate, make_config, true_params
from .evaluation import ari, cross_ari, param_errors, summarize
from .model import compute_fc, exact_log_likelihood, update_s, update_tc_td, update_theta
from .vem import VemConfig, fit

__version__ = "0.1.0"

__all__ = [
    "FitResult", "HardPartition", "MixedDataMatrix", "ModelParams", "ModelSpec",
    "SoftMemberships", "hard_assign", "validate",
    "GenConfig", "LabeledDataset", "generate", "make_config", "true_params",
    "ari", "cross_ari", "param_errors", "summarize",
    "compute_fc", "exact_log_likelihood", "update_s", "update_tc_td", "update_theta",
    "VemConfig", "fit",
]
