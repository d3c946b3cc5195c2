"""Frozen-embedding property regression with fivefold cross-validation."""

from .finetune import TRAINABLE_PREFIXES, collect_pooled, train_regressor
from .head import (
    RegressionConfig,
    head_forward,
    head_param_count,
    init_head_params,
    mse_loss,
)
from .scaler import TargetScaler
from .synth import (
    attach_synthetic_properties,
    bitcount_property,
    heteroatom_property,
    linear_latent_property,
)
from .train import (
    CvReport,
    InsufficientDataError,
    MissingViewError,
    ZeroVarianceError,
    cross_validate,
    embed_dataset,
    evaluate,
    fold_assignments,
    fused_embed,
    pooled_states,
    predict,
    regression_metrics,
    train_head,
)

__all__ = [
    "CvReport", "InsufficientDataError", "MissingViewError",
    "RegressionConfig", "TRAINABLE_PREFIXES", "TargetScaler",
    "ZeroVarianceError", "attach_synthetic_properties",
    "bitcount_property", "collect_pooled", "cross_validate",
    "embed_dataset", "evaluate", "fold_assignments", "fused_embed",
    "head_forward", "head_param_count", "heteroatom_property",
    "init_head_params", "linear_latent_property", "mse_loss",
    "pooled_states", "predict", "regression_metrics", "train_head",
    "train_regressor",
]
