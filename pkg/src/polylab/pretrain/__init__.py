"""Masking, contrastive and reconstruction losses, and the training loop."""

from .corrupt import (
    MASK_FRACTION,
    RANDOM_FRACTION,
    CorruptionPlan,
    corrupt,
    corrupt_bits,
    corrupt_tokens,
    corrupt_z_indices,
)
from .loop import (
    EmptyCorpusError,
    EpochStats,
    PretrainConfig,
    PretrainHistory,
    corpus_element_indices,
    encode_record_clean,
    fit,
    record_train_losses,
)
from .losses import (
    CountMismatchError,
    EmptyMaskError,
    LossReport,
    NonPositiveTemperatureError,
    NonUnitNormError,
    infonce,
    mlm_loss,
    node_recon_loss,
    retrieval_eval,
    total_loss,
)

__all__ = [
    "CorruptionPlan", "CountMismatchError", "EmptyCorpusError",
    "EmptyMaskError", "EpochStats", "LossReport", "MASK_FRACTION",
    "NonPositiveTemperatureError", "NonUnitNormError", "PretrainConfig",
    "PretrainHistory", "corpus_element_indices", "corrupt", "corrupt_bits",
    "corrupt_tokens", "corrupt_z_indices", "encode_record_clean", "fit",
    "infonce", "mlm_loss", "node_recon_loss", "record_train_losses",
    "retrieval_eval", "total_loss",
]
