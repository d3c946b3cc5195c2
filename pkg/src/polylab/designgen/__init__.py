"""Property-conditioned generation with oracle filtering."""

from .decoder import (
    DecoderConfig,
    DecoderModelConfig,
    EmptySequenceError,
    decode,
    decoder_forward,
    gen_loss,
    init_decoder_params,
    nucleus_sample,
)
from .gp import GpOracle, SingularKernelError, gp_fit, gp_predict, rbf_kernel
from .grammar import GrammarOutcome, grammar_decode
from .latent import (
    K_MEMORY,
    DegenerateError,
    MemoryBlock,
    NonUnitNormError,
    build_memory,
    init_memory_params,
    perturb_latent,
)
from .pipeline import (
    Candidate,
    GenReport,
    GenTrainConfig,
    NoAcceptedCandidatesError,
    NoSeedsError,
    candidates_to_tsv,
    conditional_generate,
    gen_metrics,
    knn_tanimoto_novelty,
    landscape_pairs,
    train_generator,
)

__all__ = [
    "Candidate", "DecoderConfig", "DecoderModelConfig", "DegenerateError",
    "EmptySequenceError", "GenReport", "GenTrainConfig", "GpOracle",
    "GrammarOutcome", "K_MEMORY", "MemoryBlock", "NoAcceptedCandidatesError",
    "NoSeedsError", "NonUnitNormError", "build_memory", "candidates_to_tsv",
    "conditional_generate", "decode", "decoder_forward", "gen_loss",
    "gen_metrics", "gp_fit", "gp_predict", "grammar_decode",
    "init_decoder_params", "init_memory_params", "knn_tanimoto_novelty",
    "landscape_pairs", "nucleus_sample", "perturb_latent", "rbf_kernel",
    "train_generator",
]
