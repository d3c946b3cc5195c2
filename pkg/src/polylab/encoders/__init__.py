"""Modality encoders, shared-space projection, and anchor fusion."""

from .blocks import (
    feed_forward,
    init_attention_block,
    multi_head_attention,
    transformer_block,
)
from .config import EncoderConfig
from .modalities import (
    CoordinateMismatchError,
    DegenerateAnchorError,
    EmptyGraphError,
    LengthExceededError,
    LengthMismatchError,
    ModalityEmbedding,
    encode_fingerprint,
    encode_geometry,
    encode_graph,
    encode_sequence,
    fuse_all,
    fuse_anchor,
    graph_z_indices,
    init_all_params,
    init_fingerprint_params,
    init_geometry_params,
    init_graph_params,
    init_projection_params,
    init_sequence_params,
    neighbor_pairs,
    project,
    radial_basis,
)

__all__ = [
    "CoordinateMismatchError", "DegenerateAnchorError", "EmptyGraphError",
    "EncoderConfig", "LengthExceededError", "LengthMismatchError",
    "ModalityEmbedding", "encode_fingerprint", "encode_geometry",
    "encode_graph", "encode_sequence", "feed_forward", "fuse_all",
    "fuse_anchor", "graph_z_indices", "init_all_params",
    "init_attention_block", "init_fingerprint_params",
    "init_geometry_params", "init_graph_params", "init_projection_params",
    "init_sequence_params", "multi_head_attention", "neighbor_pairs",
    "project", "radial_basis", "transformer_block",
]
