"""Reverse-mode differentiable array engine and optimizers."""

from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .diff import (
    DiffArray,
    DoubleBackwardError,
    NonScalarLossError,
    ShapeMismatchError,
    ZeroVectorError,
    add,
    asum,
    backward,
    concat,
    constant,
    dropout,
    embedding_lookup,
    exp,
    gather_rows,
    l2_normalize,
    layer_norm,
    log,
    log_softmax_rows,
    matmul,
    mean_pool_rows,
    mul,
    neg,
    parameter,
    relu,
    reshape,
    scale,
    scatter_add_rows,
    slice_axis1,
    softmax_rows,
    sub,
    take_along_rows,
    transpose,
)
from .gradcheck import grad_check
from .optim import OptimizerState, optimizer_step
from .params import ParamStore, glorot, normal_embed

__all__ = [
    "CheckpointError", "DiffArray", "DoubleBackwardError",
    "NonScalarLossError", "OptimizerState", "ParamStore",
    "ShapeMismatchError", "ZeroVectorError", "add", "asum", "backward",
    "concat", "constant", "dropout", "embedding_lookup", "exp",
    "gather_rows", "glorot", "grad_check", "l2_normalize", "layer_norm",
    "load_checkpoint", "log", "log_softmax_rows", "matmul",
    "mean_pool_rows", "mul", "neg", "normal_embed", "optimizer_step",
    "parameter", "relu", "reshape", "save_checkpoint", "scale",
    "scatter_add_rows", "slice_axis1", "softmax_rows", "sub",
    "take_along_rows", "transpose",
]
