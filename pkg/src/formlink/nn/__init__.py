"""Minimal dense-tensor numeric core with reverse-mode differentiation."""

from .optim import AdamState, DivergedError, adam_step, lr_schedule
from .params import ModelParams, ParamSpec, init_params, load_checkpoint, save_checkpoint
from .tape import (
    DEFAULT_DTYPE,
    ShapeError,
    Tensor,
    absolute,
    add,
    concat,
    constant,
    elu,
    gather_rows,
    grad_check,
    hadamard,
    leaf,
    leaky_relu,
    log,
    matmul,
    mean,
    pairwise_bilinear,
    reshape,
    scalar_mul,
    softmax,
    transpose,
    tsum,
)

__all__ = [
    "AdamState",
    "DivergedError",
    "adam_step",
    "lr_schedule",
    "ModelParams",
    "ParamSpec",
    "init_params",
    "load_checkpoint",
    "save_checkpoint",
    "DEFAULT_DTYPE",
    "ShapeError",
    "Tensor",
    "absolute",
    "add",
    "concat",
    "constant",
    "elu",
    "gather_rows",
    "grad_check",
    "hadamard",
    "leaf",
    "leaky_relu",
    "log",
    "matmul",
    "mean",
    "pairwise_bilinear",
    "reshape",
    "scalar_mul",
    "softmax",
    "transpose",
    "tsum",
]
