"""Minimal dense-tensor reverse-mode differentiation substrate."""

from .checkpoint import (
    decode_checkpoint,
    encode_checkpoint,
    load_checkpoint,
    save_checkpoint,
)
from .losses import (
    bce_sum,
    binary_cross_entropy,
    cross_entropy_from_logits,
    sequence_cross_entropy,
)
from .nn import BiLSTM, BiLSTMOutput, Embedding, Linear, LSTMCell, Module, bilstm
from .ops import lstm_cell, matmul, sigmoid, softmax
from .optim import Adam, adam_step, clip_grad_norm
from .rng import SplitMix64
from .tensor import Parameter, TapeNode, Tensor, no_grad

__all__ = [
    "Adam",
    "BiLSTM",
    "BiLSTMOutput",
    "Embedding",
    "LSTMCell",
    "Linear",
    "Module",
    "Parameter",
    "SplitMix64",
    "TapeNode",
    "Tensor",
    "adam_step",
    "bce_sum",
    "bilstm",
    "binary_cross_entropy",
    "clip_grad_norm",
    "cross_entropy_from_logits",
    "decode_checkpoint",
    "encode_checkpoint",
    "load_checkpoint",
    "lstm_cell",
    "matmul",
    "no_grad",
    "save_checkpoint",
    "sequence_cross_entropy",
    "sigmoid",
    "softmax",
]
