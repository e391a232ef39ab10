"""Negative log-likelihood losses."""

from collections.abc import Sequence

import numpy as np

from ..core.exceptions import ContractError, TokenIndexError
from . import ops
from .tensor import Array, Tensor, as_tensor, record

BCE_EPSILON = 1e-7


def cross_entropy_from_logits(logits: Tensor, target: int) -> Tensor:
    """-log softmax(logits)[target], as a scalar tensor."""
    vocab = logits.shape[0] if logits.ndim == 1 else 0
    if not 0 <= target < vocab:
        raise TokenIndexError(
            f"target {target} outside [0, {vocab})",
            context={"target": target, "vocab_size": vocab},
        )
    log_probs = ops.log_softmax(logits)
    picked = ops.slice_vector(log_probs, target, target + 1)
    return ops.reshape(ops.mul(picked, -1.0), ())


def binary_cross_entropy(p: Tensor | float, label: int) -> Tensor:
    """-(y log p + (1 - y) log(1 - p)) with p clamped to [eps, 1 - eps]."""
    if label not in (0, 1):
        raise ContractError(f"binary label must be 0 or 1, got {label}")
    prob = as_tensor(p)
    clamped = np.clip(prob.data, BCE_EPSILON, 1.0 - BCE_EPSILON)
    value = -np.log(clamped) if label == 1 else -np.log(1.0 - clamped)
    inside = (prob.data >= BCE_EPSILON) & (prob.data <= 1.0 - BCE_EPSILON)

    def backward(g: Array) -> tuple[Array]:
        local = -1.0 / clamped if label == 1 else 1.0 / (1.0 - clamped)
        return (g * local * inside,)

    return record("binary_cross_entropy", np.asarray(value), (prob,), backward)


def bce_sum(probs: Tensor | Sequence[Tensor], labels: Sequence[int]) -> Tensor:
    """Summed binary cross-entropy over aligned predictions, ascending index order.

    ``probs`` is either a vector or a list of scalar tensors.
    """
    count = probs.shape[0] if isinstance(probs, Tensor) and probs.ndim == 1 else None
    if count is None:
        count = len(probs)  # type: ignore[arg-type]
    if count != len(labels):
        raise ContractError(
            f"predictions and labels differ in length ({count} vs {len(labels)})",
            error_code="LENGTH_MISMATCH",
        )
    if count == 0:
        return Tensor(0.0)
    if any(label not in (0, 1) for label in labels):
        raise ContractError(f"binary labels must be 0 or 1, got {list(labels)}")
    vector = probs if isinstance(probs, Tensor) else ops.stack(list(probs))
    if vector.shape != (count,):
        vector = ops.reshape(vector, (count,))
    y = np.asarray(labels, dtype=np.float64)
    clamped = np.clip(vector.data, BCE_EPSILON, 1.0 - BCE_EPSILON)
    value = -np.sum(y * np.log(clamped) + (1.0 - y) * np.log(1.0 - clamped))
    inside = (vector.data >= BCE_EPSILON) & (vector.data <= 1.0 - BCE_EPSILON)

    def backward(g: Array) -> tuple[Array]:
        local = -y / clamped + (1.0 - y) / (1.0 - clamped)
        return (g * local * inside,)

    return record("bce_sum", np.asarray(value), (vector,), backward)


def sequence_cross_entropy(logits: Tensor, targets: Sequence[int]) -> Tensor:
    """Sum over rows of -log softmax(logits[t])[targets[t]] for a T x V matrix."""
    if logits.ndim != 2 or logits.shape[0] != len(targets):
        raise ContractError(
            f"logits {logits.shape} do not align with {len(targets)} targets",
            error_code="LENGTH_MISMATCH",
        )
    vocab = logits.shape[1]
    idx = np.asarray(targets, dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= vocab):
        raise TokenIndexError(
            f"target outside [0, {vocab})",
            context={"targets": idx.tolist(), "vocab_size": vocab},
        )
    shifted = logits.data - logits.data.max(axis=1, keepdims=True)
    log_probs = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    rows = np.arange(idx.size)
    value = -log_probs[rows, idx].sum()

    def backward(g: Array) -> tuple[Array]:
        local = np.exp(log_probs)
        local[rows, idx] -= 1.0
        return (g * local,)

    return record("sequence_cross_entropy", np.asarray(value), (logits,), backward)
