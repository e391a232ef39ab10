"""Differentiable operations over :class:`Tensor`.

Every function records a tape node whose backward closure returns one gradient
per input (``None`` for inputs that do not need one).
"""

from collections.abc import Sequence
from typing import Any

import numpy as np

from ..core.error_utils import raise_dimension_error
from ..core.exceptions import DomainError
from .tensor import Array, Tensor, as_tensor, record


def _unbroadcast(grad: Array, shape: tuple[int, ...]) -> Array:
    """Sum out broadcast dimensions so ``grad`` matches ``shape``."""
    if grad.shape == shape:
        return grad
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _broadcast_shape(op: str, a: Tensor, b: Tensor) -> None:
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise_dimension_error(op, a.shape, b.shape)


def add(a: Any, b: Any) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("add", a, b)

    def backward(g: Array) -> tuple[Array, Array]:
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return record("add", a.data + b.data, (a, b), backward)


def sub(a: Any, b: Any) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("sub", a, b)

    def backward(g: Array) -> tuple[Array, Array]:
        return _unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)

    return record("sub", a.data - b.data, (a, b), backward)


def mul(a: Any, b: Any) -> Tensor:
    """Elementwise product with numpy broadcasting."""
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("mul", a, b)

    def backward(g: Array) -> tuple[Array, Array]:
        return _unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)

    return record("mul", a.data * b.data, (a, b), backward)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product; a 1-D left operand is treated as a row vector."""
    if a.ndim not in (1, 2) or b.ndim != 2 or a.shape[-1] != b.shape[0]:
        raise_dimension_error("matmul", a.shape, b.shape)

    def backward(g: Array) -> tuple[Array, Array]:
        if a.ndim == 1:
            return g @ b.data.T, np.outer(a.data, g)
        return g @ b.data.T, a.data.T @ g

    return record("matmul", a.data @ b.data, (a, b), backward)


def sigmoid(x: Any) -> Tensor:
    x = as_tensor(x)
    # exp(-|x|) never overflows
    decay = np.exp(-np.abs(x.data))
    out = np.where(x.data >= 0, 1.0 / (1.0 + decay), decay / (1.0 + decay))

    def backward(g: Array) -> tuple[Array]:
        return (g * out * (1.0 - out),)

    return record("sigmoid", out, (x,), backward)


def tanh(x: Any) -> Tensor:
    x = as_tensor(x)
    out = np.tanh(x.data)

    def backward(g: Array) -> tuple[Array]:
        return (g * (1.0 - out * out),)

    return record("tanh", out, (x,), backward)


def log(x: Any) -> Tensor:
    x = as_tensor(x)
    if np.any(x.data <= 0):
        raise DomainError("log of a non-positive value", error_code="LOG_DOMAIN")

    def backward(g: Array) -> tuple[Array]:
        return (g / x.data,)

    return record("log", np.log(x.data), (x,), backward)


def clamp(x: Any, low: float, high: float) -> Tensor:
    """Clip values into [low, high]; gradient passes only where unclipped."""
    x = as_tensor(x)
    inside = (x.data >= low) & (x.data <= high)

    def backward(g: Array) -> tuple[Array]:
        return (g * inside,)

    return record("clamp", np.clip(x.data, low, high), (x,), backward)


def softmax(x: Tensor) -> Tensor:
    """Softmax over a 1-D tensor, computed with max subtraction."""
    if x.ndim != 1 or x.shape[0] == 0:
        raise DomainError(
            f"softmax needs a non-empty vector, got shape {x.shape}",
            error_code="EMPTY_INPUT",
        )
    shifted = np.exp(x.data - x.data.max())
    out = shifted / shifted.sum()

    def backward(g: Array) -> tuple[Array]:
        return (out * (g - np.dot(g, out)),)

    return record("softmax", out, (x,), backward)


def log_softmax(x: Tensor) -> Tensor:
    if x.ndim != 1 or x.shape[0] == 0:
        raise DomainError(
            f"log_softmax needs a non-empty vector, got shape {x.shape}",
            error_code="EMPTY_INPUT",
        )
    shifted = x.data - x.data.max()
    out = shifted - np.log(np.exp(shifted).sum())

    def backward(g: Array) -> tuple[Array]:
        return (g - np.exp(out) * g.sum(),)

    return record("log_softmax", out, (x,), backward)


def total(x: Tensor) -> Tensor:
    """Sum of all elements, as a scalar tensor."""

    def backward(g: Array) -> tuple[Array]:
        return (np.broadcast_to(g, x.shape).copy(),)

    return record("sum", np.array(x.data.sum()), (x,), backward)


def mean_rows(x: Tensor) -> Tensor:
    """Mean over axis 0 of a 2-D tensor."""
    if x.ndim != 2 or x.shape[0] == 0:
        raise DomainError(f"mean_rows needs a non-empty matrix, got {x.shape}")
    rows = x.shape[0]

    def backward(g: Array) -> tuple[Array]:
        return (np.broadcast_to(g / rows, x.shape).copy(),)

    return record("mean_rows", x.data.mean(axis=0), (x,), backward)


def reshape(x: Tensor, shape: tuple[int, ...]) -> Tensor:
    if int(np.prod(shape)) != x.data.size:
        raise_dimension_error("reshape", x.shape, shape)

    def backward(g: Array) -> tuple[Array]:
        return (g.reshape(x.shape),)

    return record("reshape", x.data.reshape(shape), (x,), backward)


def concat(tensors: Sequence[Tensor]) -> Tensor:
    """Concatenate 1-D tensors end to end."""
    if not tensors:
        raise DomainError("concat needs at least one tensor")
    for t in tensors:
        if t.ndim != 1:
            raise_dimension_error("concat", *(u.shape for u in tensors))
    sizes = [t.shape[0] for t in tensors]
    bounds = np.cumsum([0, *sizes])

    def backward(g: Array) -> list[Array]:
        return [g[bounds[i] : bounds[i + 1]] for i in range(len(tensors))]

    data = np.concatenate([t.data for t in tensors])
    return record("concat", data, tensors, backward)


def stack(tensors: Sequence[Tensor]) -> Tensor:
    """Stack equally shaped tensors along a new leading axis."""
    if not tensors:
        raise DomainError("stack needs at least one tensor")
    shape = tensors[0].shape
    if any(t.shape != shape for t in tensors):
        raise_dimension_error("stack", *(t.shape for t in tensors))

    def backward(g: Array) -> list[Array]:
        return [g[i] for i in range(len(tensors))]

    return record("stack", np.stack([t.data for t in tensors]), tensors, backward)


def row(x: Tensor, index: int) -> Tensor:
    """Select row ``index`` of a 2-D tensor."""
    if x.ndim != 2 or not 0 <= index < x.shape[0]:
        raise_dimension_error(f"row[{index}]", x.shape)

    def backward(g: Array) -> tuple[Array]:
        full = np.zeros_like(x.data)
        full[index] = g
        return (full,)

    return record("row", x.data[index], (x,), backward)


def slice_vector(x: Tensor, start: int, stop: int) -> Tensor:
    if x.ndim != 1 or not 0 <= start < stop <= x.shape[0]:
        raise_dimension_error(f"slice[{start}:{stop}]", x.shape)

    def backward(g: Array) -> tuple[Array]:
        full = np.zeros_like(x.data)
        full[start:stop] = g
        return (full,)

    return record("slice", x.data[start:stop], (x,), backward)


def embedding(weight: Tensor, indices: Sequence[int]) -> Tensor:
    """Gather rows of ``weight`` (V x E) for each index; repeated rows accumulate."""
    idx = np.asarray(indices, dtype=np.int64)
    if weight.ndim != 2 or idx.ndim != 1:
        raise_dimension_error("embedding", weight.shape, idx.shape)
    if idx.size and (idx.min() < 0 or idx.max() >= weight.shape[0]):
        from ..core.exceptions import TokenIndexError

        raise TokenIndexError(
            f"embedding index outside [0, {weight.shape[0]})",
            context={"indices": idx.tolist()},
        )

    def backward(g: Array) -> tuple[Array]:
        full = np.zeros_like(weight.data)
        np.add.at(full, idx, g)
        return (full,)

    return record("embedding", weight.data[idx], (weight,), backward)


def lstm_cell(
    x: Tensor,
    h: Tensor,
    c: Tensor,
    w_x: Tensor,
    w_h: Tensor,
    b: Tensor,
) -> tuple[Tensor, Tensor]:
    """One step of the conventional gated recurrent cell.

    Gate order in the packed weights is input, forget, candidate, output.
    Returns (h', c').
    """
    hidden = h.shape[0] if h.ndim == 1 else -1
    if (
        x.ndim != 1
        or h.ndim != 1
        or c.shape != h.shape
        or w_x.shape != (x.shape[0], 4 * hidden)
        or w_h.shape != (hidden, 4 * hidden)
        or b.shape != (4 * hidden,)
    ):
        raise_dimension_error(
            "lstm_cell", x.shape, h.shape, c.shape, w_x.shape, w_h.shape, b.shape
        )

    z = x.data @ w_x.data + h.data @ w_h.data + b.data
    gates = 1.0 / (1.0 + np.exp(-np.clip(z, -500.0, 500.0)))
    i_gate = gates[:hidden]
    f_gate = gates[hidden : 2 * hidden]
    o_gate = gates[3 * hidden :]
    g_cand = np.tanh(z[2 * hidden : 3 * hidden])
    c_next = f_gate * c.data + i_gate * g_cand
    tanh_c = np.tanh(c_next)
    h_next = o_gate * tanh_c

    def backward(grad: Array) -> tuple[Array, Array, Array, Array, Array, Array]:
        dh = grad[:hidden]
        dc = grad[hidden:] + dh * o_gate * (1.0 - tanh_c * tanh_c)
        dz = np.concatenate(
            [
                dc * g_cand * i_gate * (1.0 - i_gate),
                dc * c.data * f_gate * (1.0 - f_gate),
                dc * i_gate * (1.0 - g_cand * g_cand),
                dh * tanh_c * o_gate * (1.0 - o_gate),
            ]
        )
        return (
            w_x.data @ dz,
            w_h.data @ dz,
            dc * f_gate,
            np.outer(x.data, dz),
            np.outer(h.data, dz),
            dz,
        )

    packed = record(
        "lstm_cell",
        np.concatenate([h_next, c_next]),
        (x, h, c, w_x, w_h, b),
        backward,
    )
    return slice_vector(packed, 0, hidden), slice_vector(packed, hidden, 2 * hidden)
