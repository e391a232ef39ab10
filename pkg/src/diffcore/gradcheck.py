"""Central finite-difference checks of analytic gradients."""

from collections.abc import Callable, Sequence

import numpy as np

from .rng import SplitMix64
from .tensor import Array, Tensor, no_grad

DEFAULT_STEP = 1e-5


def relative_error(analytic: Array, numeric: Array) -> float:
    """||a - n|| / max(||a|| + ||n||, tiny); zero when both vanish."""
    scale = float(np.linalg.norm(analytic) + np.linalg.norm(numeric))
    if scale < 1e-300:
        return 0.0
    return float(np.linalg.norm(analytic - numeric)) / scale


def _coordinates(
    size: int, max_coords: int | None, rng: SplitMix64 | None
) -> list[int]:
    if max_coords is None or size <= max_coords:
        return list(range(size))
    generator = rng or SplitMix64(0)
    return sorted(int(i) for i in generator.permutation(size)[:max_coords])


def numerical_gradient(
    loss_fn: Callable[[], Tensor],
    tensor: Tensor,
    coords: Sequence[int],
    h: float = DEFAULT_STEP,
) -> Array:
    """(f(x + h e_i) - f(x - h e_i)) / 2h at the given flat coordinates."""
    original = tensor.data
    flat = original.reshape(-1)
    result = np.zeros(len(coords))
    with no_grad():
        for out, index in enumerate(coords):
            values = flat.copy()
            values[index] += h
            tensor.data = values.reshape(original.shape)
            plus = loss_fn().item()
            values[index] -= 2.0 * h
            tensor.data = values.reshape(original.shape)
            minus = loss_fn().item()
            result[out] = (plus - minus) / (2.0 * h)
    tensor.data = original
    return result


def check_gradients(
    loss_fn: Callable[[], Tensor],
    tensors: Sequence[Tensor],
    *,
    h: float = DEFAULT_STEP,
    max_coords: int | None = None,
    rng: SplitMix64 | None = None,
) -> list[float]:
    """Relative error between analytic and numeric gradients, one per tensor.

    ``loss_fn`` must rebuild the graph on every call.
    """
    for t in tensors:
        t.zero_grad()
    loss_fn().backward()
    analytic = [
        (t.grad if t.grad is not None else np.zeros_like(t.data)).reshape(-1).copy()
        for t in tensors
    ]
    errors = []
    for t, grad in zip(tensors, analytic, strict=True):
        coords = _coordinates(t.data.size, max_coords, rng)
        numeric = numerical_gradient(loss_fn, t, coords, h)
        errors.append(relative_error(grad[coords], numeric))
    for t in tensors:
        t.zero_grad()
    return errors
