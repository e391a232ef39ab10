"""Adam with bias correction and global-norm gradient clipping."""

from collections.abc import Sequence

import numpy as np

from .tensor import Array, Parameter

DEFAULT_CLIP_NORM = 5.0


def clip_grad_norm(
    params: Sequence[Parameter], max_norm: float = DEFAULT_CLIP_NORM
) -> float:
    """Rescale trainable gradients so their joint L2 norm is at most ``max_norm``.

    Returns the norm measured before clipping.
    """
    trainable = [p for p in params if not p.frozen and p.grad is not None]
    norm = float(np.sqrt(sum(float(np.sum(p.gradient**2)) for p in trainable)))
    if norm > max_norm and norm > 0.0:
        factor = max_norm / norm
        for p in trainable:
            p.grad = p.gradient * factor
    return norm


class Adam:
    """First/second-moment adaptive update; frozen parameters are skipped."""

    def __init__(
        self,
        params: Sequence[Parameter],
        lr: float = 1e-3,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ) -> None:
        self.params = list(params)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.steps = 0
        self._m: dict[int, Array] = {}
        self._v: dict[int, Array] = {}

    def step(self) -> None:
        """Apply one update from the populated gradients, then zero them."""
        self.steps += 1
        correction1 = 1.0 - self.beta1**self.steps
        correction2 = 1.0 - self.beta2**self.steps
        for index, p in enumerate(self.params):
            if p.frozen:
                continue
            g = p.gradient
            m = self._m.get(index, np.zeros_like(p.data))
            v = self._v.get(index, np.zeros_like(p.data))
            m = self.beta1 * m + (1.0 - self.beta1) * g
            v = self.beta2 * v + (1.0 - self.beta2) * g * g
            self._m[index] = m
            self._v[index] = v
            m_hat = m / correction1
            v_hat = v / correction2
            p.assign(p.data - self.lr * m_hat / (np.sqrt(v_hat) + self.eps))
        self.zero_grad()

    def zero_grad(self) -> None:
        for p in self.params:
            p.zero_grad()


def adam_step(
    params: Sequence[Parameter],
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> Adam:
    """Single stand-alone update with a fresh optimizer state."""
    optimizer = Adam(params, lr=lr, beta1=beta1, beta2=beta2, eps=eps)
    optimizer.step()
    return optimizer
