"""Seeded SplitMix64 generator.

Output i of a stream seeded with s is mix(s + i * GAMMA), which lets numpy
produce whole blocks at once while staying bit-identical across platforms and
numpy versions.
"""

from collections.abc import Sequence
from typing import TypeVar

import numpy as np
import numpy.typing as npt

T = TypeVar("T")

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


class SplitMix64:
    """Deterministic 64-bit generator with vectorized draws."""

    def __init__(self, seed: int) -> None:
        self._state = seed & _MASK

    @property
    def state(self) -> int:
        return self._state

    def next_u64(self, n: int) -> npt.NDArray[np.uint64]:
        """Draw ``n`` raw 64-bit outputs."""
        steps = np.arange(1, n + 1, dtype=np.uint64)
        z = np.uint64(self._state) + steps * np.uint64(_GAMMA)
        self._state = (self._state + n * _GAMMA) & _MASK
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
        return z ^ (z >> np.uint64(31))

    def fork(self) -> "SplitMix64":
        """Independent child stream seeded from this one."""
        return SplitMix64(int(self.next_u64(1)[0]))

    def uniform(self, shape: int | tuple[int, ...] = ()) -> npt.NDArray[np.float64]:
        """Uniform draws in [0, 1) with 53 bits of precision."""
        dims = (shape,) if isinstance(shape, int) else shape
        n = int(np.prod(dims)) if dims else 1
        bits = self.next_u64(n) >> np.uint64(11)
        return (bits.astype(np.float64) * 2.0**-53).reshape(dims)

    def uniform_range(
        self, low: float, high: float, shape: tuple[int, ...]
    ) -> npt.NDArray[np.float64]:
        return low + (high - low) * self.uniform(shape)

    def normal(
        self, shape: tuple[int, ...], scale: float = 1.0
    ) -> npt.NDArray[np.float64]:
        """Gaussian draws via Box-Muller (cosine branch only)."""
        n = int(np.prod(shape)) if shape else 1
        u1 = 1.0 - self.uniform(n)
        u2 = self.uniform(n)
        z = np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)
        return (scale * z).reshape(shape)

    def integers(self, high: int, n: int) -> npt.NDArray[np.int64]:
        """``n`` integers in [0, high)."""
        values = np.floor(self.uniform(n) * high).astype(np.int64)
        return np.minimum(values, high - 1)

    def integer(self, high: int) -> int:
        return int(self.integers(high, 1)[0])

    def random(self) -> float:
        return float(self.uniform(1)[0])

    def permutation(self, n: int) -> npt.NDArray[np.int64]:
        return np.argsort(self.uniform(n), kind="stable").astype(np.int64)

    def choice(self, items: Sequence[T]) -> T:
        return items[self.integer(len(items))]

    def geometric(self, p: float) -> int:
        """Number of trials up to and including the first success (support >= 1)."""
        if p >= 1.0:
            return 1
        u = 1.0 - self.random()
        return 1 + int(np.floor(np.log(u) / np.log1p(-p)))
