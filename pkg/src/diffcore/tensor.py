"""Dense double-precision tensors with a dynamic reverse-mode tape."""

from collections.abc import Callable, Generator, Sequence
from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass
from typing import Any

import numpy as np
import numpy.typing as npt

from ..core.exceptions import ContractError, DomainError

Array = npt.NDArray[np.float64]
BackwardFn = Callable[[Array], Sequence[Array | None]]

_grad_enabled: ContextVar[bool] = ContextVar("grad_enabled", default=True)


@contextmanager
def no_grad() -> Generator[None, None, None]:
    """Disable tape recording in the current context (thread-safe)."""
    token = _grad_enabled.set(False)
    try:
        yield
    finally:
        _grad_enabled.reset(token)


def is_grad_enabled() -> bool:
    """Whether new operations are recorded on the tape."""
    return _grad_enabled.get()


@dataclass(frozen=True, slots=True)
class TapeNode:
    """One recorded operation: its inputs and how to route gradients to them."""

    op: str
    inputs: tuple["Tensor", ...]
    backward: BackwardFn


class Tensor:
    """Immutable float64 array, optionally carrying the tape node that produced it."""

    __slots__ = ("data", "requires_grad", "grad", "node")

    def __init__(
        self,
        data: Any,
        *,
        requires_grad: bool = False,
        node: TapeNode | None = None,
    ) -> None:
        array = np.array(data, dtype=np.float64)
        array.flags.writeable = False
        self.data: Array = array
        self.requires_grad = requires_grad
        self.grad: Array | None = None
        self.node = node

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self.data.shape)

    @property
    def ndim(self) -> int:
        return int(self.data.ndim)

    def item(self) -> float:
        """Return the value of a single-element tensor."""
        if self.data.size != 1:
            raise ContractError(
                f"item() needs a single element, got shape {self.shape}"
            )
        return float(self.data.reshape(()))

    def numpy(self) -> Array:
        """Return a writable copy of the values."""
        return self.data.copy()

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"

    # Operator sugar, implemented in ops
    def __add__(self, other: Any) -> "Tensor":
        from . import ops

        return ops.add(self, other)

    def __radd__(self, other: Any) -> "Tensor":
        from . import ops

        return ops.add(other, self)

    def __sub__(self, other: Any) -> "Tensor":
        from . import ops

        return ops.sub(self, other)

    def __rsub__(self, other: Any) -> "Tensor":
        from . import ops

        return ops.sub(other, self)

    def __mul__(self, other: Any) -> "Tensor":
        from . import ops

        return ops.mul(self, other)

    def __rmul__(self, other: Any) -> "Tensor":
        from . import ops

        return ops.mul(other, self)

    def __neg__(self) -> "Tensor":
        from . import ops

        return ops.mul(self, -1.0)

    def __matmul__(self, other: "Tensor") -> "Tensor":
        from . import ops

        return ops.matmul(self, other)

    def backward(self, grad: Array | None = None) -> None:
        """Propagate gradients from this tensor to every leaf that requires them.

        Leaf gradients accumulate into ``.grad``; a tensor reached along several
        paths receives the sum of their contributions.
        """
        if not self.requires_grad:
            raise ContractError(
                "backward() called on a tensor that does not require grad"
            )
        if grad is None:
            if self.data.size != 1:
                raise ContractError(
                    "backward() without a seed gradient needs a scalar, "
                    f"got {self.shape}"
                )
            grad = np.ones_like(self.data)

        order = self._topological_order()
        pending: dict[int, Array] = {id(self): np.asarray(grad, dtype=np.float64)}
        for tensor in reversed(order):
            g = pending.pop(id(tensor), None)
            if g is None:
                continue
            if tensor.node is None:
                tensor.grad = g.copy() if tensor.grad is None else tensor.grad + g
                continue
            for parent, parent_grad in zip(
                tensor.node.inputs, tensor.node.backward(g), strict=True
            ):
                if parent_grad is None or not parent.requires_grad:
                    continue
                key = id(parent)
                if key in pending:
                    pending[key] = pending[key] + parent_grad
                else:
                    pending[key] = parent_grad

    def _topological_order(self) -> list["Tensor"]:
        """Inputs before outputs; each reachable tensor exactly once."""
        order: list[Tensor] = []
        visited: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            tensor, expanded = stack.pop()
            if expanded:
                order.append(tensor)
                continue
            if id(tensor) in visited:
                continue
            visited.add(id(tensor))
            stack.append((tensor, True))
            if tensor.node is not None:
                for parent in tensor.node.inputs:
                    if parent.requires_grad and id(parent) not in visited:
                        stack.append((parent, False))
        return order


class Parameter(Tensor):
    """A named trainable leaf.

    Frozen parameters keep gradients but are never updated.
    """

    __slots__ = ("name", "frozen")

    def __init__(self, data: Any, *, name: str = "", frozen: bool = False) -> None:
        super().__init__(data, requires_grad=True)
        self.name = name
        self.frozen = frozen

    @property
    def value(self) -> Tensor:
        return self

    @property
    def gradient(self) -> Array:
        """Accumulated gradient, zeros when nothing has flowed yet."""
        if self.grad is None:
            return np.zeros_like(self.data)
        return self.grad

    def assign(self, values: Any) -> None:
        """Replace the parameter values (shape must not change)."""
        array = np.array(values, dtype=np.float64)
        if array.shape != self.data.shape:
            from ..core.error_utils import raise_dimension_error

            raise_dimension_error(f"assign {self.name}", self.data.shape, array.shape)
        array.flags.writeable = False
        self.data = array

    def __repr__(self) -> str:
        return (
            f"Parameter(name={self.name!r}, shape={self.shape}, "
            f"frozen={self.frozen})"
        )


def as_tensor(value: Any) -> Tensor:
    """Wrap constants; tensors pass through unchanged."""
    if isinstance(value, Tensor):
        return value
    return Tensor(value)


def record(
    op: str,
    data: Array,
    inputs: Sequence[Tensor],
    backward: BackwardFn,
) -> Tensor:
    """Create an op result, attaching a tape node when any input needs gradients."""
    if not np.all(np.isfinite(data)):
        raise DomainError(
            f"{op} produced non-finite values",
            error_code="NON_FINITE",
            context={"op": op},
        )
    needs_grad = is_grad_enabled() and any(t.requires_grad for t in inputs)
    node = TapeNode(op, tuple(inputs), backward) if needs_grad else None
    return Tensor(data, requires_grad=needs_grad, node=node)
