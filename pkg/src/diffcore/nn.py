"""Parameter containers and the recurrent building blocks shared by every network."""

from collections.abc import Iterator, Mapping
from dataclasses import dataclass

import numpy as np

from ..core.error_utils import raise_dimension_error, raise_validation_error
from ..core.exceptions import DomainError
from . import ops
from .rng import SplitMix64
from .tensor import Array, Parameter, Tensor


def uniform_init(rng: SplitMix64, shape: tuple[int, ...], fan_in: int) -> Array:
    """Uniform in [-s, s] with s = 1/sqrt(fan_in)."""
    scale = 1.0 / np.sqrt(fan_in)
    return rng.uniform_range(-scale, scale, shape)


class Module:
    """Owns parameters and sub-modules; attribute order fixes parameter order."""

    def named_parameters(self, prefix: str = "") -> Iterator[tuple[str, Parameter]]:
        for attr, value in vars(self).items():
            name = f"{prefix}{attr}"
            if isinstance(value, Parameter):
                yield name, value
            elif isinstance(value, Module):
                yield from value.named_parameters(f"{name}.")

    def parameters(self) -> list[Parameter]:
        return [p for _, p in self.named_parameters()]

    def freeze(self) -> None:
        for p in self.parameters():
            p.frozen = True

    def unfreeze(self) -> None:
        for p in self.parameters():
            p.frozen = False

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.zero_grad()

    def zero_(self) -> None:
        """Set every parameter to zero."""
        for p in self.parameters():
            p.assign(np.zeros_like(p.data))

    def state_dict(self, prefix: str = "") -> dict[str, Array]:
        return {f"{prefix}{name}": p.numpy() for name, p in self.named_parameters()}

    def load_state_dict(self, state: Mapping[str, Array], prefix: str = "") -> None:
        """Load values by name; every parameter must be present with its shape."""
        missing = []
        for name, p in self.named_parameters():
            key = f"{prefix}{name}"
            if key not in state:
                missing.append(key)
                continue
            p.assign(state[key])
        if missing:
            raise_validation_error(
                "checkpoint is missing parameters",
                details=[{"field": key, "message": "missing"} for key in missing],
            )

    def name_parameters(self, prefix: str) -> None:
        """Stamp fully qualified names on parameters (used in logs and errors)."""
        for name, p in self.named_parameters():
            p.name = f"{prefix}{name}"


class Linear(Module):
    """Affine map x @ W + b for vectors or row-stacked matrices."""

    def __init__(self, in_dim: int, out_dim: int, rng: SplitMix64) -> None:
        self.in_dim = in_dim
        self.out_dim = out_dim
        self.weight = Parameter(uniform_init(rng, (in_dim, out_dim), in_dim))
        self.bias = Parameter(uniform_init(rng, (out_dim,), in_dim))

    def __call__(self, x: Tensor) -> Tensor:
        if x.shape[-1] != self.in_dim:
            raise_dimension_error("linear", x.shape, self.weight.shape)
        return ops.matmul(x, self.weight) + self.bias


class Embedding(Module):
    """Token index to vector lookup; initialised as a linear map from one-hot V."""

    def __init__(self, vocab_size: int, dim: int, rng: SplitMix64) -> None:
        self.vocab_size = vocab_size
        self.dim = dim
        self.weight = Parameter(uniform_init(rng, (vocab_size, dim), vocab_size))

    def __call__(self, indices: list[int]) -> Tensor:
        return ops.embedding(self.weight, indices)


class LSTMCell(Module):
    """Gated recurrent cell with packed input/forget/candidate/output weights."""

    def __init__(self, input_dim: int, hidden: int, rng: SplitMix64) -> None:
        self.input_dim = input_dim
        self.hidden = hidden
        fan_in = input_dim + hidden
        self.w_x = Parameter(uniform_init(rng, (input_dim, 4 * hidden), fan_in))
        self.w_h = Parameter(uniform_init(rng, (hidden, 4 * hidden), fan_in))
        self.b = Parameter(uniform_init(rng, (4 * hidden,), fan_in))

    def __call__(self, x: Tensor, h: Tensor, c: Tensor) -> tuple[Tensor, Tensor]:
        return ops.lstm_cell(x, h, c, self.w_x, self.w_h, self.b)

    def initial_state(self) -> tuple[Tensor, Tensor]:
        zeros = np.zeros(self.hidden)
        return Tensor(zeros), Tensor(zeros)


@dataclass(frozen=True)
class BiLSTMOutput:
    """Per-step outputs (T x 2H, forward half first) and both final states."""

    outputs: Tensor
    h_fwd: Tensor
    c_fwd: Tensor
    h_bwd: Tensor
    c_bwd: Tensor

    def summary(self) -> Tensor:
        """concat(h_fwd, c_fwd, h_bwd, c_bwd), length 4H."""
        return ops.concat([self.h_fwd, self.c_fwd, self.h_bwd, self.c_bwd])


def bilstm(seq: Tensor, forward: LSTMCell, backward: LSTMCell) -> BiLSTMOutput:
    """Run ``forward`` over t=1..T and ``backward`` over t=T..1."""
    if seq.ndim != 2 or seq.shape[0] == 0:
        raise DomainError(
            f"bilstm needs a non-empty T x d sequence, got shape {seq.shape}",
            error_code="EMPTY_SEQUENCE",
        )
    steps = seq.shape[0]
    rows = [ops.row(seq, t) for t in range(steps)]

    h_f, c_f = forward.initial_state()
    fwd_states: list[Tensor] = []
    for t in range(steps):
        h_f, c_f = forward(rows[t], h_f, c_f)
        fwd_states.append(h_f)

    h_b, c_b = backward.initial_state()
    bwd_states: list[Tensor] = [h_b] * steps
    for t in reversed(range(steps)):
        h_b, c_b = backward(rows[t], h_b, c_b)
        bwd_states[t] = h_b

    outputs = ops.stack(
        [ops.concat([fwd_states[t], bwd_states[t]]) for t in range(steps)]
    )
    return BiLSTMOutput(outputs, h_f, c_f, h_b, c_b)


class BiLSTM(Module):
    """Two independent cells reading a sequence in opposite directions."""

    def __init__(self, input_dim: int, hidden: int, rng: SplitMix64) -> None:
        self.input_dim = input_dim
        self.hidden = hidden
        self.forward = LSTMCell(input_dim, hidden, rng)
        self.backward = LSTMCell(input_dim, hidden, rng)

    def __call__(self, seq: Tensor) -> BiLSTMOutput:
        if seq.ndim == 2 and seq.shape[1] != self.input_dim:
            raise_dimension_error("bilstm", seq.shape, (seq.shape[0], self.input_dim))
        return bilstm(seq, self.forward, self.backward)
