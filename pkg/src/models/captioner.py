"""Shot caption generator: temporal attention, bidirectional encoder, greedy decoder."""

from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..core.error_utils import raise_dimension_error
from ..core.exceptions import ConfigError, ContractError
from ..corpus.text import BOS, EOS, PAD, RESERVED_TOKENS, UNK, Caption, Vocabulary
from ..diffcore import ops
from ..diffcore.losses import sequence_cross_entropy
from ..diffcore.nn import BiLSTM, Embedding, Linear, LSTMCell, Module
from ..diffcore.rng import SplitMix64
from ..diffcore.tensor import Tensor, as_tensor, no_grad

# Never emitted by greedy decoding
_BLOCKED_TOKENS = (PAD, BOS, UNK)


class CaptionerConfig(BaseModel):
    """Network sizes. ``decoder_hidden`` defaults to twice ``encoder_hidden``."""

    model_config = ConfigDict(extra="forbid")

    frame_dim: int = Field(32, gt=0)
    frames: int = Field(6, gt=0)
    encoder_hidden: int = Field(64, gt=0)
    decoder_hidden: int | None = Field(None, gt=0)
    embedding_dim: int = Field(32, gt=0)
    vocab_size: int = Field(len(RESERVED_TOKENS) + 1, gt=len(RESERVED_TOKENS))
    max_decode_length: int = Field(16, ge=2)

    @property
    def resolved_decoder_hidden(self) -> int:
        return self.decoder_hidden or 2 * self.encoder_hidden


@dataclass(frozen=True)
class AttentionWeights:
    logits: Tensor
    weights: Tensor


@dataclass(frozen=True)
class EncoderStates:
    h_fwd: Tensor
    c_fwd: Tensor
    h_bwd: Tensor
    c_bwd: Tensor


class Captioner(Module):
    """One sentence per shot from its k frame features."""

    def __init__(self, config: CaptionerConfig, rng: SplitMix64) -> None:
        if config.resolved_decoder_hidden != 2 * config.encoder_hidden:
            raise ConfigError(
                "decoder hidden size must be twice the encoder hidden size",
                details=[
                    {
                        "field": "decoder_hidden",
                        "message": f"expected {2 * config.encoder_hidden}, "
                        f"got {config.decoder_hidden}",
                    }
                ],
            )
        self.config = config
        hidden = config.resolved_decoder_hidden
        self.attention = Linear(config.frame_dim, 1, rng)
        self.encoder = BiLSTM(config.frame_dim, config.encoder_hidden, rng)
        self.embedding = Embedding(config.vocab_size, config.embedding_dim, rng)
        self.decoder = LSTMCell(config.embedding_dim, hidden, rng)
        self.output = Linear(hidden, config.vocab_size, rng)

    def _check_features(self, features: Any) -> Tensor:
        tensor = as_tensor(features)
        expected = (self.config.frames, self.config.frame_dim)
        if tensor.shape != expected:
            raise_dimension_error("captioner features", tensor.shape, expected)
        return tensor

    def temporal_attention(self, features: Any) -> tuple[AttentionWeights, Tensor]:
        """Score each frame with a shared scalar map and reweight it by its softmax."""
        frames = self._check_features(features)
        k = frames.shape[0]
        logits = ops.reshape(self.attention(frames), (k,))
        weights = ops.softmax(logits)
        weighted = ops.mul(frames, ops.reshape(weights, (k, 1)))
        return AttentionWeights(logits, weights), weighted

    def encode(self, weighted: Tensor) -> EncoderStates:
        out = self.encoder(weighted)
        return EncoderStates(out.h_fwd, out.c_fwd, out.h_bwd, out.c_bwd)

    @staticmethod
    def init_decoder(states: EncoderStates) -> tuple[Tensor, Tensor]:
        """Decoder (h0, c0): forward states first, then backward."""
        h0 = ops.concat([states.h_fwd, states.h_bwd])
        c0 = ops.concat([states.c_fwd, states.c_bwd])
        return h0, c0

    def _initial_state(self, features: Any) -> tuple[Tensor, Tensor]:
        _, weighted = self.temporal_attention(features)
        return self.init_decoder(self.encode(weighted))

    def caption_loss(self, features: Any, target: Sequence[int]) -> Tensor:
        """Teacher-forced negative log likelihood of ``target`` followed by EOS.

        ``target`` holds vocabulary indices of the groundtruth tokens, without BOS/EOS.
        """
        if not target:
            raise ContractError("groundtruth caption must not be empty")
        h, c = self._initial_state(features)
        inputs = self.embedding([BOS, *target])
        states = []
        for step in range(len(target) + 1):
            h, c = self.decoder(ops.row(inputs, step), h, c)
            states.append(h)
        logits = self.output(ops.stack(states))
        return sequence_cross_entropy(logits, [*target, EOS])

    def decode_greedy(self, features: Any) -> list[int]:
        """Argmax decoding from BOS until EOS or ``max_decode_length`` tokens."""
        tokens: list[int] = []
        with no_grad():
            h, c = self._initial_state(features)
            previous = BOS
            for _ in range(self.config.max_decode_length):
                x = ops.row(self.embedding([previous]), 0)
                h, c = self.decoder(x, h, c)
                logits = self.output(h).data.copy()
                logits[list(_BLOCKED_TOKENS)] = -np.inf
                previous = int(np.argmax(logits))
                if previous == EOS:
                    break
                tokens.append(previous)
        return tokens

    def caption(self, features: Any, vocab: Vocabulary) -> Caption:
        return Caption(tuple(vocab.decode(self.decode_greedy(features))))
