"""Visual-language content matching: does a generated sentence describe its shot?"""

from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any

from pydantic import BaseModel, ConfigDict, Field

from ..core.error_utils import raise_dimension_error
from ..core.exceptions import ConfigError
from ..core.logging import get_logger
from ..corpus.text import RESERVED_TOKENS, UNK
from ..diffcore import ops
from ..diffcore.losses import bce_sum
from ..diffcore.nn import BiLSTM, Embedding, Linear, Module
from ..diffcore.rng import SplitMix64
from ..diffcore.tensor import Tensor, as_tensor

logger = get_logger(__name__)


class VLCMUConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    frame_dim: int = Field(32, gt=0)
    vocab_size: int = Field(len(RESERVED_TOKENS) + 1, gt=len(RESERVED_TOKENS))
    embedding_dim: int = Field(32, gt=0)
    visual_hidden: int = Field(32, gt=0)
    language_hidden: int = Field(32, gt=0)

    @property
    def feature_dim(self) -> int:
        """Length of the fused visual-language feature."""
        return 4 * self.visual_hidden


@dataclass(frozen=True)
class MatchResult:
    """Correctness score and fused feature for one (shot, sentence) pair."""

    alpha: Tensor
    feature: Tensor
    empty_sentence: bool = False


class VLCMU(Module):
    """Two recurrent branches fused by elementwise product, then a sigmoid head."""

    def __init__(self, config: VLCMUConfig, rng: SplitMix64) -> None:
        if config.visual_hidden != config.language_hidden:
            raise ConfigError(
                "visual and language branches must produce equal-length summaries",
                details=[
                    {
                        "field": "language_hidden",
                        "message": f"expected {config.visual_hidden}, "
                        f"got {config.language_hidden}",
                    }
                ],
            )
        self.config = config
        self.visual = BiLSTM(config.frame_dim, config.visual_hidden, rng)
        self.embedding = Embedding(config.vocab_size, config.embedding_dim, rng)
        self.language = BiLSTM(config.embedding_dim, config.language_hidden, rng)
        self.head = Linear(config.feature_dim, 1, rng)

    def fuse(self, features: Any, sentence: Sequence[int]) -> tuple[Tensor, bool]:
        """f_vl for a shot; an empty sentence is read as a single UNK."""
        frames = as_tensor(features)
        if frames.ndim != 2 or frames.shape[1] != self.config.frame_dim:
            raise_dimension_error(
                "vlcmu features", frames.shape, (-1, self.config.frame_dim)
            )
        empty = len(sentence) == 0
        if empty:
            logger.debug("Empty generated sentence read as UNK")
        indices = list(sentence) if not empty else [UNK]
        visual = self.visual(frames).summary()
        language = self.language(self.embedding(indices)).summary()
        return ops.mul(visual, language), empty

    def score(self, feature: Tensor) -> Tensor:
        """alpha = sigmoid(linear(f_vl)) as a scalar tensor."""
        return ops.reshape(ops.sigmoid(self.head(feature)), ())

    def match(self, features: Any, sentence: Sequence[int]) -> MatchResult:
        feature, empty = self.fuse(features, sentence)
        return MatchResult(self.score(feature), feature, empty)


def pseudo_label(generated: Sequence[str], groundtruth: Sequence[str]) -> int:
    """1 iff more than half of the generated tokens occur in the groundtruth.

    Generated tokens are counted per occurrence, groundtruth tokens as a set.
    Reserved tokens are dropped from both sides; a sentence with no other
    tokens is labelled 0.
    """
    words = [token for token in generated if token not in RESERVED_TOKENS]
    if not words:
        return 0
    vocabulary = set(groundtruth).difference(RESERVED_TOKENS)
    matches = sum(1 for token in words if token in vocabulary)
    return 1 if 2 * matches > len(words) else 0


def vlcmu_loss(alphas: Sequence[Tensor] | Tensor, labels: Sequence[int]) -> Tensor:
    """Summed binary cross-entropy of correctness scores against pseudo-labels."""
    return bce_sum(alphas, labels)


class FallbackFeaturizer(Module):
    """Stand-in for the matching unit.

    Concatenates mean-pooled frames with mean-pooled word embeddings.
    """

    def __init__(
        self, frame_dim: int, vocab_size: int, embedding_dim: int, rng: SplitMix64
    ) -> None:
        self.frame_dim = frame_dim
        self.embedding = Embedding(vocab_size, embedding_dim, rng)

    @property
    def feature_dim(self) -> int:
        return self.frame_dim + self.embedding.dim

    def fuse(self, features: Any, sentence: Sequence[int]) -> tuple[Tensor, bool]:
        frames = as_tensor(features)
        if frames.ndim != 2 or frames.shape[1] != self.frame_dim:
            raise_dimension_error(
                "fallback features", frames.shape, (-1, self.frame_dim)
            )
        empty = len(sentence) == 0
        indices = list(sentence) if not empty else [UNK]
        words = ops.mean_rows(self.embedding(indices))
        return ops.concat([ops.mean_rows(frames), words]), empty
