"""Video-level significance scoring over the sequence of visual-language features."""

from collections.abc import Sequence

from pydantic import BaseModel, ConfigDict, Field

from ..core.error_utils import raise_dimension_error
from ..core.exceptions import DomainError
from ..diffcore import ops
from ..diffcore.losses import bce_sum
from ..diffcore.nn import BiLSTM, Linear, Module
from ..diffcore.rng import SplitMix64
from ..diffcore.tensor import Tensor


class PurportConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    input_dim: int = Field(128, gt=0)
    hidden: int = Field(32, gt=0)


class PurportNetwork(Module):
    """Bidirectional recurrence over shots with a shared per-step sigmoid head."""

    def __init__(self, config: PurportConfig, rng: SplitMix64) -> None:
        self.config = config
        self.recurrence = BiLSTM(config.input_dim, config.hidden, rng)
        self.head = Linear(2 * config.hidden, 1, rng)

    def score_video(self, vl_features: Sequence[Tensor]) -> Tensor:
        """One significance score per shot, as a length-N vector."""
        if not vl_features:
            raise DomainError(
                "cannot score a video without shots", error_code="EMPTY_VIDEO"
            )
        sequence = ops.stack(list(vl_features))
        if sequence.shape[1] != self.config.input_dim:
            raise_dimension_error(
                "purport input",
                sequence.shape,
                (sequence.shape[0], self.config.input_dim),
            )
        steps = self.recurrence(sequence).outputs
        return ops.reshape(ops.sigmoid(self.head(steps)), (len(vl_features),))


def purport_loss(betas: Tensor | Sequence[Tensor], phi: Sequence[int]) -> Tensor:
    """Summed binary cross-entropy of significance scores against importance flags."""
    return bce_sum(betas, phi)
