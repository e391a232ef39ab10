"""In-memory corpus objects and their JSON-lines record formats."""

from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field

from ..core.error_utils import raise_dimension_error
from ..core.exceptions import ContractError
from .text import Caption, tokenize


@dataclass(frozen=True, slots=True)
class Shot:
    """One fixed-length segment: k frame features, its caption and importance."""

    index: int
    features: npt.NDArray[np.float64]
    groundtruth: Caption
    important: int
    distractor: Caption | None = None

    def __post_init__(self) -> None:
        if self.features.ndim != 2:
            raise_dimension_error("shot features", self.features.shape)
        if len(self.groundtruth) == 0:
            raise ContractError(f"shot {self.index} has an empty groundtruth caption")
        if self.important not in (0, 1):
            raise ContractError(f"importance flag must be 0 or 1, got {self.important}")
        self.features.flags.writeable = False

    @property
    def frames(self) -> int:
        return int(self.features.shape[0])

    @property
    def feature_dim(self) -> int:
        return int(self.features.shape[1])


@dataclass(frozen=True, slots=True)
class Video:
    """An ordered list of shots with its reference summaries."""

    id: str
    shots: tuple[Shot, ...]
    reference_texts: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if not self.shots:
            raise ContractError(f"video {self.id!r} has no shots")
        for position, shot in enumerate(self.shots):
            if shot.index != position:
                raise ContractError(
                    f"video {self.id!r}: shot indices must be contiguous from 0",
                    context={"position": position, "index": shot.index},
                )
        shapes = {shot.features.shape for shot in self.shots}
        if len(shapes) != 1:
            raise_dimension_error(f"video {self.id} features", *sorted(shapes))

    def __len__(self) -> int:
        return len(self.shots)

    @property
    def references(self) -> list[list[str]]:
        return [tokenize(text) for text in self.reference_texts]

    @property
    def importance(self) -> list[int]:
        return [shot.important for shot in self.shots]

    def features(self) -> npt.NDArray[np.float64]:
        """All shot features stacked as N x k x d."""
        return np.stack([shot.features for shot in self.shots])


def caption_pool(videos: Sequence[Video]) -> list[tuple[str, ...]]:
    """Groundtruth token sequences of every shot, in corpus order."""
    return [shot.groundtruth.tokens for video in videos for shot in video.shots]


class AnnotationRecord(BaseModel):
    """One line of annotations.jsonl."""

    model_config = ConfigDict(extra="forbid")

    video: str = Field(..., min_length=1)
    shot: int = Field(..., ge=0)
    caption: str = Field(..., min_length=1)
    important: Literal[0, 1]
    distractor: str | None = None


class ReferenceRecord(BaseModel):
    """One line of references.jsonl."""

    model_config = ConfigDict(extra="forbid")

    video: str = Field(..., min_length=1)
    ref: int = Field(..., ge=0)
    text: str


class CaptionRecord(BaseModel):
    """One decoded caption, as written next to a synopsis."""

    model_config = ConfigDict(extra="forbid")

    video: str
    shot: int = Field(..., ge=0)
    caption: str
