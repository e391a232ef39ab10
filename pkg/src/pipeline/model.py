"""The trained model bundle and the per-shot score series."""

from dataclasses import dataclass, field
from typing import Any

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict

from ..core.exceptions import ContractError
from ..corpus.text import Caption, Vocabulary
from ..diffcore.nn import Module
from ..diffcore.rng import SplitMix64
from ..models.captioner import Captioner, CaptionerConfig
from ..models.purport import PurportConfig, PurportNetwork
from ..models.vlcmu import VLCMU, FallbackFeaturizer, VLCMUConfig
from .config import TrainConfig

Matcher = VLCMU | FallbackFeaturizer


class ModelSpec(BaseModel):
    """Architecture of a saved bundle; enough to rebuild every module."""

    model_config = ConfigDict(extra="forbid")

    captioner: CaptionerConfig
    vlcmu: VLCMUConfig
    purport: PurportConfig
    train: TrainConfig


@dataclass
class SynopsisModel:
    """Frozen captioner plus the jointly trained matcher and significance network."""

    vocab: Vocabulary
    captioner: Captioner
    matcher: Matcher
    purport: PurportNetwork | None
    spec: ModelSpec

    @classmethod
    def build(
        cls,
        vocab: Vocabulary,
        captioner: Captioner,
        spec: ModelSpec,
        rng: SplitMix64,
    ) -> "SynopsisModel":
        """Fresh joint modules around an existing captioner."""
        matcher: Matcher
        if spec.train.disable_vlcmu:
            matcher = FallbackFeaturizer(
                spec.vlcmu.frame_dim,
                spec.vlcmu.vocab_size,
                spec.vlcmu.embedding_dim,
                rng.fork(),
            )
        else:
            matcher = VLCMU(spec.vlcmu, rng.fork())
        purport = None
        if not spec.train.disable_purport:
            config = spec.purport.model_copy(update={"input_dim": matcher.feature_dim})
            purport = PurportNetwork(config, rng.fork())
            spec = spec.model_copy(update={"purport": config})
        model = cls(vocab, captioner, matcher, purport, spec)
        model.name_parameters()
        return model

    @property
    def train_config(self) -> TrainConfig:
        return self.spec.train

    def joint_modules(self) -> list[tuple[str, Module]]:
        modules: list[tuple[str, Module]] = [("matcher.", self.matcher)]
        if self.purport is not None:
            modules.append(("purport.", self.purport))
        return modules

    def joint_parameters(self) -> list[Any]:
        return [p for _, module in self.joint_modules() for p in module.parameters()]

    def joint_state(self) -> dict[str, npt.NDArray[np.float64]]:
        state: dict[str, npt.NDArray[np.float64]] = {}
        for prefix, module in self.joint_modules():
            state.update(module.state_dict(prefix))
        return state

    def load_joint_state(self, state: dict[str, npt.NDArray[np.float64]]) -> None:
        for prefix, module in self.joint_modules():
            module.load_state_dict(state, prefix)

    def name_parameters(self) -> None:
        self.captioner.name_parameters("captioner.")
        for prefix, module in self.joint_modules():
            module.name_parameters(prefix)


@dataclass(frozen=True)
class ScoreSeries:
    """Per-shot correctness, significance and impact, aligned to shot indices."""

    alpha: npt.NDArray[np.float64]
    beta: npt.NDArray[np.float64]
    gamma: npt.NDArray[np.float64]

    def __post_init__(self) -> None:
        if not (len(self.alpha) == len(self.beta) == len(self.gamma)):
            raise ContractError("score series must have equal lengths")

    def __len__(self) -> int:
        return len(self.gamma)


@dataclass(frozen=True)
class SynopsisEntry:
    shot: int
    sentence: Caption
    retained_pass: int


@dataclass(frozen=True)
class Synopsis:
    """Selected sentences in temporal order.

    ``granularities[t]`` lists the shots surviving pass t + 1, before deduplication.
    """

    video: str
    entries: tuple[SynopsisEntry, ...]
    passes: int
    granularities: tuple[tuple[int, ...], ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        shots = [entry.shot for entry in self.entries]
        if any(a >= b for a, b in zip(shots, shots[1:])):
            raise ContractError("synopsis shot indices must be strictly increasing")

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def shots(self) -> list[int]:
        return [entry.shot for entry in self.entries]

    @property
    def sentences(self) -> list[Caption]:
        return [entry.sentence for entry in self.entries]

    def tokens(self) -> list[str]:
        """The synopsis as one flat token sequence, sentences in order."""
        return [token for entry in self.entries for token in entry.sentence.tokens]

    def text(self) -> str:
        """One sentence per line."""
        return "".join(f"{entry.sentence.text}\n" for entry in self.entries)

    def to_json(self) -> dict[str, Any]:
        return {
            "video": self.video,
            "entries": [
                {"shot": entry.shot, "sentence": entry.sentence.text}
                for entry in self.entries
            ],
            "passes": self.passes,
        }
