"""Trained model bundle repository.

Layout::

    <root>/model.json       architecture and training switches
    <root>/vocab.json
    <root>/captioner.tsgw   pretrained captioner
    <root>/joint.tsgw       matcher and significance network
"""

import builtins
from pathlib import Path
from typing import Any

from pydantic import ValidationError as PydanticValidationError

from ..core.error_utils import raise_not_found
from ..core.exceptions import FormatError
from ..core.logging import get_logger
from ..corpus.text import Vocabulary
from ..diffcore.checkpoint import load_checkpoint, save_checkpoint
from ..diffcore.rng import SplitMix64
from ..models.captioner import Captioner
from ..pipeline.model import ModelSpec, SynopsisModel
from .base import BaseRepository

logger = get_logger(__name__)

SPEC_FILE = "model.json"
VOCAB_FILE = "vocab.json"
CAPTIONER_FILE = "captioner.tsgw"
JOINT_FILE = "joint.tsgw"


class ModelRepository(BaseRepository[SynopsisModel]):
    """Repository for one trained model directory."""

    @property
    def captioner_path(self) -> Path:
        return self.root / CAPTIONER_FILE

    @property
    def joint_path(self) -> Path:
        return self.root / JOINT_FILE

    def save_captioner(self, captioner: Captioner) -> Path:
        self.root.mkdir(parents=True, exist_ok=True)
        save_checkpoint(self.captioner_path, captioner.state_dict())
        return self.captioner_path

    def save(self, entity: SynopsisModel, **kwargs: Any) -> Path:
        self.root.mkdir(parents=True, exist_ok=True)
        (self.root / SPEC_FILE).write_text(entity.spec.model_dump_json(indent=2) + "\n")
        entity.vocab.save(self.root / VOCAB_FILE)
        self.save_captioner(entity.captioner)
        save_checkpoint(self.joint_path, entity.joint_state())
        logger.info(
            "Model saved", root=str(self.root), ablation=entity.spec.train.ablation
        )
        return self.root

    def get(self, id: Any = None) -> SynopsisModel:
        """Rebuild the bundle; ``id`` is unused, one directory holds one model."""
        spec_path = self.root / SPEC_FILE
        vocab_path = self.root / VOCAB_FILE
        for path in (spec_path, vocab_path, self.captioner_path, self.joint_path):
            if not path.exists():
                raise_not_found("model file", path.name, {"model": str(self.root)})
        try:
            spec = ModelSpec.model_validate_json(spec_path.read_text())
        except PydanticValidationError as e:
            raise FormatError(
                f"unreadable model description: {e.errors()[0].get('msg')}",
                context={"path": str(spec_path)},
            ) from e
        vocab = Vocabulary.load(vocab_path)

        # Weights are overwritten from the checkpoints; the seed only shapes the build
        rng = SplitMix64(0)
        captioner = Captioner(spec.captioner, rng.fork())
        captioner.load_state_dict(load_checkpoint(self.captioner_path))
        captioner.freeze()
        model = SynopsisModel.build(vocab, captioner, spec, rng)
        model.load_joint_state(load_checkpoint(self.joint_path))
        return model

    def list(self) -> builtins.list[str]:
        return [self.root.name] if (self.root / SPEC_FILE).exists() else []
