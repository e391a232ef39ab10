"""Pytest configuration for the desk-scale acceptance runs.

The corpus uses the synthetic defaults; network sizes are reduced so a full
pretrain plus joint run stays within minutes on one core.
"""

import pytest

from src.corpus.models import Video
from src.corpus.split import train_test_split
from src.corpus.synthetic import SyntheticSpec, generate_synthetic
from src.models.captioner import CaptionerConfig
from src.models.purport import PurportConfig
from src.models.vlcmu import VLCMUConfig
from src.pipeline.config import TrainConfig
from src.pipeline.runner import TrainedRun, train_model

CORPUS_SEED = 2024

ACCEPTANCE_CAPTIONER = CaptionerConfig(encoder_hidden=16, embedding_dim=16)
ACCEPTANCE_VLCMU = VLCMUConfig(embedding_dim=16, visual_hidden=16, language_hidden=16)
ACCEPTANCE_PURPORT = PurportConfig(hidden=16)


def acceptance_train_config(seed: int = 0, **switches: bool) -> TrainConfig:
    return TrainConfig(
        seed=seed,
        pretrain_epochs=15,
        joint_epochs=10,
        learning_rate=1e-2,
        **switches,
    )


@pytest.fixture(scope="session")
def default_corpus() -> list[Video]:
    """25 videos of 60 shots over 8 event types."""
    return generate_synthetic(SyntheticSpec(seed=CORPUS_SEED))


@pytest.fixture(scope="session")
def default_split(default_corpus: list[Video]) -> tuple[list[Video], list[Video]]:
    return train_test_split(default_corpus, 0.2)


@pytest.fixture(scope="session")
def trained_run(default_split: tuple[list[Video], list[Video]]) -> TrainedRun:
    train, held_out = default_split
    return train_model(
        train,
        held_out,
        ACCEPTANCE_CAPTIONER,
        ACCEPTANCE_VLCMU,
        ACCEPTANCE_PURPORT,
        acceptance_train_config(),
    )
