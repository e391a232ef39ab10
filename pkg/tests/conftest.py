"""Shared fixtures: tiny network sizes and a seeded synthetic corpus."""

import json
from pathlib import Path
from typing import Any

import pytest

from src.core.metrics import get_metrics_collector
from src.corpus.models import Video
from src.corpus.synthetic import SyntheticSpec, generate_synthetic
from src.diffcore.rng import SplitMix64
from src.models.captioner import CaptionerConfig
from src.models.purport import PurportConfig
from src.models.vlcmu import VLCMUConfig
from src.pipeline.config import InferenceConfig, TrainConfig

TINY_SPEC: dict[str, Any] = {
    "seed": 7,
    "videos": 4,
    "shots_per_video": 12,
    "event_types": 3,
    "feature_dim": 4,
    "frames_per_shot": 3,
    "mean_event_duration": 3.0,
    "noise_scale": 0.1,
    "references": 2,
}

TINY_RUN_CONFIG: dict[str, Any] = {
    "captioner": {"encoder_hidden": 4, "embedding_dim": 4, "max_decode_length": 8},
    "vlcmu": {"embedding_dim": 4, "visual_hidden": 4, "language_hidden": 4},
    "purport": {"hidden": 4},
    "train": {"pretrain_epochs": 2, "joint_epochs": 2, "batch_size": 8},
    "inference": {"passes": 2},
}


@pytest.fixture(autouse=True)
def fresh_metrics() -> None:
    """Every test starts from an empty metrics registry."""
    get_metrics_collector().reset()


@pytest.fixture
def rng() -> SplitMix64:
    return SplitMix64(1234)


@pytest.fixture
def tiny_spec() -> SyntheticSpec:
    return SyntheticSpec.model_validate(TINY_SPEC)


@pytest.fixture
def tiny_corpus(tiny_spec: SyntheticSpec) -> list[Video]:
    return generate_synthetic(tiny_spec)


@pytest.fixture
def captioner_config() -> CaptionerConfig:
    return CaptionerConfig(
        frame_dim=4,
        frames=3,
        encoder_hidden=4,
        embedding_dim=4,
        vocab_size=12,
        max_decode_length=8,
    )


@pytest.fixture
def vlcmu_config() -> VLCMUConfig:
    return VLCMUConfig(
        frame_dim=4, vocab_size=12, embedding_dim=4, visual_hidden=4, language_hidden=4
    )


@pytest.fixture
def purport_config() -> PurportConfig:
    return PurportConfig(input_dim=16, hidden=4)


@pytest.fixture
def train_config() -> TrainConfig:
    return TrainConfig(seed=3, pretrain_epochs=2, joint_epochs=2, batch_size=8)


@pytest.fixture
def inference_config() -> InferenceConfig:
    return InferenceConfig(passes=2)


@pytest.fixture
def spec_file(tmp_path: Path) -> Path:
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(TINY_SPEC))
    return path


@pytest.fixture
def config_file(tmp_path: Path) -> Path:
    path = tmp_path / "config.json"
    path.write_text(json.dumps(TINY_RUN_CONFIG))
    return path
