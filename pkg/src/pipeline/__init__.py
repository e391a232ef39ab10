"""Training orchestration, peak-based inference and synopsis assembly."""

from .config import InferenceConfig, TrainConfig
from .inference import (
    assemble_synopsis,
    find_peaks,
    impact,
    inference_passes,
    iterate_inference,
    retrieve_visual,
)
from .model import ModelSpec, ScoreSeries, Synopsis, SynopsisEntry, SynopsisModel
from .training import joint_loss, pretrain_captioner, train_joint

__all__ = [
    "InferenceConfig",
    "ModelSpec",
    "ScoreSeries",
    "Synopsis",
    "SynopsisEntry",
    "SynopsisModel",
    "TrainConfig",
    "assemble_synopsis",
    "find_peaks",
    "impact",
    "inference_passes",
    "iterate_inference",
    "joint_loss",
    "pretrain_captioner",
    "retrieve_visual",
    "train_joint",
]
