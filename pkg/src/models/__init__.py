"""Captioning, content matching and significance networks."""

from .captioner import AttentionWeights, Captioner, CaptionerConfig, EncoderStates
from .purport import PurportConfig, PurportNetwork, purport_loss
from .vlcmu import (
    VLCMU,
    FallbackFeaturizer,
    MatchResult,
    VLCMUConfig,
    pseudo_label,
    vlcmu_loss,
)

__all__ = [
    "VLCMU",
    "AttentionWeights",
    "Captioner",
    "CaptionerConfig",
    "EncoderStates",
    "FallbackFeaturizer",
    "MatchResult",
    "PurportConfig",
    "PurportNetwork",
    "VLCMUConfig",
    "pseudo_label",
    "purport_loss",
    "vlcmu_loss",
]
