"""Training and inference settings."""

from pydantic import BaseModel, ConfigDict, Field


class TrainConfig(BaseModel):
    """Optimisation settings for both phases, plus the ablation switches."""

    model_config = ConfigDict(extra="forbid")

    seed: int = Field(0, ge=0, lt=2**64)
    lambda1: float = Field(1.0, ge=0.0)
    lambda2: float = Field(1.0, ge=0.0)
    pretrain_epochs: int = Field(25, ge=0)
    joint_epochs: int = Field(15, ge=0)
    learning_rate: float = Field(5e-3, gt=0.0)
    joint_learning_rate: float = Field(3e-3, gt=0.0)
    batch_size: int = Field(8, ge=1)
    clip_norm: float = Field(5.0, gt=0.0)
    min_count: int = Field(1, ge=1)
    test_fraction: float = Field(0.2, ge=0.0, lt=1.0)
    use_distractors: bool = True
    disable_vlcmu: bool = False
    disable_eta_loss: bool = False
    disable_purport: bool = False

    @property
    def trains_eta(self) -> bool:
        """Whether the correctness loss contributes to the joint objective."""
        return not self.disable_vlcmu and not self.disable_eta_loss and self.lambda1 > 0

    @property
    def trains_phi(self) -> bool:
        return not self.disable_purport and self.lambda2 > 0

    @property
    def uses_alpha(self) -> bool:
        """Whether inference multiplies by the correctness score."""
        return not self.disable_vlcmu and not self.disable_eta_loss

    @property
    def ablation(self) -> str:
        names = [
            name
            for name, flag in (
                ("-vlcmu", self.disable_vlcmu),
                ("-eta", self.disable_eta_loss),
                ("-purport", self.disable_purport),
            )
            if flag
        ]
        return ",".join(names) or "full"


class InferenceConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    passes: int = Field(4, ge=1)
    workers: int = Field(1, ge=1)
    baseline_samples: int = Field(1000, ge=1)
