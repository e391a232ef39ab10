"""Two-phase training: caption pretraining, then the joint objective."""

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt

from ..core.exceptions import ConfigError, DomainError, TrainingError
from ..core.logging import get_logger, set_phase, set_video_id
from ..core.metrics import get_metrics_collector
from ..corpus.models import Video
from ..corpus.text import Vocabulary
from ..diffcore.checkpoint import decode_checkpoint, encode_checkpoint
from ..diffcore.optim import Adam, clip_grad_norm
from ..diffcore.rng import SplitMix64
from ..diffcore.tensor import Tensor, no_grad
from ..models.captioner import Captioner, CaptionerConfig
from ..models.purport import purport_loss
from ..models.vlcmu import VLCMU, pseudo_label, vlcmu_loss
from .config import TrainConfig
from .model import ModelSpec, SynopsisModel

logger = get_logger(__name__)
metrics = get_metrics_collector()

Array = npt.NDArray[np.float64]

# Offsets the joint-phase generator from the pretraining one
_JOINT_STREAM = 0x9E3779B97F4A7C15


@dataclass(frozen=True)
class EpochRecord:
    """One line of the training log."""

    phase: str
    epoch: int
    train_loss: float
    validation_loss: float | None = None
    terms: dict[str, float] = field(default_factory=dict)

    def to_json(self) -> dict[str, object]:
        record: dict[str, object] = {
            "phase": self.phase,
            "epoch": self.epoch,
            "train_loss": self.train_loss,
        }
        if self.validation_loss is not None:
            record["validation_loss"] = self.validation_loss
        record.update(self.terms)
        return record


@dataclass
class PretrainResult:
    captioner: Captioner
    history: list[EpochRecord]
    best_epoch: int


@dataclass
class JointResult:
    model: SynopsisModel
    history: list[EpochRecord]


@dataclass(frozen=True)
class _CaptionExample:
    features: Array
    target: list[int]


def _caption_examples(
    videos: Sequence[Video], vocab: Vocabulary
) -> list[_CaptionExample]:
    return [
        _CaptionExample(shot.features, vocab.encode(shot.groundtruth.tokens))
        for video in videos
        for shot in video.shots
    ]


def _checked(loss: Tensor, step: int) -> float:
    value = loss.item()
    if not math.isfinite(value):
        raise TrainingError(f"loss became non-finite at step {step}", step=step)
    return value


def _run_step(
    phase: str,
    step: int,
    loss_fn: Callable[[], float],
    optimizer: Adam,
    clip_norm: float,
) -> float:
    """Accumulate gradients through ``loss_fn``, clip, update; returns the loss."""
    with metrics.timed_step(phase) as info:
        try:
            value = loss_fn()
        except DomainError as e:
            raise TrainingError(
                f"{phase} diverged at step {step}: {e.message}", step=step
            ) from e
        info["grad_norm"] = clip_grad_norm(optimizer.params, clip_norm)
        optimizer.step()
    return value


def caption_corpus_loss(
    captioner: Captioner, examples: Sequence[_CaptionExample]
) -> float:
    with no_grad():
        return sum(
            captioner.caption_loss(ex.features, ex.target).item() for ex in examples
        )


def pretrain_captioner(
    train: Sequence[Video],
    validation: Sequence[Video],
    vocab: Vocabulary,
    captioner_config: CaptionerConfig,
    config: TrainConfig,
) -> PretrainResult:
    """Fit the captioner alone; the weights with the lowest validation loss are kept.

    Epoch 0 in the history is the untrained network.
    """
    set_phase("pretrain")
    rng = SplitMix64(config.seed)
    captioner = Captioner(captioner_config, rng.fork())
    captioner.name_parameters("captioner.")
    optimizer = Adam(captioner.parameters(), lr=config.learning_rate)
    examples = _caption_examples(train, vocab)
    held_out = _caption_examples(validation, vocab)
    order_rng = rng.fork()

    def validation_loss() -> float | None:
        return caption_corpus_loss(captioner, held_out) if held_out else None

    initial = caption_corpus_loss(captioner, examples)
    history = [EpochRecord("pretrain", 0, initial, validation_loss())]
    best_score = history[0].validation_loss if held_out else initial
    best_state = encode_checkpoint(captioner.state_dict())
    best_epoch = 0
    step = 0

    for epoch in range(1, config.pretrain_epochs + 1):
        order = order_rng.permutation(len(examples))
        epoch_loss = 0.0
        for start in range(0, len(order), config.batch_size):
            batch = [examples[int(i)] for i in order[start : start + config.batch_size]]
            step += 1

            def batch_loss() -> float:
                total = 0.0
                for ex in batch:
                    loss = captioner.caption_loss(ex.features, ex.target)
                    total += _checked(loss, step)
                    loss.backward()
                return total

            epoch_loss += _run_step(
                "pretrain", step, batch_loss, optimizer, config.clip_norm
            )

        record = EpochRecord("pretrain", epoch, epoch_loss, validation_loss())
        history.append(record)
        metrics.record_loss("pretrain", "caption", epoch_loss)
        logger.info(
            "Epoch finished",
            epoch=epoch,
            train_loss=round(epoch_loss, 6),
            validation_loss=record.validation_loss,
        )
        score = record.validation_loss if held_out else epoch_loss
        assert score is not None
        if best_score is None or score < best_score:
            best_score, best_epoch = score, epoch
            best_state = encode_checkpoint(captioner.state_dict())

    captioner.load_state_dict(decode_checkpoint(best_state))
    logger.info("Pretraining finished", best_epoch=best_epoch, best_loss=best_score)
    return PretrainResult(captioner, history, best_epoch)


@dataclass(frozen=True)
class _ShotExample:
    features: Array
    generated: list[int]
    eta: int
    distractor: list[int] | None
    distractor_eta: int


@dataclass(frozen=True)
class _VideoExample:
    id: str
    shots: list[_ShotExample]
    phi: list[int]


def _video_examples(
    videos: Sequence[Video], captioner: Captioner, vocab: Vocabulary
) -> list[_VideoExample]:
    """Decode every shot once; the frozen captioner is deterministic."""
    examples = []
    for video in videos:
        shots = []
        for shot in video.shots:
            ids = captioner.decode_greedy(shot.features)
            generated = vocab.decode(ids)
            distractor = None
            distractor_eta = 0
            if shot.distractor is not None:
                distractor = vocab.encode(shot.distractor.tokens)
                distractor_eta = pseudo_label(
                    shot.distractor.tokens, shot.groundtruth.tokens
                )
            shots.append(
                _ShotExample(
                    shot.features,
                    ids,
                    pseudo_label(generated, shot.groundtruth.tokens),
                    distractor,
                    distractor_eta,
                )
            )
        metrics.record_decoded(len(video))
        examples.append(_VideoExample(video.id, shots, list(video.importance)))
    return examples


def joint_loss(
    model: SynopsisModel, video: _VideoExample
) -> tuple[Tensor, dict[str, float]]:
    """lambda1 * L_eta + lambda2 * L_phi for one video, per the active switches."""
    config = model.train_config
    features = []
    alphas: list[Tensor] = []
    labels: list[int] = []
    for shot in video.shots:
        feature, _ = model.matcher.fuse(shot.features, shot.generated)
        features.append(feature)
        if config.trains_eta:
            assert isinstance(model.matcher, VLCMU)
            alphas.append(model.matcher.score(feature))
            labels.append(shot.eta)
            if config.use_distractors and shot.distractor is not None:
                alphas.append(model.matcher.match(shot.features, shot.distractor).alpha)
                labels.append(shot.distractor_eta)

    terms: dict[str, float] = {}
    total = Tensor(0.0)
    if config.trains_eta:
        l_eta = vlcmu_loss(alphas, labels)
        terms["l_eta"] = l_eta.item()
        total = total + config.lambda1 * l_eta
    if config.trains_phi:
        assert model.purport is not None
        l_phi = purport_loss(model.purport.score_video(features), video.phi)
        terms["l_phi"] = l_phi.item()
        total = total + config.lambda2 * l_phi
    return total, terms


def train_joint(
    train: Sequence[Video],
    captioner: Captioner,
    vocab: Vocabulary,
    spec: ModelSpec,
) -> JointResult:
    """Freeze the captioner and optimise the matcher and significance network."""
    config = spec.train
    if not (config.trains_eta or config.trains_phi):
        raise ConfigError(
            "joint objective is empty: every loss term is disabled or weighted zero",
            details=[
                {"field": "train.lambda1", "message": str(config.lambda1)},
                {"field": "train.lambda2", "message": str(config.lambda2)},
            ],
        )
    set_phase("joint")
    captioner.freeze()
    rng = SplitMix64((config.seed + _JOINT_STREAM) % 2**64)
    model = SynopsisModel.build(vocab, captioner, spec, rng.fork())
    frozen_before = encode_checkpoint(captioner.state_dict())

    examples = _video_examples(train, captioner, vocab)
    optimizer = Adam(model.joint_parameters(), lr=config.joint_learning_rate)
    order_rng = rng.fork()
    history: list[EpochRecord] = []
    step = 0

    for epoch in range(1, config.joint_epochs + 1):
        totals: dict[str, float] = {}
        epoch_loss = 0.0
        for i in order_rng.permutation(len(examples)):
            video = examples[int(i)]
            set_video_id(video.id)
            step += 1
            terms: dict[str, float] = {}

            def video_loss() -> float:
                loss, parts = joint_loss(model, video)
                terms.update(parts)
                value = _checked(loss, step)
                loss.backward()
                return value

            epoch_loss += _run_step(
                "joint", step, video_loss, optimizer, config.clip_norm
            )
            for name, value in terms.items():
                totals[name] = totals.get(name, 0.0) + value
        set_video_id(None)
        history.append(EpochRecord("joint", epoch, epoch_loss, terms=totals))
        metrics.record_loss("joint", "total", epoch_loss)
        for name, value in totals.items():
            metrics.record_loss("joint", name, value)
        logger.info(
            "Epoch finished", epoch=epoch, train_loss=round(epoch_loss, 6), **totals
        )

    if encode_checkpoint(captioner.state_dict()) != frozen_before:
        raise TrainingError(
            "captioner weights changed during joint training", step=step
        )
    logger.info("Joint training finished", ablation=config.ablation, steps=step)
    return JointResult(model, history)
