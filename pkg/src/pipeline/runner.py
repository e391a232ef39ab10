"""End-to-end training, batch inference and leave-one-video-out evaluation."""

from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from ..core.logging import get_logger, set_phase, set_video_id
from ..corpus.models import Video, caption_pool
from ..corpus.split import leave_one_out, train_test_split
from ..corpus.text import build_vocab
from ..diffcore.rng import SplitMix64
from ..evaluation.report import (
    EvalReport,
    ReportMetadata,
    VideoScore,
    build_report,
    score_synopsis,
)
from ..models.captioner import CaptionerConfig
from ..models.purport import PurportConfig
from ..models.vlcmu import VLCMUConfig
from .analysis import important_event_recall, random_subset_recall
from .config import InferenceConfig, TrainConfig
from .inference import VideoScores, assemble_synopsis
from .model import ModelSpec, Synopsis, SynopsisModel
from .training import EpochRecord, pretrain_captioner, train_joint

logger = get_logger(__name__)


@dataclass
class TrainedRun:
    model: SynopsisModel
    history: list[EpochRecord]
    pretrain_best_epoch: int


def resolve_spec(
    videos: Sequence[Video],
    vocab_size: int,
    captioner: CaptionerConfig,
    vlcmu: VLCMUConfig,
    purport: PurportConfig,
    train: TrainConfig,
) -> ModelSpec:
    """Fill the corpus-dependent sizes into the component configs."""
    shot = videos[0].shots[0]
    sizes = {"frame_dim": shot.feature_dim, "vocab_size": vocab_size}
    return ModelSpec(
        captioner=captioner.model_copy(
            update={
                **sizes,
                "frames": shot.frames,
                "decoder_hidden": captioner.resolved_decoder_hidden,
            }
        ),
        vlcmu=vlcmu.model_copy(update=sizes),
        purport=purport,
        train=train,
    )


def train_model(
    train: Sequence[Video],
    validation: Sequence[Video],
    captioner: CaptionerConfig,
    vlcmu: VLCMUConfig,
    purport: PurportConfig,
    config: TrainConfig,
) -> TrainedRun:
    """Vocabulary, captioner pretraining, then joint training."""
    vocab = build_vocab(caption_pool(train), config.min_count)
    spec = resolve_spec(train, len(vocab), captioner, vlcmu, purport, config)
    logger.info(
        "Training started",
        train_videos=len(train),
        validation_videos=len(validation),
        vocab_size=len(vocab),
        ablation=config.ablation,
    )
    pretrained = pretrain_captioner(train, validation, vocab, spec.captioner, config)
    joint = train_joint(train, pretrained.captioner, vocab, spec)
    history = pretrained.history + joint.history
    return TrainedRun(joint.model, history, pretrained.best_epoch)


@dataclass(frozen=True)
class VideoResult:
    synopsis: Synopsis
    scores: VideoScores


def infer_videos(
    model: SynopsisModel, videos: Sequence[Video], config: InferenceConfig
) -> dict[str, VideoResult]:
    """Per-video synopses, merged by video id whatever the worker count."""

    def run(video: Video) -> tuple[str, VideoResult]:
        set_phase("infer")
        set_video_id(video.id)
        synopsis, scores = assemble_synopsis(video, model, config.passes)
        set_video_id(None)
        return video.id, VideoResult(synopsis, scores)

    if config.workers > 1 and len(videos) > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(run, videos))
    else:
        results = [run(video) for video in videos]
    return dict(sorted(results, key=lambda item: item[0]))


def score_results(
    results: dict[str, VideoResult], videos: Sequence[Video]
) -> dict[str, VideoScore]:
    by_id = {video.id: video for video in videos}
    return {
        video_id: score_synopsis(result.synopsis.tokens(), by_id[video_id].references)
        for video_id, result in results.items()
        if by_id[video_id].references
    }


@dataclass(frozen=True)
class RecallComparison:
    """Important-event recall of a synopsis against equal-size random subsets."""

    video: str
    synopsis_recall: float
    random_recall: float


def compare_with_random(
    results: dict[str, VideoResult],
    videos: Sequence[Video],
    samples: int,
    seed: int,
) -> list[RecallComparison]:
    rng = SplitMix64(seed)
    by_id = {video.id: video for video in videos}
    comparisons = []
    for video_id, result in results.items():
        video = by_id[video_id]
        shots = result.synopsis.shots
        comparisons.append(
            RecallComparison(
                video_id,
                important_event_recall(video, shots),
                random_subset_recall(video, len(shots), samples, rng.fork()),
            )
        )
    return comparisons


def cross_validate(
    videos: Sequence[Video],
    captioner: CaptionerConfig,
    vlcmu: VLCMUConfig,
    purport: PurportConfig,
    config: TrainConfig,
    inference: InferenceConfig,
    metadata: ReportMetadata | None = None,
) -> EvalReport:
    """Leave one video out: train on the rest, score the held-out synopsis."""
    per_video: dict[str, VideoScore] = {}
    for round_number, (rest, held_out) in enumerate(leave_one_out(videos), start=1):
        logger.info("Cross-validation round", round=round_number, held_out=held_out.id)
        train, validation = train_test_split(rest, config.test_fraction)
        run = train_model(train, validation, captioner, vlcmu, purport, config)
        results = infer_videos(run.model, [held_out], inference)
        per_video.update(score_results(results, [held_out]))
    return build_report(per_video, metadata)
