"""Impact scoring, iterative peak selection and synopsis assembly."""

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from ..core.exceptions import ContractError
from ..core.logging import get_logger
from ..core.metrics import get_metrics_collector
from ..corpus.models import Video
from ..corpus.text import Caption
from ..diffcore.tensor import no_grad
from ..models.vlcmu import VLCMU
from .model import ScoreSeries, Synopsis, SynopsisEntry, SynopsisModel

logger = get_logger(__name__)
metrics = get_metrics_collector()


def impact(alpha: Sequence[float], beta: Sequence[float]) -> list[float]:
    """gamma_p = alpha_p * beta_p."""
    if len(alpha) != len(beta):
        raise ContractError(
            f"alpha and beta differ in length ({len(alpha)} vs {len(beta)})",
            error_code="LENGTH_MISMATCH",
        )
    return [float(a) * float(b) for a, b in zip(alpha, beta)]


def find_peaks(series: Sequence[float]) -> list[int]:
    """Strict local maxima; endpoints compare with their one neighbour.

    Plateaus never peak. When nothing qualifies the first argmax is returned.
    """
    n = len(series)
    if n == 0:
        return []
    if n == 1:
        return [0]
    peaks = []
    for p in range(n):
        left = p == 0 or series[p] > series[p - 1]
        right = p == n - 1 or series[p] > series[p + 1]
        if left and right:
            peaks.append(p)
    if not peaks:
        peaks = [int(np.argmax(np.asarray(series)))]
    return peaks


def inference_passes(gamma: Sequence[float], passes: int) -> list[list[int]]:
    """Original indices surviving each pass; pass t peaks over pass t - 1 survivors."""
    if passes < 1:
        raise ContractError(f"passes must be >= 1, got {passes}")
    survivors = list(range(len(gamma)))
    rounds = []
    for _ in range(passes):
        kept = find_peaks([gamma[i] for i in survivors])
        survivors = [survivors[i] for i in kept]
        rounds.append(survivors)
    return rounds


def iterate_inference(gamma: Sequence[float], passes: int) -> list[int]:
    return inference_passes(gamma, passes)[-1]


def halving_bound(n: int, passes: int) -> int:
    """Upper bound on survivors: ceil(n / 2) applied ``passes`` times."""
    for _ in range(passes):
        n = max(1, math.ceil(n / 2))
    return n


@dataclass(frozen=True)
class VideoScores:
    """Everything inference computes for one video."""

    captions: tuple[Caption, ...]
    series: ScoreSeries
    empty_sentences: int


def score_video(model: SynopsisModel, video: Video) -> VideoScores:
    """Decode every shot, then score it for correctness and significance."""
    train = model.train_config
    captions = []
    alphas = []
    features = []
    empty = 0
    with no_grad():
        for shot in video.shots:
            ids = model.captioner.decode_greedy(shot.features)
            captions.append(Caption(tuple(model.vocab.decode(ids))))
            feature, was_empty = model.matcher.fuse(shot.features, ids)
            empty += int(was_empty)
            features.append(feature)
            if train.uses_alpha:
                matcher = model.matcher
                assert isinstance(matcher, VLCMU)
                alphas.append(matcher.score(feature).item())
            else:
                alphas.append(1.0)
        if model.purport is not None:
            beta = model.purport.score_video(features).data.copy()
        else:
            beta = np.ones(len(video))
    alpha = np.asarray(alphas)
    gamma = np.asarray(impact(alpha.tolist(), beta.tolist()))
    metrics.record_decoded(len(video))
    return VideoScores(tuple(captions), ScoreSeries(alpha, beta, gamma), empty)


def collapse_repeats(
    shots: Sequence[int], captions: Sequence[Caption]
) -> list[tuple[int, Caption]]:
    """Drop an entry whose sentence equals the one kept just before it."""
    kept: list[tuple[int, Caption]] = []
    for shot in shots:
        sentence = captions[shot]
        if kept and kept[-1][1] == sentence:
            continue
        kept.append((shot, sentence))
    return kept


def build_synopsis(
    video_id: str, captions: Sequence[Caption], gamma: Sequence[float], passes: int
) -> Synopsis:
    rounds = inference_passes(gamma, passes)
    entries = tuple(
        SynopsisEntry(shot, sentence, passes)
        for shot, sentence in collapse_repeats(rounds[-1], captions)
    )
    return Synopsis(
        video=video_id,
        entries=entries,
        passes=passes,
        granularities=tuple(tuple(r) for r in rounds),
    )


def assemble_synopsis(
    video: Video, model: SynopsisModel, passes: int
) -> tuple[Synopsis, VideoScores]:
    scores = score_video(model, video)
    synopsis = build_synopsis(video.id, scores.captions, scores.series.gamma, passes)
    logger.info(
        "Synopsis assembled",
        video=video.id,
        shots=len(video),
        survivors=[len(r) for r in synopsis.granularities],
        entries=len(synopsis),
        empty_sentences=scores.empty_sentences,
    )
    metrics.record_synopsis(video.id, len(synopsis))
    return synopsis, scores


def at_granularity(
    synopsis: Synopsis, captions: Sequence[Caption], level: int
) -> Synopsis:
    """The synopsis after ``level`` passes (1 is the most detailed)."""
    if not 1 <= level <= synopsis.passes:
        raise ContractError(
            f"granularity must be in [1, {synopsis.passes}], got {level}"
        )
    survivors = synopsis.granularities[level - 1]
    entries = tuple(
        SynopsisEntry(shot, sentence, level)
        for shot, sentence in collapse_repeats(survivors, captions)
    )
    return Synopsis(synopsis.video, entries, level, synopsis.granularities[:level])


def retrieve_visual(synopsis: Synopsis, video: Video) -> list[int]:
    """Shot indices backing the synopsis, in temporal order."""
    for shot in synopsis.shots:
        if not 0 <= shot < len(video):
            raise ContractError(
                f"synopsis shot {shot} outside video {video.id!r} of {len(video)} shots"
            )
    return synopsis.shots
