"""Diagnostics over trained models: event recall, random baselines and ROC-AUC."""

from collections.abc import Sequence

import numpy as np

from ..core.exceptions import ContractError
from ..corpus.models import Video
from ..diffcore.rng import SplitMix64
from ..diffcore.tensor import no_grad
from ..models.vlcmu import VLCMU
from .model import SynopsisModel


def event_spans(video: Video) -> list[tuple[int, int]]:
    """Maximal runs of shots sharing one groundtruth caption, as [start, stop)."""
    spans = []
    start = 0
    for p in range(1, len(video) + 1):
        if (
            p == len(video)
            or video.shots[p].groundtruth != video.shots[start].groundtruth
        ):
            spans.append((start, p))
            start = p
    return spans


def important_events(video: Video) -> list[tuple[int, int]]:
    """Events whose first shot is flagged important."""
    return [span for span in event_spans(video) if video.shots[span[0]].important]


def important_event_recall(video: Video, selected: Sequence[int]) -> float:
    """Fraction of important events with at least one selected shot inside them."""
    events = important_events(video)
    if not events:
        return 0.0
    chosen = set(selected)
    covered = sum(
        1 for start, stop in events if chosen.intersection(range(start, stop))
    )
    return covered / len(events)


def random_subset_recall(
    video: Video, size: int, samples: int, rng: SplitMix64
) -> float:
    """Mean important-event recall of ``samples`` uniform random shot subsets."""
    if not 0 < size <= len(video):
        raise ContractError(f"subset size must be in [1, {len(video)}], got {size}")
    total = 0.0
    for _ in range(samples):
        subset = rng.permutation(len(video))[:size]
        total += important_event_recall(video, [int(p) for p in subset])
    return total / samples


def roc_auc(scores: Sequence[float], labels: Sequence[int]) -> float:
    """Probability a random positive outranks a random negative; ties count half."""
    if len(scores) != len(labels):
        raise ContractError(
            "scores and labels differ in length", error_code="LENGTH_MISMATCH"
        )
    values = np.asarray(scores, dtype=np.float64)
    truth = np.asarray(labels)
    positives = values[truth == 1]
    negatives = values[truth == 0]
    if positives.size == 0 or negatives.size == 0:
        raise ContractError("ROC-AUC needs at least one positive and one negative")
    greater = (positives[:, None] > negatives[None, :]).sum()
    ties = (positives[:, None] == negatives[None, :]).sum()
    return float((greater + 0.5 * ties) / (positives.size * negatives.size))


def alpha_discrimination(model: SynopsisModel, videos: Sequence[Video]) -> float:
    """ROC-AUC of correctness scores.

    Groundtruth captions are positives, injected distractors negatives.
    """
    if not isinstance(model.matcher, VLCMU):
        raise ContractError("correctness scores need the matching unit")
    scores: list[float] = []
    labels: list[int] = []
    with no_grad():
        for video in videos:
            for shot in video.shots:
                clean = model.vocab.encode(shot.groundtruth.tokens)
                scores.append(model.matcher.match(shot.features, clean).alpha.item())
                labels.append(1)
                if shot.distractor is not None:
                    wrong = model.vocab.encode(shot.distractor.tokens)
                    match = model.matcher.match(shot.features, wrong)
                    scores.append(match.alpha.item())
                    labels.append(0)
    return roc_auc(scores, labels)
