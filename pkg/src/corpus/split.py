"""Deterministic video splits."""

from collections.abc import Iterator, Sequence

from ..core.exceptions import ContractError
from .models import Video

DEFAULT_TEST_FRACTION = 0.2


def train_test_split(
    videos: Sequence[Video], test_fraction: float = DEFAULT_TEST_FRACTION
) -> tuple[list[Video], list[Video]]:
    """Split by sorted video id: the last ``round(N * fraction)`` videos are held out.

    At least one video stays on each side when there are two or more videos.
    """
    if not 0.0 <= test_fraction < 1.0:
        raise ContractError(f"test_fraction must be in [0, 1), got {test_fraction}")
    ordered = sorted(videos, key=lambda video: video.id)
    held_out = round(len(ordered) * test_fraction)
    if len(ordered) >= 2:
        held_out = min(max(held_out, 1 if test_fraction > 0 else 0), len(ordered) - 1)
    else:
        held_out = 0
    cut = len(ordered) - held_out
    return ordered[:cut], ordered[cut:]


def leave_one_out(videos: Sequence[Video]) -> Iterator[tuple[list[Video], Video]]:
    """One round per video, in id order: (all other videos, the held-out one)."""
    ordered = sorted(videos, key=lambda video: video.id)
    if len(ordered) < 2:
        raise ContractError("leave-one-out needs at least two videos")
    for i, held_out in enumerate(ordered):
        yield ordered[:i] + ordered[i + 1 :], held_out
