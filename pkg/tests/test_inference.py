"""Tests for impact scores, peak selection, synopsis assembly and diagnostics."""

import math

import numpy as np
import pytest

from src.core.exceptions import ContractError
from src.corpus.models import Video
from src.corpus.text import Caption
from src.diffcore.rng import SplitMix64
from src.pipeline.analysis import (
    event_spans,
    important_event_recall,
    important_events,
    random_subset_recall,
    roc_auc,
)
from src.pipeline.inference import (
    at_granularity,
    build_synopsis,
    collapse_repeats,
    find_peaks,
    halving_bound,
    impact,
    inference_passes,
    iterate_inference,
    retrieve_visual,
)
from src.pipeline.model import Synopsis, SynopsisEntry


def captions(*texts: str) -> list[Caption]:
    return [Caption.from_text(text) for text in texts]


class TestImpact:
    def test_product(self) -> None:
        assert impact([0.5, 0.8], [0.4, 0.5]) == pytest.approx([0.2, 0.4])

    def test_near_one_beta_keeps_alpha(self) -> None:
        alpha = [0.1, 0.7, 0.35]
        assert impact(alpha, [1 - 1e-12] * 3) == pytest.approx(alpha)

    def test_small_alpha_vetoes(self) -> None:
        assert impact([1e-9, 0.5], [0.99, 0.5])[0] < 1e-8

    def test_length_mismatch(self) -> None:
        with pytest.raises(ContractError):
            impact([0.1], [0.1, 0.2])

    def test_never_exceeds_either_factor(self) -> None:
        rng = SplitMix64(8)
        alpha, beta = rng.uniform(100), rng.uniform(100)
        gamma = np.asarray(impact(alpha.tolist(), beta.tolist()))
        assert np.all(gamma <= alpha)
        assert np.all(gamma <= beta)
        assert np.array_equal(gamma, alpha * beta)


class TestFindPeaks:
    @pytest.mark.parametrize(
        ("series", "peaks"),
        [
            ([1, 3, 2, 5, 4], [1, 3]),
            ([1, 2, 3], [2]),
            ([7, 7, 7], [0]),
            ([4], [0]),
            ([], []),
            ([3, 1, 1, 3], [0, 3]),
            ([1, 5, 5, 1], [1]),
        ],
    )
    def test_examples(self, series: list[float], peaks: list[int]) -> None:
        assert find_peaks(series) == peaks

    def test_alternating_keeps_high_positions(self) -> None:
        assert find_peaks([1, 0, 1, 0, 1, 0, 1, 0]) == [0, 2, 4, 6]

    def test_two_passes(self) -> None:
        series = [1, 3, 2, 5, 4, 6, 0]
        assert inference_passes(series, 2) == [[1, 3, 5], [5]]
        assert iterate_inference(series, 2) == [5]

    def test_passes_must_be_positive(self) -> None:
        with pytest.raises(ContractError):
            inference_passes([1.0], 0)

    def test_random_series_properties(self) -> None:
        rng = SplitMix64(77)
        for trial in range(1000):
            n = 1 + rng.integer(500)
            # Half the series are coarse integers so plateaus occur
            series = rng.uniform(n) if trial % 2 else rng.integers(4, n).astype(float)
            previous = list(range(n))
            for survivors in inference_passes(series.tolist(), 4):
                assert survivors
                assert set(survivors) <= set(previous)
                assert all(a < b for a, b in zip(survivors, survivors[1:]))
                assert len(survivors) <= math.ceil(len(previous) / 2)
                where = {shot: i for i, shot in enumerate(previous)}
                positions = [where[s] for s in survivors]
                assert all(b - a > 1 for a, b in zip(positions, positions[1:]))
                previous = survivors

    def test_halving_bound_for_long_video(self) -> None:
        assert halving_bound(3000, 4) == 188
        series = SplitMix64(5).uniform(3000).tolist()
        assert len(iterate_inference(series, 4)) <= 188

    def test_worst_case_reaches_the_bound(self) -> None:
        series = [float(i % 2 == 0) for i in range(8)]
        assert len(iterate_inference(series, 1)) == halving_bound(8, 1)


class TestSynopsis:
    """Sentence collection, deduplication and granularity."""

    def test_repeats_collapse_to_the_earliest_shot(self) -> None:
        texts = captions("a b", "a b", "c d", "c d", "a b")
        assert collapse_repeats([0, 1, 2, 3, 4], texts) == [
            (0, texts[0]),
            (2, texts[2]),
            (4, texts[4]),
        ]

    def test_identical_captions_give_one_entry(self) -> None:
        texts = captions(*["i drive the car"] * 9)
        gamma = [0.1, 0.9, 0.2, 0.8, 0.1, 0.7, 0.3, 0.6, 0.5]
        synopsis = build_synopsis("v", texts, gamma, 1)
        assert len(synopsis) == 1
        assert synopsis.shots == [1]

    def test_synopsis_records_granularities(self) -> None:
        texts = captions("a", "b", "c", "d", "e", "f", "g")
        synopsis = build_synopsis("v", texts, [1, 3, 2, 5, 4, 6, 0], 2)
        assert synopsis.granularities == ((1, 3, 5), (5,))
        assert synopsis.shots == [5]
        assert synopsis.text() == "f\n"
        assert synopsis.to_json() == {
            "video": "v",
            "entries": [{"shot": 5, "sentence": "f"}],
            "passes": 2,
        }
        detailed = at_granularity(synopsis, texts, 1)
        assert detailed.shots == [1, 3, 5]
        assert detailed.tokens() == ["b", "d", "f"]

    def test_granularity_range(self) -> None:
        texts = captions("a", "b")
        synopsis = build_synopsis("v", texts, [0.1, 0.2], 1)
        with pytest.raises(ContractError):
            at_granularity(synopsis, texts, 2)

    def test_shots_must_increase(self) -> None:
        entries = (
            SynopsisEntry(3, Caption(("a",)), 1),
            SynopsisEntry(1, Caption(("b",)), 1),
        )
        with pytest.raises(ContractError):
            Synopsis("v", entries, 1)

    def test_retrieve_visual(self, tiny_corpus: list[Video]) -> None:
        video = tiny_corpus[0]
        entries = tuple(SynopsisEntry(p, Caption(("x",)), 1) for p in (1, 4, 10))
        synopsis = Synopsis(video.id, entries, 1)
        assert retrieve_visual(synopsis, video) == [1, 4, 10]
        outside = Synopsis(video.id, (SynopsisEntry(99, Caption(("x",)), 1),), 1)
        with pytest.raises(ContractError):
            retrieve_visual(outside, video)


class TestAnalysis:
    def test_event_spans_cover_the_video(self, tiny_corpus: list[Video]) -> None:
        for video in tiny_corpus:
            spans = event_spans(video)
            assert spans[0][0] == 0
            assert spans[-1][1] == len(video)
            assert all(a[1] == b[0] for a, b in zip(spans, spans[1:]))

    def test_recall_of_every_shot_is_one(self, tiny_corpus: list[Video]) -> None:
        for video in tiny_corpus:
            assert important_events(video)
            assert important_event_recall(video, range(len(video))) == 1.0
            assert important_event_recall(video, []) == 0.0

    def test_random_recall_is_a_fraction(self, tiny_corpus: list[Video]) -> None:
        video = tiny_corpus[0]
        recall = random_subset_recall(video, 3, 200, SplitMix64(1))
        assert 0.0 <= recall <= 1.0
        assert random_subset_recall(video, len(video), 5, SplitMix64(1)) == 1.0
        with pytest.raises(ContractError):
            random_subset_recall(video, 0, 5, SplitMix64(1))

    @pytest.mark.parametrize(
        ("scores", "labels", "auc"),
        [
            ([0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0], 1.0),
            ([0.1, 0.2, 0.8, 0.9], [1, 1, 0, 0], 0.0),
            ([0.5, 0.5], [1, 0], 0.5),
            ([0.9, 0.3, 0.5, 0.1], [1, 0, 1, 0], 1.0),
            ([0.9, 0.6, 0.5, 0.1], [1, 0, 1, 0], 0.75),
        ],
    )
    def test_roc_auc(self, scores: list[float], labels: list[int], auc: float) -> None:
        assert roc_auc(scores, labels) == pytest.approx(auc)

    def test_roc_auc_needs_both_classes(self) -> None:
        with pytest.raises(ContractError):
            roc_auc([0.1, 0.2], [1, 1])
