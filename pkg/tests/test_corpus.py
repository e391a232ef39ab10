"""Tests for tokenization, vocabularies, synthetic corpora and corpus files."""

from pathlib import Path

import numpy as np
import pytest
from pydantic import ValidationError as PydanticValidationError

from src.core.exceptions import ContractError, DomainError, FormatError, NotFoundError
from src.corpus.io import decode_features, encode_features, read_jsonl
from src.corpus.models import AnnotationRecord, Video, caption_pool
from src.corpus.split import leave_one_out, train_test_split
from src.corpus.synthetic import SyntheticSpec, generate_synthetic
from src.corpus.text import UNK, Caption, Vocabulary, build_vocab, tokenize
from src.diffcore.rng import SplitMix64
from src.pipeline.analysis import event_spans
from src.repositories.corpus import CorpusRepository


class TestTokenize:
    @pytest.mark.parametrize(
        ("text", "tokens"),
        [
            ("A man drives.", ["a", "man", "drives"]),
            ("", []),
            ("The man, the car", ["the", "man", "the", "car"]),
            ("  ...  ", []),
            ("(Don't) stop-start!", ["don't", "stop-start"]),
        ],
    )
    def test_examples(self, text: str, tokens: list[str]) -> None:
        assert tokenize(text) == tokens

    def test_caption_text(self) -> None:
        assert Caption.from_text("I drive the car.").text == "i drive the car"


class TestVocabulary:
    def test_frequency_order(self) -> None:
        vocab = build_vocab([["a", "b"], ["a"]])
        assert vocab.tokens[4:] == ("a", "b")

    def test_min_count_maps_rare_tokens_to_unk(self) -> None:
        vocab = build_vocab([["a", "b"], ["a"]], min_count=2)
        assert vocab.tokens[4:] == ("a",)
        assert vocab.encode(["b", "a"]) == [UNK, 4]

    def test_empty_corpus(self) -> None:
        with pytest.raises(DomainError):
            build_vocab([])

    def test_save_and_load(self, tmp_path: Path) -> None:
        vocab = build_vocab([["x", "y", "x"]])
        vocab.save(tmp_path / "vocab.json")
        assert Vocabulary.load(tmp_path / "vocab.json") == vocab

    def test_unreadable_file(self, tmp_path: Path) -> None:
        path = tmp_path / "vocab.json"
        path.write_text("{not json")
        with pytest.raises(FormatError):
            Vocabulary.load(path)


class TestSyntheticCorpus:
    """Seeded synthetic generation."""

    def test_sizes(self, tiny_spec: SyntheticSpec, tiny_corpus: list[Video]) -> None:
        assert [video.id for video in tiny_corpus] == ["v000", "v001", "v002", "v003"]
        for video in tiny_corpus:
            assert len(video) == tiny_spec.shots_per_video
            assert len(video.reference_texts) == tiny_spec.references
            assert sum(video.importance) >= 1
            assert video.features().shape == (12, 3, 4)

    def test_same_seed_is_identical(self, tiny_spec: SyntheticSpec) -> None:
        first, second = generate_synthetic(tiny_spec), generate_synthetic(tiny_spec)
        for a, b in zip(first, second, strict=True):
            assert a.features().tobytes() == b.features().tobytes()
            assert [s.groundtruth for s in a.shots] == [s.groundtruth for s in b.shots]
            assert a.reference_texts == b.reference_texts

    def test_zero_noise_events_share_features(self, tiny_spec: SyntheticSpec) -> None:
        spec = tiny_spec.model_copy(update={"noise_scale": 0.0})
        for video in generate_synthetic(spec):
            for start, stop in event_spans(video):
                for shot in video.shots[start + 1 : stop]:
                    first = video.shots[start].features
                    np.testing.assert_array_equal(shot.features, first)

    def test_consecutive_events_differ(self, tiny_corpus: list[Video]) -> None:
        for video in tiny_corpus:
            spans = event_spans(video)
            captions = [video.shots[start].groundtruth for start, _ in spans]
            assert all(a != b for a, b in zip(captions, captions[1:]))

    def test_first_reference_lists_important_events(
        self, tiny_corpus: list[Video]
    ) -> None:
        for video in tiny_corpus:
            important = [
                video.shots[start].groundtruth.text
                for start, _ in event_spans(video)
                if video.shots[start].important
            ]
            expected = " ".join(f"{text}." for text in important)
            assert video.reference_texts[0] == expected

    def test_distractors_come_from_other_events(self, tiny_spec: SyntheticSpec) -> None:
        spec = tiny_spec.model_copy(update={"corruption_rate": 1.0})
        for video in generate_synthetic(spec):
            for shot in video.shots:
                assert shot.distractor is not None
                assert shot.distractor != shot.groundtruth

    def test_important_shot_rate(self) -> None:
        """One flagged shot per important event: rate ~ fraction / mean duration.

        Every shot after the first opens an event with probability 1 / duration.
        """
        spec = SyntheticSpec(seed=31, videos=50, feature_dim=4, frames_per_shot=2)
        videos = generate_synthetic(spec)
        flags = [flag for video in videos for flag in video.importance]
        assert set(flags) <= {0, 1}
        n = spec.shots_per_video
        events = 1 + (n - 1) / spec.mean_event_duration
        expected = spec.important_fraction * events / n
        tolerance = 4 * np.sqrt(expected * (1 - expected) / len(flags))
        assert abs(np.mean(flags) - expected) < tolerance

    def test_missing_seed_is_rejected(self) -> None:
        with pytest.raises(PydanticValidationError) as exc_info:
            SyntheticSpec.model_validate({"videos": 2})
        assert exc_info.value.errors()[0]["loc"] == ("seed",)

    @pytest.mark.parametrize(
        "bad", [{"event_types": 1}, {"corruption_rate": 1.5}, {"templates": {"a": []}}]
    )
    def test_invalid_spec(self, bad: dict[str, object]) -> None:
        with pytest.raises(PydanticValidationError):
            SyntheticSpec.model_validate({"seed": 1, **bad})


class TestFeatureContainer:
    def test_round_trip(self) -> None:
        features = SplitMix64(2).normal((3, 2, 5))
        decoded = decode_features(encode_features(features))
        assert decoded.tobytes() == features.tobytes()

    def test_truncated(self) -> None:
        blob = encode_features(np.zeros((2, 2, 2)))
        with pytest.raises(FormatError):
            decode_features(blob[:10])
        with pytest.raises(FormatError):
            decode_features(blob[:-8])

    def test_header_disagrees_with_payload(self) -> None:
        blob = encode_features(np.zeros((2, 2, 2))) + bytes(8)
        with pytest.raises(FormatError) as exc_info:
            decode_features(blob)
        assert exc_info.value.offset == 20 + 64

    def test_bad_magic(self) -> None:
        blob = b"TSGW" + encode_features(np.zeros((1, 1, 1)))[4:]
        with pytest.raises(FormatError) as exc_info:
            decode_features(blob)
        assert exc_info.value.offset == 0


class TestSplits:
    def test_held_out_tail(self, tiny_corpus: list[Video]) -> None:
        train, held_out = train_test_split(list(reversed(tiny_corpus)), 0.2)
        assert [v.id for v in train] == ["v000", "v001", "v002"]
        assert [v.id for v in held_out] == ["v003"]

    def test_single_video_stays_in_training(self, tiny_corpus: list[Video]) -> None:
        train, held_out = train_test_split(tiny_corpus[:1], 0.5)
        assert len(train) == 1
        assert held_out == []

    def test_leave_one_out(self, tiny_corpus: list[Video]) -> None:
        rounds = list(leave_one_out(tiny_corpus))
        assert [held.id for _, held in rounds] == [v.id for v in tiny_corpus]
        for rest, held in rounds:
            assert held.id not in {video.id for video in rest}
            assert len(rest) == len(tiny_corpus) - 1

    def test_leave_one_out_needs_two_videos(self, tiny_corpus: list[Video]) -> None:
        with pytest.raises(ContractError):
            list(leave_one_out(tiny_corpus[:1]))


class TestCorpusRepository:
    """Corpus directories on disk."""

    def test_save_and_load(self, tmp_path: Path, tiny_corpus: list[Video]) -> None:
        CorpusRepository(tmp_path).save_all(tiny_corpus)
        loaded = CorpusRepository(tmp_path).load()
        assert [v.id for v in loaded] == [v.id for v in tiny_corpus]
        for a, b in zip(loaded, tiny_corpus, strict=True):
            assert a.features().tobytes() == b.features().tobytes()
            assert caption_pool([a]) == caption_pool([b])
            assert a.importance == b.importance
            assert a.reference_texts == b.reference_texts
            assert [s.distractor for s in a.shots] == [s.distractor for s in b.shots]

    def test_annotation_lines_match_shot_count(
        self, tmp_path: Path, tiny_corpus: list[Video]
    ) -> None:
        repo = CorpusRepository(tmp_path)
        repo.save_all(tiny_corpus)
        records = list(read_jsonl(repo.annotations_path, AnnotationRecord))
        assert len(records) == sum(len(v) for v in tiny_corpus)

    def test_saving_twice_is_byte_identical(
        self, tmp_path: Path, tiny_spec: SyntheticSpec
    ) -> None:
        for name in ("a", "b"):
            videos = generate_synthetic(tiny_spec)
            CorpusRepository(tmp_path / name).save_all(videos, tiny_spec)
        first = tmp_path / "a"
        files = sorted(p.relative_to(first) for p in first.rglob("*"))
        for relative in files:
            if (tmp_path / "a" / relative).is_file():
                assert (tmp_path / "a" / relative).read_bytes() == (
                    tmp_path / "b" / relative
                ).read_bytes()
        assert CorpusRepository(tmp_path / "a").load_spec() == tiny_spec

    def test_unknown_video(self, tmp_path: Path, tiny_corpus: list[Video]) -> None:
        CorpusRepository(tmp_path).save_all(tiny_corpus)
        with pytest.raises(NotFoundError):
            CorpusRepository(tmp_path).get("v999")

    def test_missing_corpus(self, tmp_path: Path) -> None:
        with pytest.raises(NotFoundError):
            CorpusRepository(tmp_path / "nowhere").load()

    def test_missing_feature_container(
        self, tmp_path: Path, tiny_corpus: list[Video]
    ) -> None:
        repo = CorpusRepository(tmp_path)
        repo.save_all(tiny_corpus)
        repo.features_path("v001").unlink()
        with pytest.raises(FormatError):
            CorpusRepository(tmp_path).load()

    def test_corrupt_annotation_line(
        self, tmp_path: Path, tiny_corpus: list[Video]
    ) -> None:
        repo = CorpusRepository(tmp_path)
        repo.save_all(tiny_corpus)
        lines = repo.annotations_path.read_bytes().splitlines(keepends=True)
        lines[1] = b'{"video": "v000", "shot": -1}\n'
        repo.annotations_path.write_bytes(b"".join(lines))
        with pytest.raises(FormatError) as exc_info:
            CorpusRepository(tmp_path).load()
        assert exc_info.value.offset == len(lines[0])
