"""Corpus directory repository.

Layout::

    <root>/features/<video>.tsgf
    <root>/annotations.jsonl
    <root>/references.jsonl
    <root>/synthetic_spec.json   (synthetic corpora only)
"""

import builtins
from collections import defaultdict
from collections.abc import Sequence
from pathlib import Path
from typing import Any

from ..core.error_utils import raise_not_found
from ..core.exceptions import FormatError, SynopsisError
from ..core.logging import get_logger
from ..corpus.io import (
    annotation_records,
    load_features,
    read_jsonl,
    reference_records,
    save_features,
    write_jsonl,
)
from ..corpus.models import AnnotationRecord, ReferenceRecord, Shot, Video
from ..corpus.synthetic import SyntheticSpec
from ..corpus.text import Caption
from .base import BaseRepository

logger = get_logger(__name__)

ANNOTATIONS_FILE = "annotations.jsonl"
REFERENCES_FILE = "references.jsonl"
SPEC_FILE = "synthetic_spec.json"
FEATURES_DIR = "features"


class CorpusRepository(BaseRepository[Video]):
    """Pre-shotted corpus stored as feature containers plus JSON lines."""

    def __init__(self, root: Path) -> None:
        super().__init__(root)
        self._videos: dict[str, Video] | None = None

    @property
    def annotations_path(self) -> Path:
        return self.root / ANNOTATIONS_FILE

    @property
    def references_path(self) -> Path:
        return self.root / REFERENCES_FILE

    def features_path(self, video_id: str) -> Path:
        return self.root / FEATURES_DIR / f"{video_id}.tsgf"

    def save(self, entity: Video, **kwargs: Any) -> Path:
        """Write one video's features; annotations are written by ``save_all``."""
        path = self.features_path(entity.id)
        save_features(path, entity.features())
        return path

    def save_all(
        self, videos: Sequence[Video], spec: SyntheticSpec | None = None
    ) -> None:
        """Write a whole corpus, replacing any annotation files in the root."""
        self.root.mkdir(parents=True, exist_ok=True)
        ordered = sorted(videos, key=lambda video: video.id)
        for video in ordered:
            self.save(video)
        shots = write_jsonl(self.annotations_path, annotation_records(ordered))
        write_jsonl(self.references_path, reference_records(ordered))
        if spec is not None:
            spec.save(self.root / SPEC_FILE)
        self._videos = {video.id: video for video in ordered}
        logger.info(
            "Corpus saved", root=str(self.root), videos=len(ordered), shots=shots
        )

    def load_spec(self) -> SyntheticSpec | None:
        path = self.root / SPEC_FILE
        return SyntheticSpec.load(path) if path.exists() else None

    def load(self) -> list[Video]:
        """Load and validate every video, sorted by id."""
        if self._videos is None:
            self._videos = self._read()
        return [self._videos[video_id] for video_id in sorted(self._videos)]

    def get(self, id: Any) -> Video:
        videos = {video.id: video for video in self.load()}
        if id not in videos:
            raise_not_found("video", id, {"corpus": str(self.root)})
        return videos[id]

    def list(self) -> builtins.list[str]:
        return [video.id for video in self.load()]

    def _read(self) -> dict[str, Video]:
        if not self.annotations_path.exists():
            raise_not_found("corpus", str(self.root), {"missing": ANNOTATIONS_FILE})

        annotations: dict[str, builtins.list[AnnotationRecord]] = defaultdict(list)
        for record in read_jsonl(self.annotations_path, AnnotationRecord):
            annotations[record.video].append(record)

        references: dict[str, builtins.list[ReferenceRecord]] = defaultdict(list)
        if self.references_path.exists():
            for ref in read_jsonl(self.references_path, ReferenceRecord):
                references[ref.video].append(ref)

        videos = {}
        for video_id in sorted(annotations):
            videos[video_id] = self._assemble(
                video_id, annotations[video_id], references.get(video_id, [])
            )
        logger.info(
            "Corpus loaded",
            root=str(self.root),
            videos=len(videos),
            shots=sum(len(video) for video in videos.values()),
        )
        return videos

    def _assemble(
        self,
        video_id: str,
        records: builtins.list[AnnotationRecord],
        refs: builtins.list[ReferenceRecord],
    ) -> Video:
        path = self.features_path(video_id)
        if not path.exists():
            raise FormatError(
                f"video {video_id!r} is annotated but has no feature container",
                context={"path": str(path)},
            )
        features = load_features(path)
        records = sorted(records, key=lambda record: record.shot)
        if len(records) != features.shape[0]:
            raise FormatError(
                f"video {video_id!r}: {len(records)} annotated shots but "
                f"{features.shape[0]} feature rows",
                context={"path": str(path)},
            )
        try:
            shots = tuple(
                Shot(
                    index=record.shot,
                    features=features[position].copy(),
                    groundtruth=Caption.from_text(record.caption),
                    important=record.important,
                    distractor=(
                        Caption.from_text(record.distractor)
                        if record.distractor
                        else None
                    ),
                )
                for position, record in enumerate(records)
            )
            texts = tuple(ref.text for ref in sorted(refs, key=lambda ref: ref.ref))
            return Video(id=video_id, shots=shots, reference_texts=texts)
        except SynopsisError as e:
            if isinstance(e, FormatError):
                raise
            raise FormatError(
                f"corrupt annotations for video {video_id!r}: {e.message}",
                context={"path": str(self.annotations_path), **e.context},
            ) from e
