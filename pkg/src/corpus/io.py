"""Feature containers and annotation files.

Feature container layout (little-endian)::

    b"TSGF" | u32 version=1 | u32 N | u32 k | u32 d | N*k*d f64
"""

import struct
from collections.abc import Iterable, Iterator
from pathlib import Path

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel
from pydantic import ValidationError as PydanticValidationError

from ..core.error_utils import raise_dimension_error, raise_format_error
from .models import AnnotationRecord, ReferenceRecord, Video

FEATURE_MAGIC = b"TSGF"
FEATURE_VERSION = 1

_FEATURE_HEADER = struct.Struct("<4sIIII")


def encode_features(features: npt.NDArray[np.float64]) -> bytes:
    if features.ndim != 3:
        raise_dimension_error("save_features", features.shape)
    n, k, d = features.shape
    header = _FEATURE_HEADER.pack(FEATURE_MAGIC, FEATURE_VERSION, n, k, d)
    payload = np.ascontiguousarray(features, dtype="<f8").tobytes()
    return header + payload


def decode_features(blob: bytes, path: str | None = None) -> npt.NDArray[np.float64]:
    """Parse a feature container into an N x k x d array."""
    if len(blob) < _FEATURE_HEADER.size:
        raise_format_error("truncated header", len(blob), path)
    magic, version, n, k, d = _FEATURE_HEADER.unpack_from(blob, 0)
    if magic != FEATURE_MAGIC:
        raise_format_error(f"bad magic {magic!r}", 0, path)
    if version != FEATURE_VERSION:
        raise_format_error(f"unsupported version {version}", 4, path)
    expected = n * k * d * 8
    available = len(blob) - _FEATURE_HEADER.size
    if expected != available:
        raise_format_error(
            f"header declares {n}x{k}x{d} values ({expected} bytes) "
            f"but payload holds {available} bytes",
            _FEATURE_HEADER.size + min(expected, available),
            path,
        )
    data = np.frombuffer(blob, dtype="<f8", offset=_FEATURE_HEADER.size)
    return data.astype(np.float64).reshape(n, k, d)


def save_features(path: Path, features: npt.NDArray[np.float64]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_features(features))


def load_features(path: Path) -> npt.NDArray[np.float64]:
    return decode_features(path.read_bytes(), str(path))


def write_jsonl(path: Path, records: Iterable[BaseModel]) -> int:
    """Write one compact JSON object per line; returns the line count."""
    count = 0
    with path.open("w", encoding="utf-8") as handle:
        for record in records:
            handle.write(record.model_dump_json(exclude_none=True) + "\n")
            count += 1
    return count


def read_jsonl[T: BaseModel](path: Path, model: type[T]) -> Iterator[T]:
    """Parse JSON lines into ``model``; a bad line raises FormatError at its offset."""
    offset = 0
    with path.open("rb") as handle:
        for line_number, raw in enumerate(handle, start=1):
            if raw.strip():
                try:
                    yield model.model_validate_json(raw)
                except PydanticValidationError as e:
                    raise_format_error(
                        f"invalid record on line {line_number}: "
                        f"{e.errors()[0].get('msg', 'invalid')}",
                        offset,
                        str(path),
                    )
            offset += len(raw)


def annotation_records(videos: Iterable[Video]) -> Iterator[AnnotationRecord]:
    for video in videos:
        for shot in video.shots:
            yield AnnotationRecord(
                video=video.id,
                shot=shot.index,
                caption=shot.groundtruth.text,
                important=1 if shot.important else 0,
                distractor=shot.distractor.text if shot.distractor else None,
            )


def reference_records(videos: Iterable[Video]) -> Iterator[ReferenceRecord]:
    for video in videos:
        for r, text in enumerate(video.reference_texts):
            yield ReferenceRecord(video=video.id, ref=r, text=text)
