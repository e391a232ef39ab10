"""Binary parameter checkpoints.

Layout (little-endian)::

    b"TSGW" | u32 version=1 | u32 count
    per parameter: u16 name length | UTF-8 name | u8 rank | rank x u32 dims | f64 data
"""

import struct
from collections.abc import Mapping
from pathlib import Path

import numpy as np

from ..core.error_utils import raise_format_error
from .tensor import Array

MAGIC = b"TSGW"
VERSION = 1

_HEADER = struct.Struct("<4sII")
_NAME_LEN = struct.Struct("<H")
_RANK = struct.Struct("<B")
_DIM = struct.Struct("<I")


def encode_checkpoint(state: Mapping[str, Array]) -> bytes:
    """Serialize named arrays in mapping order."""
    parts = [_HEADER.pack(MAGIC, VERSION, len(state))]
    for name, values in state.items():
        array = np.asarray(values, dtype="<f8")
        encoded = name.encode("utf-8")
        parts.append(_NAME_LEN.pack(len(encoded)))
        parts.append(encoded)
        parts.append(_RANK.pack(array.ndim))
        parts.extend(_DIM.pack(dim) for dim in array.shape)
        parts.append(np.ascontiguousarray(array).tobytes())
    return b"".join(parts)


def decode_checkpoint(blob: bytes, path: str | None = None) -> dict[str, Array]:
    """Parse a checkpoint; any structural problem raises FormatError with its offset."""
    offset = 0

    def take(size: int, what: str) -> bytes:
        nonlocal offset
        if offset + size > len(blob):
            raise_format_error(f"truncated {what}", offset, path)
        chunk = blob[offset : offset + size]
        offset += size
        return chunk

    magic, version, count = _HEADER.unpack(take(_HEADER.size, "header"))
    if magic != MAGIC:
        raise_format_error(f"bad magic {magic!r}", 0, path)
    if version != VERSION:
        raise_format_error(f"unsupported version {version}", 4, path)

    state: dict[str, Array] = {}
    for _ in range(count):
        (name_len,) = _NAME_LEN.unpack(take(_NAME_LEN.size, "name length"))
        name_at = offset
        try:
            name = take(name_len, "name").decode("utf-8")
        except UnicodeDecodeError:
            raise_format_error("name is not UTF-8", name_at, path)
        if name in state:
            raise_format_error(f"duplicate parameter {name!r}", name_at, path)
        (rank,) = _RANK.unpack(take(_RANK.size, "rank"))
        dims = tuple(_DIM.unpack(take(_DIM.size, "dimension"))[0] for _ in range(rank))
        size = 1
        for dim in dims:
            size *= dim
        payload = size * 8
        if payload > len(blob) - offset:
            raise_format_error(
                f"parameter {name!r} declares {size} values beyond end of file",
                offset,
                path,
            )
        data = np.frombuffer(take(payload, "data"), dtype="<f8").astype(np.float64)
        state[name] = data.reshape(dims)

    if offset != len(blob):
        raise_format_error("trailing bytes after last parameter", offset, path)
    return state


def save_checkpoint(path: Path, state: Mapping[str, Array]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_checkpoint(state))


def load_checkpoint(path: Path) -> dict[str, Array]:
    return decode_checkpoint(path.read_bytes(), str(path))
