"""
Length-prefixed binary container shared by the document cache and model
checkpoints.

Layout (all integers little-endian):

    magic    4 bytes  b"CQAR"
    version  1 byte
    kind     u16 length + UTF-8 bytes
    header   u32 length + UTF-8 JSON (sorted keys)
    count    u32 number of arrays
    arrays   per array: u16 name length + name, u16 dtype length + dtype str,
             u8 ndim, ndim x u64 dims, u64 byte length, raw C-order bytes
"""

import json
import struct
from pathlib import Path
from typing import Any, Dict, Tuple

import numpy as np

MAGIC = b"CQAR"
VERSION = 1


class ContainerError(ValueError):
    """Raised when a container file is truncated or of the wrong kind."""


def _pack_str(text: str, width: str = "<H") -> bytes:
    raw = text.encode("utf-8")
    return struct.pack(width, len(raw)) + raw


def write_container(path: str | Path, kind: str, header: Dict[str, Any],
                    arrays: Dict[str, np.ndarray]) -> None:
    """Write `arrays` (in insertion order) with a JSON header."""
    chunks = [MAGIC, struct.pack("<B", VERSION), _pack_str(kind)]
    header_raw = json.dumps(header, sort_keys=True).encode("utf-8")
    chunks.append(struct.pack("<I", len(header_raw)) + header_raw)
    chunks.append(struct.pack("<I", len(arrays)))
    for name, array in arrays.items():
        array = np.ascontiguousarray(array)
        dtype = array.dtype.newbyteorder("<") if array.dtype.byteorder == ">" else array.dtype
        array = array.astype(dtype, copy=False)
        chunks.append(_pack_str(name))
        chunks.append(_pack_str(dtype.str))
        chunks.append(struct.pack("<B", array.ndim))
        chunks.append(struct.pack(f"<{array.ndim}Q", *array.shape))
        raw = array.tobytes(order="C")
        chunks.append(struct.pack("<Q", len(raw)) + raw)
    Path(path).write_bytes(b"".join(chunks))


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.offset = 0

    def take(self, size: int) -> bytes:
        if self.offset + size > len(self.data):
            raise ContainerError("container is truncated")
        chunk = self.data[self.offset:self.offset + size]
        self.offset += size
        return chunk

    def unpack(self, fmt: str) -> Tuple:
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def string(self, width: str = "<H") -> str:
        (length,) = self.unpack(width)
        return self.take(length).decode("utf-8")


def read_container(path: str | Path, kind: str) -> Tuple[Dict[str, Any], Dict[str, np.ndarray]]:
    """Read a container written by `write_container`, checking magic, version and kind."""
    reader = _Reader(Path(path).read_bytes())
    if reader.take(len(MAGIC)) != MAGIC:
        raise ContainerError(f"{path}: not a conqar container")
    (version,) = reader.unpack("<B")
    if version != VERSION:
        raise ContainerError(f"{path}: unsupported container version {version}")
    found_kind = reader.string()
    if found_kind != kind:
        raise ContainerError(f"{path}: expected a {kind!r} container, found {found_kind!r}")
    header = json.loads(reader.string("<I"))

    (count,) = reader.unpack("<I")
    arrays: Dict[str, np.ndarray] = {}
    for _ in range(count):
        name = reader.string()
        dtype = np.dtype(reader.string())
        (ndim,) = reader.unpack("<B")
        shape = reader.unpack(f"<{ndim}Q") if ndim else ()
        (nbytes,) = reader.unpack("<Q")
        arrays[name] = np.frombuffer(reader.take(nbytes), dtype=dtype).reshape(shape).copy()
    return header, arrays
