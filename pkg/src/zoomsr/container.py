"""Binary tensor container with checksum.

Layout (all little-endian, independent of host byte order):

    4 bytes   magic "KPNT"
    u16       format version (currently 1)
    u16       rank
    u32 * r   dimensions
    f32 * n   payload, row-major (n = product of dimensions)
    u32       CRC32 of the payload bytes

The CRC exists because training artifacts are large enough for silent
corruption to matter. Values are stored as 32-bit floats and promoted to
float64 on read.
"""

from __future__ import annotations

import struct
import zlib
from pathlib import Path

import numpy as np

from .errors import DataIOError

MAGIC = b"KPNT"
VERSION = 1
_MAX_RANK = 16


def tensor_bytes(arr) -> bytes:
    """Serialize an array to container bytes."""
    data = np.ascontiguousarray(np.asarray(arr), dtype="<f4")
    if data.ndim < 1 or data.ndim > _MAX_RANK:
        raise DataIOError(f"tensor rank {data.ndim} outside [1, {_MAX_RANK}]")
    payload = data.tobytes()
    header = MAGIC + struct.pack("<HH", VERSION, data.ndim)
    header += struct.pack(f"<{data.ndim}I", *data.shape)
    crc = zlib.crc32(payload) & 0xFFFFFFFF
    return header + payload + struct.pack("<I", crc)


def parse_tensor(blob: bytes, origin: str = "<bytes>") -> np.ndarray:
    """Parse container bytes back into a float64 array."""
    if len(blob) < 8:
        raise DataIOError(f"{origin}: too short for a container header")
    if blob[:4] != MAGIC:
        raise DataIOError(f"{origin}: bad magic {blob[:4]!r}")
    version, rank = struct.unpack("<HH", blob[4:8])
    if version != VERSION:
        raise DataIOError(f"{origin}: unsupported version {version}")
    if rank < 1 or rank > _MAX_RANK:
        raise DataIOError(f"{origin}: invalid rank {rank}")
    dims_end = 8 + 4 * rank
    if len(blob) < dims_end:
        raise DataIOError(f"{origin}: truncated dimension list")
    dims = struct.unpack(f"<{rank}I", blob[8:dims_end])
    count = 1
    for d in dims:
        count *= d
    expected = dims_end + 4 * count + 4
    if len(blob) != expected:
        raise DataIOError(
            f"{origin}: size {len(blob)} != expected {expected} for dims {dims}"
        )
    payload = blob[dims_end:dims_end + 4 * count]
    (crc_stored,) = struct.unpack("<I", blob[expected - 4:])
    if zlib.crc32(payload) & 0xFFFFFFFF != crc_stored:
        raise DataIOError(f"{origin}: payload CRC mismatch")
    arr = np.frombuffer(payload, dtype="<f4").reshape(dims)
    return arr.astype(np.float64)


def write_tensor(path, arr) -> None:
    """Write an array to a container file."""
    try:
        Path(path).write_bytes(tensor_bytes(arr))
    except OSError as exc:
        raise DataIOError(f"cannot write tensor file: {path} ({exc})") from exc


def read_tensor(path) -> np.ndarray:
    """Read a container file into a float64 array."""
    try:
        blob = Path(path).read_bytes()
    except FileNotFoundError as exc:
        raise DataIOError(f"tensor file not found: {path}") from exc
    except OSError as exc:
        raise DataIOError(f"cannot read tensor file: {path} ({exc})") from exc
    return parse_tensor(blob, origin=str(path))
