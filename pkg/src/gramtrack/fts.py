"""FTS1 binary tensor files.

Layout (little-endian, no compression, no alignment padding):

    magic   4 bytes   b"FTS1"
    dtype   u8        1 = float32, 2 = float64
    ndim    u8
    dims    ndim * u32
    data    raw row-major values

Round-trips are bit-exact for the stored dtype.
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import FormatError

MAGIC = b"FTS1"

_CODE_TO_DTYPE = {1: np.dtype("<f4"), 2: np.dtype("<f8")}
_DTYPE_TO_CODE = {np.dtype(np.float32): 1, np.dtype(np.float64): 2}

_MAX_NDIM = 8
_MAX_ELEMENTS = 1 << 40


def write_feature_file(tensor, path, *, dtype=None) -> None:
    """Write an array to ``path`` in FTS1 format.

    ``dtype`` defaults to the array's own dtype (float32/float64 only).
    """
    arr = np.asarray(tensor)
    if dtype is not None:
        arr = arr.astype(dtype, copy=False)
    code = _DTYPE_TO_CODE.get(np.dtype(arr.dtype))
    if code is None:
        raise FormatError(f"unsupported dtype {arr.dtype}; use float32 or float64")
    if arr.ndim < 1 or arr.ndim > _MAX_NDIM:
        raise FormatError(f"ndim must be in [1, {_MAX_NDIM}], got {arr.ndim}")
    if min(arr.shape) < 1:
        raise FormatError(f"dims must be positive, got {arr.shape}")
    if max(arr.shape) > 0xFFFFFFFF:
        raise FormatError(f"dimension too large for u32: {arr.shape}")
    header = struct.pack("<4sBB", MAGIC, code, arr.ndim)
    header += struct.pack(f"<{arr.ndim}I", *arr.shape)
    payload = np.ascontiguousarray(arr).astype(f"<{arr.dtype.str[1:]}", copy=False).tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)


def read_feature_file(path) -> np.ndarray:
    """Read an FTS1 file back into an array (stored dtype preserved)."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 6:
        raise FormatError(f"{path}: truncated header")
    magic, code, ndim = struct.unpack("<4sBB", blob[:6])
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if code not in _CODE_TO_DTYPE:
        raise FormatError(f"{path}: unknown dtype code {code}")
    if ndim < 1 or ndim > _MAX_NDIM:
        raise FormatError(f"{path}: ndim {ndim} out of range")
    offset = 6 + 4 * ndim
    if len(blob) < offset:
        raise FormatError(f"{path}: truncated dimension table")
    shape = struct.unpack(f"<{ndim}I", blob[6:offset])
    if min(shape) < 1:
        raise FormatError(f"{path}: zero dimension in {shape}")
    count = 1
    for d in shape:
        count *= d
        if count > _MAX_ELEMENTS:
            raise FormatError(f"{path}: shape overflow {shape}")
    dtype = _CODE_TO_DTYPE[code]
    expected = offset + count * dtype.itemsize
    if len(blob) != expected:
        raise FormatError(
            f"{path}: payload size {len(blob) - offset} does not match shape "
            f"{shape} ({count * dtype.itemsize} bytes expected)")
    data = np.frombuffer(blob, dtype=dtype, count=count, offset=offset)
    return data.reshape(shape).copy()
