"""Binary tensor (BTF1) and mask (BTM1) file I/O.

Both formats share the header: 4 magic bytes, little-endian u32 order N,
then N little-endian u32 extents.  The BTF1 payload is ``prod(extents)``
float64 values, little-endian, column-major (first index fastest).  The
BTM1 payload is the same number of u8 flags (0 = missing, 1 = observed).
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import FormatError
from .tensors import MAX_ORDER, ObservationMask

TENSOR_MAGIC = b"BTF1"
MASK_MAGIC = b"BTM1"


def _read_header(data: bytes, magic: bytes, path: str) -> tuple[tuple[int, ...], int]:
    if len(data) < 8:
        raise FormatError(f"{path}: truncated header")
    if data[:4] != magic:
        raise FormatError(f"{path}: bad magic {data[:4]!r}, expected {magic!r}")
    (order,) = struct.unpack_from("<I", data, 4)
    if not 1 <= order <= MAX_ORDER:
        raise FormatError(f"{path}: order {order} outside [1, {MAX_ORDER}]")
    if len(data) < 8 + 4 * order:
        raise FormatError(f"{path}: truncated extent list")
    extents = struct.unpack_from(f"<{order}I", data, 8)
    if any(e < 1 for e in extents):
        raise FormatError(f"{path}: zero extent in {extents}")
    return tuple(int(e) for e in extents), 8 + 4 * order


def _payload(data: bytes, offset: int, count: int, itemsize: int, path: str) -> bytes:
    expected = offset + count * itemsize
    if len(data) != expected:
        raise FormatError(
            f"{path}: payload size {len(data) - offset} bytes, "
            f"expected {count * itemsize}"
        )
    return data[offset:]


def write_tensor(path, tensor: np.ndarray) -> None:
    """Write a float64 tensor as a BTF1 file."""
    tensor = np.asarray(tensor, dtype=np.float64)
    if tensor.ndim < 1 or tensor.ndim > MAX_ORDER:
        raise FormatError(f"order {tensor.ndim} outside [1, {MAX_ORDER}]")
    if not np.all(np.isfinite(tensor)):
        raise FormatError("tensor contains non-finite values")
    with open(path, "wb") as fh:
        fh.write(TENSOR_MAGIC)
        fh.write(struct.pack("<I", tensor.ndim))
        fh.write(struct.pack(f"<{tensor.ndim}I", *tensor.shape))
        fh.write(tensor.ravel(order="F").astype("<f8").tobytes())


def read_tensor(path) -> np.ndarray:
    """Read a BTF1 file into a float64 ndarray."""
    with open(path, "rb") as fh:
        data = fh.read()
    shape, offset = _read_header(data, TENSOR_MAGIC, str(path))
    count = int(np.prod(shape, dtype=np.int64))
    raw = _payload(data, offset, count, 8, str(path))
    values = np.frombuffer(raw, dtype="<f8").astype(np.float64)
    if not np.all(np.isfinite(values)):
        raise FormatError(f"{path}: non-finite values in payload")
    return values.reshape(shape, order="F")


def write_mask(path, mask) -> None:
    """Write an observation mask (ObservationMask or bool ndarray) as BTM1."""
    flags = mask.flags if isinstance(mask, ObservationMask) else np.asarray(mask)
    flags = flags.astype(bool)
    if flags.ndim < 1 or flags.ndim > MAX_ORDER:
        raise FormatError(f"order {flags.ndim} outside [1, {MAX_ORDER}]")
    with open(path, "wb") as fh:
        fh.write(MASK_MAGIC)
        fh.write(struct.pack("<I", flags.ndim))
        fh.write(struct.pack(f"<{flags.ndim}I", *flags.shape))
        fh.write(flags.ravel(order="F").astype(np.uint8).tobytes())


def read_mask(path) -> ObservationMask:
    """Read a BTM1 file into an ObservationMask."""
    with open(path, "rb") as fh:
        data = fh.read()
    shape, offset = _read_header(data, MASK_MAGIC, str(path))
    count = int(np.prod(shape, dtype=np.int64))
    raw = _payload(data, offset, count, 1, str(path))
    values = np.frombuffer(raw, dtype=np.uint8)
    if np.any(values > 1):
        raise FormatError(f"{path}: mask payload contains values other than 0/1")
    flags = values.astype(bool).reshape(shape, order="F")
    return ObservationMask(flags)
