"""On-disk format tests for the BTF1/BTM1 files."""

import numpy as np
import pytest

from bayescp.errors import FormatError
from bayescp.io import read_mask, read_tensor, write_mask, write_tensor
from bayescp.tensors import ObservationMask


def test_tensor_round_trip_bit_exact(tmp_path):
    rng = np.random.default_rng(0)
    t = rng.standard_normal((3, 4, 5))
    path = tmp_path / "t.btf"
    write_tensor(path, t)
    back = read_tensor(path)
    assert back.shape == t.shape
    np.testing.assert_array_equal(back, t)


def test_tensor_layout_is_column_major(tmp_path):
    t = np.arange(1, 9, dtype=float).reshape((2, 2, 2), order="F")
    path = tmp_path / "t.btf"
    write_tensor(path, t)
    raw = path.read_bytes()
    payload = np.frombuffer(raw[8 + 4 * 3:], dtype="<f8")
    np.testing.assert_array_equal(payload, np.arange(1, 9, dtype=float))


def test_mask_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    flags = rng.random((4, 3, 2)) < 0.5
    path = tmp_path / "m.btm"
    write_mask(path, ObservationMask(flags))
    back = read_mask(path)
    np.testing.assert_array_equal(back.flags, flags)


def test_bad_magic(tmp_path):
    path = tmp_path / "bad.btf"
    write_tensor(path, np.ones((2, 2)))
    data = bytearray(path.read_bytes())
    data[:4] = b"NOPE"
    path.write_bytes(bytes(data))
    with pytest.raises(FormatError):
        read_tensor(path)


def test_truncated_payload(tmp_path):
    path = tmp_path / "short.btf"
    write_tensor(path, np.ones((2, 3)))
    data = path.read_bytes()
    path.write_bytes(data[:-8])
    with pytest.raises(FormatError):
        read_tensor(path)


def test_mask_values_other_than_01_rejected(tmp_path):
    path = tmp_path / "m.btm"
    write_mask(path, np.ones((2, 2), dtype=bool))
    data = bytearray(path.read_bytes())
    data[-1] = 7
    path.write_bytes(bytes(data))
    with pytest.raises(FormatError):
        read_mask(path)


def test_non_finite_rejected_on_write(tmp_path):
    t = np.ones((2, 2))
    t[0, 0] = np.nan
    with pytest.raises(FormatError):
        write_tensor(tmp_path / "nan.btf", t)


def test_mask_file_and_tensor_file_not_interchangeable(tmp_path):
    tpath = tmp_path / "t.btf"
    write_tensor(tpath, np.ones((2, 2)))
    with pytest.raises(FormatError):
        read_mask(tpath)
