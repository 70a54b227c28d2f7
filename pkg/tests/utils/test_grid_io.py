import json

import numpy as np
import pytest

from spheremax.errors import GridFormatError
from spheremax.utils.grid_io import HEADER_BYTES, read_grid, sidecar_path, write_grid


@pytest.fixture
def grid_file(tmp_path):
    values = (np.arange(16) + 1j * np.arange(16)[::-1]).reshape(4, 4)
    path = write_grid(tmp_path / "sample.grid", 2, 4, 3.5, values, {'label': 'test'})
    return path, values


def test_write_then_read(grid_file):
    path, values = grid_file
    n, N, L, loaded, metadata = read_grid(path)
    assert (n, N, L) == (2, 4, 3.5)
    assert np.array_equal(loaded, values)
    assert metadata == {'label': 'test'}


def test_file_layout(grid_file):
    path, _ = grid_file
    raw = path.read_bytes()
    assert len(raw) == HEADER_BYTES + 16 * 16
    assert np.frombuffer(raw[:16], dtype="<i8").tolist() == [2, 4]
    sidecar = json.loads(sidecar_path(path).read_text())
    assert sidecar['dtype'] == "complex128"
    assert sidecar['format_version'] == 1


def test_wrong_value_count(tmp_path):
    with pytest.raises(GridFormatError):
        write_grid(tmp_path / "bad.grid", 1, 8, 1.0, np.zeros(7))


def test_corrupt_payload(grid_file):
    path, _ = grid_file
    raw = bytearray(path.read_bytes())
    raw[-1] ^= 0xFF
    path.write_bytes(bytes(raw))
    with pytest.raises(GridFormatError, match="checksum"):
        read_grid(path)


def test_truncated_file(grid_file):
    path, _ = grid_file
    path.write_bytes(path.read_bytes()[:HEADER_BYTES + 8])
    with pytest.raises(GridFormatError):
        read_grid(path)


def test_header_disagrees_with_sidecar(grid_file):
    path, _ = grid_file
    sidecar = json.loads(sidecar_path(path).read_text())
    sidecar['L'] = 4.0
    sidecar_path(path).write_text(json.dumps(sidecar))
    with pytest.raises(GridFormatError, match="sidecar"):
        read_grid(path)


def test_missing_sidecar(grid_file):
    path, _ = grid_file
    sidecar_path(path).unlink()
    with pytest.raises(GridFormatError):
        read_grid(path)
