"""Binary storage of periodic grid samples with a JSON sidecar.

Layout of the ``.grid`` file: n and N as little-endian int64, L as
little-endian float64, then N^n complex values (real, imaginary float64
pairs) in row-major order. The sidecar ``<path>.json`` repeats the header and
carries a SHA-256 of the payload plus free-form metadata.
"""

import hashlib
import json
import logging
from pathlib import Path

import numpy as np

from ..errors import GridFormatError

logger = logging.getLogger(__name__)

HEADER_BYTES = 24
FORMAT_VERSION = 1


def sidecar_path(path):
    path = Path(path)
    return path.with_name(path.name + ".json")


def write_grid(path, n, N, L, values, metadata=None):
    path = Path(path)
    values = np.ascontiguousarray(values, dtype="<c16")
    if values.size != N ** n:
        raise GridFormatError(f"write_grid: expected {N ** n} values, got {values.size}")
    header = np.array([n, N], dtype="<i8").tobytes() + np.array([L], dtype="<f8").tobytes()
    payload = values.tobytes(order="C")
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(header)
        f.write(payload)

    sidecar = {
        'format_version': FORMAT_VERSION,
        'n': int(n),
        'N': int(N),
        'L': float(L),
        'dtype': "complex128",
        'order': "row-major",
        'sha256': hashlib.sha256(payload).hexdigest(),
        'metadata': metadata or {},
    }
    with open(sidecar_path(path), "w") as f:
        json.dump(sidecar, f, indent=2, sort_keys=True)
    logger.debug("write_grid: %s n=%d N=%d L=%g", path, n, N, L)
    return path


def read_grid(path):
    """Return (n, N, L, values, metadata); values has shape (N,)*n."""
    path = Path(path)
    try:
        raw = path.read_bytes()
        with open(sidecar_path(path)) as f:
            sidecar = json.load(f)
    except (OSError, ValueError) as e:
        raise GridFormatError(f"read_grid: cannot read {path}: {e}") from e

    if len(raw) < HEADER_BYTES:
        raise GridFormatError(f"read_grid: {path} is shorter than its header")
    n, N = (int(x) for x in np.frombuffer(raw[:16], dtype="<i8"))
    L = float(np.frombuffer(raw[16:24], dtype="<f8")[0])
    if (n, N, L) != (sidecar.get('n'), sidecar.get('N'), sidecar.get('L')):
        raise GridFormatError(f"read_grid: header {(n, N, L)} disagrees with sidecar")
    payload = raw[HEADER_BYTES:]
    if len(payload) != 16 * N ** n:
        raise GridFormatError(f"read_grid: payload holds {len(payload) // 16} values, expected {N ** n}")
    if hashlib.sha256(payload).hexdigest() != sidecar.get('sha256'):
        raise GridFormatError(f"read_grid: checksum mismatch for {path}")
    values = np.frombuffer(payload, dtype="<c16").reshape((N,) * n).astype(complex)
    return n, N, L, values, sidecar.get('metadata', {})
