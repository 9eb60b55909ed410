"""Binary snapshot format for online learner states.

Layout (all little-endian):

    bytes 0..4   magic "ONMF1"
    u32          format version (currently 1)
    u64          d, atom length
    u64          r, atom count
    u64          t, steps folded in
    f64          lam
    f64 * d*r    W, row-major
    f64 * r*r    A, row-major
    f64 * r*d    B, row-major

The payload length must match the header exactly; a state written and read
back is bit-identical.  Files are written atomically (temp file + rename).
"""

import os
import struct
import tempfile

import numpy as np

from .errors import FormatError
from .online import OnlineDictionaryState

__all__ = ["save_state", "load_state", "MAGIC", "VERSION"]

MAGIC = b"ONMF1"
VERSION = 1
_HEADER = struct.Struct("<IQQQd")


def save_state(path, state):
    """Write a state snapshot atomically; the target appears all at once."""
    d, r = state.W.shape
    blob = bytearray()
    blob += MAGIC
    blob += _HEADER.pack(VERSION, d, r, state.t, state.lam)
    for M in (state.W, state.A, state.B):
        blob += np.ascontiguousarray(M, dtype="<f8").tobytes()
    dirpath = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=dirpath, prefix=".onmf-", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(bytes(blob))
        os.chmod(tmp, 0o644)  # mkstemp defaults to 0600
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_state(path):
    """Read a state snapshot, validating magic, version, and exact length."""
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < len(MAGIC) + _HEADER.size:
        raise FormatError(f"{path}: truncated header")
    if data[: len(MAGIC)] != MAGIC:
        raise FormatError(f"{path}: bad magic {data[:5]!r}")
    version, d, r, t, lam = _HEADER.unpack_from(data, len(MAGIC))
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    expected = len(MAGIC) + _HEADER.size + 8 * (d * r + r * r + r * d)
    if len(data) != expected:
        raise FormatError(
            f"{path}: payload is {len(data)} bytes, header implies {expected}"
        )
    off = len(MAGIC) + _HEADER.size
    out = []
    for rows, cols in ((d, r), (r, r), (r, d)):
        n = rows * cols
        M = np.frombuffer(data, dtype="<f8", count=n, offset=off).reshape(rows, cols)
        out.append(M.astype(np.float64))
        off += 8 * n
    W, A, B = out
    return OnlineDictionaryState(W=W, A=A, B=B, t=t, lam=lam)
