import numpy as np
import pytest
from numpy.testing import assert_array_equal

from onmf.errors import FormatError
from onmf.online import init_state, step
from onmf.persistence import MAGIC, load_state, save_state


def make_state():
    s = init_state(6, 3, lam=0.125, seed=4)
    rng = np.random.default_rng(0)
    for _ in range(3):
        s = step(s, rng.random((6, 2)))
    return s


def test_roundtrip_is_bit_identical(tmp_path):
    state = make_state()
    path = tmp_path / "state.dict"
    save_state(path, state)
    back = load_state(path)
    assert_array_equal(back.W, state.W)
    assert_array_equal(back.A, state.A)
    assert_array_equal(back.B, state.B)
    assert back.t == state.t
    assert back.lam == state.lam


def test_rewrite_produces_identical_bytes(tmp_path):
    state = make_state()
    a, b = tmp_path / "a.dict", tmp_path / "b.dict"
    save_state(a, state)
    save_state(b, state)
    assert a.read_bytes() == b.read_bytes()


def test_bad_magic_rejected(tmp_path):
    path = tmp_path / "state.dict"
    save_state(path, make_state())
    data = bytearray(path.read_bytes())
    data[:5] = b"NOPE!"
    path.write_bytes(bytes(data))
    with pytest.raises(FormatError, match="magic"):
        load_state(path)


def test_bad_version_rejected(tmp_path):
    path = tmp_path / "state.dict"
    save_state(path, make_state())
    data = bytearray(path.read_bytes())
    data[5] = 99
    path.write_bytes(bytes(data))
    with pytest.raises(FormatError, match="version"):
        load_state(path)


def test_truncated_payload_rejected(tmp_path):
    path = tmp_path / "state.dict"
    save_state(path, make_state())
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(FormatError, match="payload"):
        load_state(path)


def test_truncated_header_rejected(tmp_path):
    path = tmp_path / "stub.dict"
    path.write_bytes(MAGIC + b"\x01")
    with pytest.raises(FormatError, match="header"):
        load_state(path)


def test_no_temp_files_left_behind(tmp_path):
    path = tmp_path / "state.dict"
    save_state(path, make_state())
    leftovers = [p for p in tmp_path.iterdir() if p.name != "state.dict"]
    assert leftovers == []
