import io
import struct

import numpy as np
import pytest

from mac_sav_zec.grid import GridSpec, Placement
from mac_sav_zec.scheme import Params, default_initial_phase, init_state, integrate, step
from mac_sav_zec.snapshot import (
    SnapshotFormatError,
    load_checkpoint,
    load_field,
    read_field,
    save_checkpoint,
    save_field,
    write_field,
)


def test_block_layout():
    a = np.arange(6.0).reshape(2, 3)  # an x-edge field on N = 2
    buf = io.BytesIO()
    write_field(buf, a)
    raw = buf.getvalue()
    assert raw[:4] == b"MACF"
    assert struct.unpack("<IB", raw[4:9]) == (2, 1)
    np.testing.assert_array_equal(np.frombuffer(raw[9:], "<f8"), np.arange(6.0))


@pytest.mark.parametrize("placement", list(Placement))
def test_field_round_trip(tmp_path, rng, placement):
    a = rng.standard_normal(GridSpec(5).shape(placement))
    save_field(tmp_path / "f.macf", a, placement)
    b, p = load_field(tmp_path / "f.macf")
    assert p is placement
    np.testing.assert_array_equal(a, b)


def test_bad_blocks():
    with pytest.raises(SnapshotFormatError):
        read_field(io.BytesIO(b"NOPE" + bytes(5)))
    with pytest.raises(SnapshotFormatError):
        read_field(io.BytesIO(b"MACF" + struct.pack("<IB", 4, 7)))
    with pytest.raises(SnapshotFormatError):
        read_field(io.BytesIO(b"MACF" + struct.pack("<IB", 4, 0) + bytes(8)))


def test_checkpoint_restart_is_bit_identical(tmp_path):
    p = Params(0.1, 1.0, 1.0, 1e-2, 8, 0.05)
    s = integrate(init_state(default_initial_phase(p.grid)), p)
    save_checkpoint(tmp_path / "c.macf", s)
    back = load_checkpoint(tmp_path / "c.macf")
    assert (back.step, back.time, back.r_n, back.q_nm1) == (s.step, s.time, s.r_n, s.q_nm1)
    a, b = step(s, p), step(back, p)
    np.testing.assert_array_equal(a.phi_n, b.phi_n)
    np.testing.assert_array_equal(a.u_n.y, b.u_n.y)
