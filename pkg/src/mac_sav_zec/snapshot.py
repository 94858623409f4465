"""Binary field snapshots (``MACF`` blocks) and full-state checkpoints.

A ``MACF`` block is::

    b"MACF" | u32 N | u8 placement | float64 values, row-major, j outer

all little-endian, interior values only.  A checkpoint is a fixed header
(``int64 N, int64 step, float64 time, r_n, r_nm1, q_n, q_nm1``) followed by
seven blocks: phi_n, phi_nm1, u_n.x, u_n.y, p_n, u_nm1.x, u_nm1.y.
"""

from __future__ import annotations

import struct
from typing import BinaryIO

import numpy as np

from .grid import GridSpec, MacVector, Placement

MAGIC = b"MACF"
_BLOCK_HEAD = struct.Struct("<4sIB")
_CKPT_HEAD = struct.Struct("<qqd4d")


class SnapshotFormatError(ValueError):
    pass


def write_field(fh: BinaryIO, values: np.ndarray, placement: Placement | None = None) -> None:
    n = min(values.shape)
    grid = GridSpec(n)
    if placement is None:
        placement = grid.placement_of(values)
    if values.shape != grid.shape(placement):
        raise SnapshotFormatError(f"shape {values.shape} does not match placement {placement!r}")
    fh.write(_BLOCK_HEAD.pack(MAGIC, n, int(placement)))
    fh.write(np.ascontiguousarray(values, dtype="<f8").tobytes())


def read_field(fh: BinaryIO) -> tuple[np.ndarray, Placement]:
    head = fh.read(_BLOCK_HEAD.size)
    if len(head) != _BLOCK_HEAD.size:
        raise SnapshotFormatError("truncated MACF header")
    magic, n, code = _BLOCK_HEAD.unpack(head)
    if magic != MAGIC:
        raise SnapshotFormatError(f"bad magic {magic!r}")
    try:
        placement = Placement(code)
    except ValueError:
        raise SnapshotFormatError(f"unknown placement code {code}") from None
    shape = GridSpec(n).shape(placement)
    count = shape[0] * shape[1]
    raw = fh.read(8 * count)
    if len(raw) != 8 * count:
        raise SnapshotFormatError("truncated MACF payload")
    return np.frombuffer(raw, dtype="<f8").reshape(shape).astype(float), placement


def save_field(path, values: np.ndarray, placement: Placement | None = None) -> None:
    with open(path, "wb") as fh:
        write_field(fh, values, placement)


def load_field(path) -> tuple[np.ndarray, Placement]:
    with open(path, "rb") as fh:
        return read_field(fh)


def _expect(fh, placement):
    values, got = read_field(fh)
    if got != placement:
        raise SnapshotFormatError(f"expected a {placement.name} block, found {got.name}")
    return values


def save_checkpoint(path, state) -> None:
    n = state.phi_n.shape[0]
    with open(path, "wb") as fh:
        fh.write(_CKPT_HEAD.pack(n, state.step, state.time,
                                 state.r_n, state.r_nm1, state.q_n, state.q_nm1))
        write_field(fh, state.phi_n, Placement.CELL)
        write_field(fh, state.phi_nm1, Placement.CELL)
        write_field(fh, state.u_n.x, Placement.XEDGE)
        write_field(fh, state.u_n.y, Placement.YEDGE)
        write_field(fh, state.p_n, Placement.CELL)
        write_field(fh, state.u_nm1.x, Placement.XEDGE)
        write_field(fh, state.u_nm1.y, Placement.YEDGE)


def load_checkpoint(path):
    from .scheme import SimState

    with open(path, "rb") as fh:
        head = fh.read(_CKPT_HEAD.size)
        if len(head) != _CKPT_HEAD.size:
            raise SnapshotFormatError("truncated checkpoint header")
        n, step, time, r_n, r_nm1, q_n, q_nm1 = _CKPT_HEAD.unpack(head)
        phi_n = _expect(fh, Placement.CELL)
        phi_nm1 = _expect(fh, Placement.CELL)
        u_n = MacVector(_expect(fh, Placement.XEDGE), _expect(fh, Placement.YEDGE))
        p_n = _expect(fh, Placement.CELL)
        u_nm1 = MacVector(_expect(fh, Placement.XEDGE), _expect(fh, Placement.YEDGE))
    if phi_n.shape[0] != n:
        raise SnapshotFormatError(f"header says N={n}, blocks have N={phi_n.shape[0]}")
    return SimState(phi_n, phi_nm1, u_n, u_nm1, p_n, r_n, r_nm1, q_n, q_nm1, step, time)


def is_field_file(path) -> bool:
    with open(path, "rb") as fh:
        return fh.read(4) == MAGIC
