"""Bit-exact binary snapshot format (TXCS) and series I/O.

Layout, all little-endian:

    bytes 0..3    magic "TXCS"
    u32           format version (currently 1)
    u32           nx
    u32           ny
    f64           dx
    f64           dy
    f64           t
    4 blocks of   nx*ny f64, row-major (index j*nx + i), field order
                  u, v, w, z

dx and dy are stored (not the domain lengths) so a write/read round
trip reproduces the grid spec bit for bit.
"""

from __future__ import annotations

import hashlib
import struct
from pathlib import Path

import numpy as np

from .errors import SnapshotFormatError
from .grid import Field, GridSpec, State

MAGIC = b"TXCS"
VERSION = 1
_HEADER = struct.Struct("<4sIIIddd")


def write_snapshot(state: State, path) -> None:
    g = state.grid
    header = _HEADER.pack(MAGIC, VERSION, g.nx, g.ny, g.dx, g.dy, state.t)
    with open(path, "wb") as fh:
        fh.write(header)
        for fld in (state.u, state.v, state.w, state.z):
            fh.write(np.ascontiguousarray(fld.values, dtype="<f8").tobytes())


def read_snapshot(path) -> State:
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise SnapshotFormatError(f"cannot read snapshot {path}: {exc}") from exc
    if len(raw) < _HEADER.size:
        raise SnapshotFormatError(f"{path}: truncated header ({len(raw)} bytes)")
    magic, version, nx, ny, dx, dy, t = _HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise SnapshotFormatError(f"{path}: wrong magic {magic!r}")
    if version != VERSION:
        raise SnapshotFormatError(f"{path}: unsupported format version {version}")
    if nx == 0 or ny == 0 or dx <= 0 or dy <= 0:
        raise SnapshotFormatError(f"{path}: invalid grid header nx={nx} ny={ny} dx={dx} dy={dy}")
    n = nx * ny
    expected = _HEADER.size + 4 * 8 * n
    if len(raw) != expected:
        raise SnapshotFormatError(
            f"{path}: payload shape mismatch (got {len(raw)} bytes, need {expected})"
        )
    grid = GridSpec(nx=nx, ny=ny, dx=dx, dy=dy)
    fields = []
    off = _HEADER.size
    for _ in range(4):
        block = np.frombuffer(raw, dtype="<f8", count=n, offset=off).reshape(ny, nx)
        fields.append(Field(block.copy(), grid))
        off += 8 * n
    return State(*fields, t=t)


def payload_sha256(state: State) -> str:
    """SHA-256 over the four field blocks (little-endian bytes, u,v,w,z order).

    A language-independent fingerprint of the parsed arrays; any
    conforming reader of the format reproduces it.
    """
    h = hashlib.sha256()
    for fld in (state.u, state.v, state.w, state.z):
        h.update(np.ascontiguousarray(fld.values, dtype="<f8").tobytes())
    return h.hexdigest()


def snapshot_name(index: int) -> str:
    return f"snapshot_{index:06d}.txcs"


def load_series(directory) -> list[State]:
    """Read every *.txcs in a directory, ordered, with series validation.

    All snapshots must share one grid and have strictly increasing times.
    """
    paths = sorted(Path(directory).glob("*.txcs"))
    if not paths:
        raise SnapshotFormatError(f"no snapshots found in {directory}")
    states = [read_snapshot(p) for p in paths]
    grid = states[0].grid
    for p, s in zip(paths[1:], states[1:]):
        if s.grid != grid:
            raise SnapshotFormatError(f"{p}: grid differs from the first snapshot")
    times = [s.t for s in states]
    if any(t1 <= t0 for t0, t1 in zip(times, times[1:])):
        raise SnapshotFormatError(f"snapshot times not strictly increasing in {directory}")
    return states
