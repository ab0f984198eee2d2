"""Binary state snapshots (format tag "BWM1").

Layout: magic bytes b"BWM1", little-endian u64 n, M, L, f64 time, then the
u samples (M^n * L f64, row-major) followed by the u_t samples. The box
length is not part of the format; readers supply it (default 2*pi).
"""

import struct

import numpy as np

from .dynamics import SimulationState
from .grid import TWO_PI, Grid, GridField

MAGIC = b"BWM1"
_HEADER = struct.Struct("<QQQd")


def write_snapshot(path, state):
    g = state.grid
    L = state.u.components
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(_HEADER.pack(g.dim, g.points_per_axis, L, state.time))
        fh.write(np.ascontiguousarray(state.u.values, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(state.ut.values, dtype="<f8").tobytes())


def read_snapshot(path, length=TWO_PI):
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MAGIC:
            raise ValueError(f"bad magic {magic!r}, expected {MAGIC!r}")
        n, m, L, time = _HEADER.unpack(fh.read(_HEADER.size))
        grid = Grid(int(n), int(m), length)
        count = grid.npoints * int(L)
        u = np.frombuffer(fh.read(8 * count), dtype="<f8").reshape(grid.shape + (int(L),))
        ut = np.frombuffer(fh.read(8 * count), dtype="<f8").reshape(grid.shape + (int(L),))
        trailing = fh.read(1)
        if trailing:
            raise ValueError("trailing bytes after snapshot payload")
    return SimulationState(u=GridField(grid, u), ut=GridField(grid, ut), time=time)
