"""Periodic grids in 1 and 2 space dimensions and spectral operators.

Fields carry R^L-valued samples; derivatives, Sobolev norms and
dealiasing all act through Fourier multipliers with a unitary-Parseval
normalization: sobolev_norm(f, 0) equals the quadrature L^2 norm.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import GridMismatch, NonFinite

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class Grid:
    """Periodic box [0, length)^dim sampled with points_per_axis points per axis."""

    dim: int
    points_per_axis: int
    length: float = TWO_PI

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError("dim must be 1 or 2")
        m = self.points_per_axis
        if m < 8 or m % 2 != 0:
            raise ValueError("points_per_axis must be even and >= 8")
        if not self.length > 0:
            raise ValueError("length must be positive")

    @property
    def shape(self):
        return (self.points_per_axis,) * self.dim

    @property
    def npoints(self):
        return self.points_per_axis**self.dim

    @property
    def cell_volume(self):
        return (self.length / self.points_per_axis) ** self.dim

    def axes(self):
        """Sample coordinates along one axis."""
        m = self.points_per_axis
        return np.arange(m) * (self.length / m)

    def meshgrid(self):
        xs = [self.axes()] * self.dim
        return np.meshgrid(*xs, indexing="ij")


@lru_cache(maxsize=32)
def _spectral(dim, m, length):
    """Cached wavenumber arrays for a grid signature.

    Returns (k_axes, k_sq, mode_index_axes) where k carries the physical
    2*pi/length factor and mode indices are the integers -m/2..m/2-1.
    """
    idx = np.fft.fftfreq(m, d=1.0 / m)  # integer mode indices
    k1 = idx * (TWO_PI / length)
    if dim == 1:
        k_axes = (k1.reshape(m, 1),)
        modes = (idx.reshape(m, 1),)
    else:
        k_axes = (k1.reshape(m, 1, 1), k1.reshape(1, m, 1))
        modes = (idx.reshape(m, 1, 1), idx.reshape(1, m, 1))
    k_sq = sum(k**2 for k in k_axes)
    return k_axes, k_sq, modes


def _k_axes(grid):
    return _spectral(grid.dim, grid.points_per_axis, grid.length)[0]


def _k_sq(grid):
    return _spectral(grid.dim, grid.points_per_axis, grid.length)[1]


def _mode_axes(grid):
    return _spectral(grid.dim, grid.points_per_axis, grid.length)[2]


class GridField:
    """R^L-valued samples on a Grid; values shape is grid.shape + (L,).

    Values are treated as immutable once constructed (the array is marked
    read-only); operators always allocate fresh output.
    """

    __slots__ = ("grid", "values")

    def __init__(self, grid, values, copy=True):
        values = np.asarray(values, dtype=np.float64)
        if values.shape[:-1] != grid.shape:
            raise ValueError(f"values shape {values.shape} incompatible with grid {grid.shape}")
        if copy or values.flags.writeable:
            values = values.copy()
        values.flags.writeable = False
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    def __setattr__(self, name, value):
        raise AttributeError("GridField is immutable")

    @property
    def components(self):
        return self.values.shape[-1]

    @classmethod
    def zeros(cls, grid, components):
        return cls(grid, np.zeros(grid.shape + (components,)), copy=False)

    @classmethod
    def from_function(cls, grid, components, fn):
        """Sample fn(*coords) -> array broadcastable to grid.shape + (components,)."""
        mesh = grid.meshgrid()
        vals = np.asarray(fn(*mesh), dtype=np.float64)
        out = np.empty(grid.shape + (components,))
        out[...] = vals
        return cls(grid, out, copy=False)

    def check_same_grid(self, other):
        if self.grid != other.grid:
            raise GridMismatch(f"{self.grid} vs {other.grid}")

    def __add__(self, other):
        self.check_same_grid(other)
        return GridField(self.grid, self.values + other.values, copy=False)

    def __sub__(self, other):
        self.check_same_grid(other)
        return GridField(self.grid, self.values - other.values, copy=False)

    def __mul__(self, scalar):
        return GridField(self.grid, self.values * scalar, copy=False)

    __rmul__ = __mul__

    def require_finite(self):
        if not np.isfinite(self.values).all():
            raise NonFinite("field contains NaN/Inf")
        return self


def _spatial_axes(grid):
    return tuple(range(grid.dim))


def fft_field(f):
    """Forward FFT over the spatial axes (component axis untouched)."""
    return np.fft.fftn(f.values, axes=_spatial_axes(f.grid))


def ifft_field(grid, spec):
    vals = np.fft.ifftn(spec, axes=_spatial_axes(grid)).real
    return GridField(grid, vals, copy=False)


def gradient(f):
    """Spectral first derivatives; returns one GridField per axis."""
    spec = fft_field(f)
    out = []
    for k in _k_axes(f.grid):
        out.append(ifft_field(f.grid, (1j * k) * spec))
    return out


def _multiplier_field(f, mult):
    return ifft_field(f.grid, mult * fft_field(f))


def laplacian(f):
    return _multiplier_field(f, -_k_sq(f.grid))


def bilaplacian(f):
    return _multiplier_field(f, _k_sq(f.grid) ** 2)


def divergence(fields):
    """Spectral divergence of a per-axis stack (inverse of gradient's layout)."""
    grid = fields[0].grid
    ks = _k_axes(grid)
    acc = None
    for k, f in zip(ks, fields):
        term = (1j * k) * fft_field(f)
        acc = term if acc is None else acc + term
    return ifft_field(grid, acc)


def dealias(f, fraction):
    """Zero modes with |k_i| >= fraction * M/2 on any axis; fraction 1 is identity."""
    if not 0.0 < fraction <= 1.0:
        raise ValueError("fraction must be in (0, 1]")
    if fraction == 1.0:
        return f
    cutoff = fraction * f.grid.points_per_axis / 2.0
    spec = fft_field(f)
    for modes in _mode_axes(f.grid):
        spec = np.where(np.abs(modes) >= cutoff, 0.0, spec)
    return ifft_field(f.grid, spec)


def quadrature(values, grid):
    """Box integral of a pointwise scalar array of shape grid.shape."""
    return float(np.sum(values) * grid.cell_volume)


def pointwise_norm(f):
    """Euclidean magnitude over components at every grid point."""
    from .kernels import dot_last

    return np.sqrt(dot_last(f.values, f.values))


def lebesgue_norm(f, p):
    """L^p norm (p in {2, 4, inf}) of the pointwise Euclidean magnitude."""
    f.require_finite()
    mag = pointwise_norm(f)
    if p == 2:
        return float(np.sqrt(quadrature(mag**2, f.grid)))
    if p == 4:
        return float(quadrature(mag**4, f.grid) ** 0.25)
    if p in (np.inf, "inf"):
        return float(mag.max())
    raise ValueError("p must be 2, 4 or inf")


def _spectral_l2(f, weight):
    """sqrt(sum_k weight(k) |f_hat_k|^2) in the Parseval normalization."""
    spec = fft_field(f)
    power = np.sum(np.abs(spec) ** 2, axis=-1)
    scale = f.grid.length**f.grid.dim / f.grid.npoints**2
    return float(np.sqrt(np.sum(weight * power) * scale))


def sobolev_norm(f, s):
    """H^s norm: (sum_k (1+|k|^2)^s |f_hat|^2)^(1/2); s=0 matches lebesgue_norm(f,2)."""
    if not (isinstance(s, (int, np.integer)) and 0 <= s <= 4):
        raise ValueError("s must be an integer in [0, 4]")
    f.require_finite()
    ksq = _k_sq(f.grid).squeeze(-1)
    return _spectral_l2(f, (1.0 + ksq) ** s)


def homogeneous_norm(f, order):
    """L^2 norm of the full order-th derivative stack: |k|^(2*order) weight."""
    f.require_finite()
    ksq = _k_sq(f.grid).squeeze(-1)
    return _spectral_l2(f, ksq**order)


def stack_fields(fields):
    """Concatenate the component axes of same-grid fields (e.g. a gradient
    stack) so Lebesgue norms see the full pointwise Frobenius magnitude."""
    g = fields[0].grid
    for f in fields[1:]:
        fields[0].check_same_grid(f)
    return GridField(g, np.concatenate([f.values for f in fields], axis=-1), copy=False)


def hessian_fields(f):
    """All second derivatives d_i d_j f (n^2 fields, both off-diagonal copies)."""
    spec = fft_field(f)
    ks = _k_axes(f.grid)
    out = []
    for ki in ks:
        for kj in ks:
            out.append(ifft_field(f.grid, -(ki * kj) * spec))
    return out
