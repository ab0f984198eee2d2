import numpy as np
import pytest

from biwave.dynamics import SimulationState
from biwave.grid import Grid, GridField


def traveling_wave(grid, k, omega, t=0.0, L=2, axes=(0, 1)):
    """Exact equator-wave state used as oracle throughout the suite."""
    x = grid.meshgrid()[0]
    phase = omega * t + k * x
    u = np.zeros(grid.shape + (L,))
    ut = np.zeros_like(u)
    a, b = axes
    u[..., a] = np.cos(phase)
    u[..., b] = np.sin(phase)
    ut[..., a] = -omega * np.sin(phase)
    ut[..., b] = omega * np.cos(phase)
    return SimulationState(GridField(grid, u), GridField(grid, ut), time=t)


def random_tangent_state(grid, manifold, k_max, amplitude, rng):
    """Band-limited tangent data pushed onto the manifold; amplitude controls
    how fast the projected field's spectrum decays past k_max."""
    L = manifold.ambient_dim
    base = np.zeros(L)
    base[-1] = 1.0
    w = np.zeros(grid.shape + (L,))
    if grid.dim == 1:
        x = grid.meshgrid()[0]
        for k in range(1, k_max + 1):
            w += np.cos(k * x)[..., None] * rng.standard_normal(L)
            w += np.sin(k * x)[..., None] * rng.standard_normal(L)
    else:
        x, y = grid.meshgrid()
        for kx in range(0, k_max + 1):
            for ky in range(-k_max, k_max + 1):
                if kx == 0 and ky <= 0:
                    continue
                w += np.cos(kx * x + ky * y)[..., None] * rng.standard_normal(L)
                w += np.sin(kx * x + ky * y)[..., None] * rng.standard_normal(L)
    P = manifold.tangent_projector(base)
    wt = np.einsum("ab,...b->...a", P, w)
    wt *= amplitude / np.sqrt((wt**2).sum(-1)).max()
    u = manifold.project(base + wt)
    v = rng.standard_normal(grid.shape + (L,))
    Pu = manifold.tangent_projector(u)
    vt = np.einsum("...ab,...b->...a", Pu, v)
    vt *= amplitude / max(np.sqrt((vt**2).sum(-1)).max(), 1e-300)
    return SimulationState(GridField(grid, u), GridField(grid, vt))


@pytest.fixture
def rng():
    return np.random.default_rng(20240613)


@pytest.fixture
def grid1d():
    return Grid(1, 32)


@pytest.fixture
def grid2d():
    return Grid(2, 32)
