"""Initial data families: exact traveling waves, smooth bumps pushed onto
the target through the nearest-point projection, and seeded random
band-limited tangent data.

Construction uses the manifold's global projection (well-posed everywhere
except genuine singularities such as the sphere's center or the torus
core circle); the tube-radius check only constrains the evolution, where
per-step drift is small.
"""

import numpy as np

from .dynamics import SimulationState
from .errors import ValidationError
from .grid import GridField
from .kernels import dot_last


def _default_base(manifold):
    from .geometry import Sphere

    if isinstance(manifold, Sphere):
        p = np.zeros(manifold.ambient_dim)
        p[-1] = 1.0
        return p
    return np.array([manifold.R_major + manifold.r_minor, 0.0, 0.0])


def _tangent_at(manifold, p, direction):
    P = manifold.tangent_projector(p)
    t = P @ direction
    norm = np.linalg.norm(t)
    if norm < 1e-12:
        raise ValidationError("direction", "direction is normal to the manifold at base point")
    return t / norm


def _periodic_bump(grid, width):
    """Smooth periodic bump centered in the box, ~Gaussian of the given width."""
    mesh = grid.meshgrid()
    ell = grid.length
    d_sq = 0.0
    for x in mesh:
        d = (ell / np.pi) * np.sin(np.pi * (x - 0.5 * ell) / ell)
        d_sq = d_sq + d * d
    return np.exp(-d_sq / (2.0 * width**2))


def traveling_wave_state(grid, manifold, k, omega, axes=(0, 1), t=0.0):
    """Equator wave u = cos(omega t + k x) e_a + sin(omega t + k x) e_b.

    An exact solution for every (k, omega): the full nonlinearity reduces
    to (k^4 - omega^2) u, which is normal to the sphere.
    """
    L = manifold.ambient_dim
    a, b = axes
    x = grid.meshgrid()[0]
    phase = omega * t + k * x
    u = np.zeros(grid.shape + (L,))
    ut = np.zeros_like(u)
    u[..., a] = np.cos(phase)
    u[..., b] = np.sin(phase)
    ut[..., a] = -omega * np.sin(phase)
    ut[..., b] = omega * np.cos(phase)
    return SimulationState(GridField(grid, u), GridField(grid, ut), time=t)


def bump_state(grid, manifold, amplitude, width, velocity=0.0, base=None, direction=None):
    """u0 = project(p + A phi(x) e) for a tangent direction e at p."""
    p = _default_base(manifold) if base is None else manifold.project(np.asarray(base, dtype=float))
    L = manifold.ambient_dim
    if direction is None:
        # first coordinate axis with a usable tangent component at p
        P = manifold.tangent_projector(p)
        col = next(c for c in range(L) if np.linalg.norm(P[:, c]) > 0.1)
        direction = np.zeros(L)
        direction[col] = 1.0
    e = _tangent_at(manifold, p, np.asarray(direction, dtype=float))
    phi = _periodic_bump(grid, width)
    u = manifold.project(p + amplitude * phi[..., None] * e)
    if velocity != 0.0:
        P = manifold.tangent_projector(u)
        ut = velocity * phi[..., None] * np.einsum("...ab,b->...a", P, e)
    else:
        ut = np.zeros_like(u)
    return SimulationState(GridField(grid, u), GridField(grid, ut))


def _random_bandlimited_field(grid, L, k_max, rng):
    """Real band-limited field with unit-scale random mode coefficients."""
    w = np.zeros(grid.shape + (L,))
    if grid.dim == 1:
        x = grid.meshgrid()[0]
        base = 2 * np.pi / grid.length
        for k in range(1, k_max + 1):
            w += np.cos(k * base * x)[..., None] * rng.standard_normal(L)
            w += np.sin(k * base * x)[..., None] * rng.standard_normal(L)
    else:
        x, y = grid.meshgrid()
        base = 2 * np.pi / grid.length
        for kx in range(0, k_max + 1):
            for ky in range(-k_max, k_max + 1):
                if kx == 0 and ky <= 0:
                    continue
                phase = base * (kx * x + ky * y)
                w += np.cos(phase)[..., None] * rng.standard_normal(L)
                w += np.sin(phase)[..., None] * rng.standard_normal(L)
    return w


def random_bandlimited_state(grid, manifold, k_max, amplitude, seed, vel_amplitude=None):
    """Random tangent Fourier data pushed onto the manifold; deterministic per seed."""
    rng = np.random.default_rng(seed)
    L = manifold.ambient_dim
    p = _default_base(manifold)
    w = _random_bandlimited_field(grid, L, k_max, rng)
    P = manifold.tangent_projector(p)
    wt = np.einsum("ab,...b->...a", P, w)
    sup = np.sqrt(dot_last(wt, wt)).max()
    if sup > 0 and amplitude > 0:
        wt *= amplitude / sup
    u = manifold.project(p + wt)

    v = _random_bandlimited_field(grid, L, k_max, rng)
    Pu = manifold.tangent_projector(u)
    vt = np.einsum("...ab,...b->...a", Pu, v)
    sup = np.sqrt(dot_last(vt, vt)).max()
    va = amplitude if vel_amplitude is None else vel_amplitude
    if sup > 0 and va > 0:
        vt *= va / sup
    else:
        vt = np.zeros_like(vt)
    return SimulationState(GridField(grid, u), GridField(grid, vt))


def make_initial(cfg):
    """Build the configured initial state; satisfies the tangency constraints
    to ~1e-10 by construction and is bit-deterministic given the seed."""
    g = cfg.grid
    fam = cfg.initial.family
    p = cfg.initial.params
    if fam == "traveling_wave":
        state = traveling_wave_state(g, cfg.manifold, p["k"], p["omega"], p["axes"])
    elif fam == "bump":
        state = bump_state(
            g,
            cfg.manifold,
            p["amplitude"],
            p["width"],
            velocity=p.get("velocity", 0.0),
            base=p.get("base"),
            direction=p.get("direction"),
        )
    else:
        state = random_bandlimited_state(
            g, cfg.manifold, p["k_max"], p["amplitude"], cfg.seed, p.get("vel_amplitude")
        )
    return state.validate(cfg.manifold, tol_constraint=1e-10, tol_tangent=1e-10)
