"""Time integration: Strang splitting with the exact free biharmonic
propagator, and a classical RK4 reference scheme, both with optional
pointwise constraint re-enforcement."""

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from . import grid as sg
from .dynamics import SimulationState, acceleration, rhs_projector, rhs_sphere, tangent_enforce
from .errors import DiscreteBlowup, NonFinite, TubeExceeded, ValidationError
from .geometry import Sphere

RK4_CFL = 0.4


@dataclass(frozen=True)
class SchemeConfig:
    scheme: str = "strang"  # "strang" | "rk4proj"
    dt: float = 1e-3
    reproject_every: int = 1
    dealias_fraction: float = 2.0 / 3.0

    def __post_init__(self):
        if self.scheme not in ("strang", "rk4proj"):
            raise ValidationError("scheme", f"unknown scheme {self.scheme!r}")
        if not self.dt > 0:
            raise ValidationError("dt", "must be positive")
        if self.reproject_every < 0:
            raise ValidationError("reproject_every", "must be >= 0")
        if not 0 < self.dealias_fraction <= 1:
            raise ValidationError("dealias_fraction", "must lie in (0, 1]")

    def validate_for_grid(self, grid):
        k_max = (2 * math.pi / grid.length) * (grid.points_per_axis / 2)
        if self.scheme == "strang":
            if self.dt * k_max**2 > math.pi * (1 + 1e-12):
                raise ValidationError(
                    "dt", f"strang accuracy bound dt*k_max^2 <= pi violated (got {self.dt * k_max**2:.3g})"
                )
        else:
            dx = grid.length / grid.points_per_axis
            if self.dt > RK4_CFL * dx**2 * (1 + 1e-12):
                raise ValidationError(
                    "dt", f"rk4proj needs dt <= {RK4_CFL}*(l/M)^2 = {RK4_CFL * dx ** 2:.3g}"
                )


@lru_cache(maxsize=64)
def _propagator_tables(dim, m, length, tau):
    """cos / sin multipliers of the exact flow of u_tt + lap^2 u = 0."""
    ksq = sg._spectral(dim, m, length)[1]
    phase = ksq * tau
    c = np.cos(phase)
    s = np.sin(phase)
    with np.errstate(divide="ignore", invalid="ignore"):
        sinc = np.where(ksq > 0, s / np.where(ksq > 0, ksq, 1.0), tau)
    return c, sinc, -ksq * s


def free_propagator(s, tau):
    """Exact per-mode rotation: u_hat -> cos(|k|^2 tau) u_hat + sin(|k|^2 tau)/|k|^2 ut_hat,
    ut_hat -> -|k|^2 sin(|k|^2 tau) u_hat + cos(|k|^2 tau) ut_hat (k=0: linear drift)."""
    if tau == 0.0:
        return s
    g = s.grid
    c, sinc, msin = _propagator_tables(g.dim, g.points_per_axis, g.length, float(tau))
    uh = sg.fft_field(s.u)
    vh = sg.fft_field(s.ut)
    u_new = sg.ifft_field(g, c * uh + sinc * vh)
    v_new = sg.ifft_field(g, msin * uh + c * vh)
    return SimulationState(u=u_new, ut=v_new, time=s.time + tau)


def _rhs(m, s, fraction):
    if isinstance(m, Sphere):
        return rhs_sphere(s, fraction)
    return rhs_projector(m, s, fraction)


def strang_step(m, s, dt, dealias_fraction=2.0 / 3.0, reproject=True):
    """Half kick, exact free flight, half kick; optional re-enforcement."""
    half = 0.5 * dt
    ut1 = s.ut + half * _rhs(m, s, dealias_fraction)
    s1 = free_propagator(replace(s, ut=ut1), dt)
    ut2 = s1.ut + half * _rhs(m, s1, dealias_fraction)
    s2 = replace(s1, ut=ut2)
    if reproject:
        s2 = tangent_enforce(m, s2)
    return s2


def rk4_step(m, s, dt, dealias_fraction=2.0 / 3.0, reproject=True):
    """Classical four-stage step on the first-order system (u, u_t)."""

    def deriv(u, ut):
        st = SimulationState(u=u, ut=ut, time=s.time)
        return ut, acceleration(m, st, dealias_fraction)

    k1u, k1v = deriv(s.u, s.ut)
    k2u, k2v = deriv(s.u + (dt / 2) * k1u, s.ut + (dt / 2) * k1v)
    k3u, k3v = deriv(s.u + (dt / 2) * k2u, s.ut + (dt / 2) * k2v)
    k4u, k4v = deriv(s.u + dt * k3u, s.ut + dt * k3v)
    u_new = s.u + (dt / 6) * (k1u + 2 * k2u + 2 * k3u + k4u)
    v_new = s.ut + (dt / 6) * (k1v + 2 * k2v + 2 * k3v + k4v)
    s2 = SimulationState(u=u_new, ut=v_new, time=s.time + dt)
    if reproject:
        s2 = tangent_enforce(m, s2)
    return s2


def step(m, s, c, step_index=0):
    """One step of the configured scheme; reprojection follows reproject_every."""
    c.validate_for_grid(s.grid)
    reproject = c.reproject_every > 0 and (step_index + 1) % c.reproject_every == 0
    fn = strang_step if c.scheme == "strang" else rk4_step
    try:
        return fn(m, s, c.dt, c.dealias_fraction, reproject)
    except (TubeExceeded, NonFinite) as exc:
        raise DiscreteBlowup(s.time + c.dt, cause=exc) from exc


def evolve(m, s0, c, t_end, observer=None, observe_every=None):
    """Step from s0 to t_end (last step shortened to land exactly).

    The observer, if given, receives the initial state, every state whose
    time crosses a multiple of observe_every, and the final state.
    """
    if t_end < s0.time:
        raise ValueError("t_end must be >= initial time")
    c.validate_for_grid(s0.grid)
    s = s0
    eps = 1e-9 * max(c.dt, 1e-30)
    if observer is not None:
        observer(s)
    last_emit = s.time
    next_due = s.time + (observe_every if observe_every else math.inf)
    fn = strang_step if c.scheme == "strang" else rk4_step
    index = 0
    while t_end - s.time > eps:
        dt_step = min(c.dt, t_end - s.time)
        reproject = c.reproject_every > 0 and (index + 1) % c.reproject_every == 0
        try:
            s = fn(m, s, dt_step, c.dealias_fraction, reproject)
        except (TubeExceeded, NonFinite) as exc:
            raise DiscreteBlowup(s.time + dt_step, cause=exc) from exc
        if t_end - s.time <= eps:
            s = replace(s, time=t_end)
        index += 1
        if observer is not None and s.time + eps >= next_due:
            observer(s)
            last_emit = s.time
            while next_due <= s.time + eps:
                next_due += observe_every
    if observer is not None and last_emit < s.time - eps:
        observer(s)
    return s
