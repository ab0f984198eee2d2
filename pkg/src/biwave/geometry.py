"""Embedded-manifold calculus: retraction, tangent projectors, projector jets.

Two targets are provided: the round sphere S^(L-1) in R^L with closed
forms for everything, and a torus of revolution in R^3 that exercises the
generic finite-difference path for projector derivatives. All operations
are vectorized over arbitrary leading axes of the point array.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import OffManifold, TubeExceeded

ON_MANIFOLD_TOL = 1e-8
JET_FD_STEP = 1e-5     # central differences for dP
JET_FD_STEP2 = 1e-4    # cross stencil for d2P


@dataclass
class ProjectorJet:
    """Tangent projector P plus derivatives of the projector family.

    dP has shape (..., L, L, L); contracting the last axis with a tangent
    direction w gives the matrix dP_p(w). d2P (order 2 only) has shape
    (..., L, L, L, L) with the two trailing axes taking tangent directions.
    """

    P: np.ndarray
    dP: np.ndarray = None
    d2P: np.ndarray = None


class Manifold:
    """Base class; subclasses fix ambient_dim, tube_radius and the geometry."""

    def constraint_residual(self, p):
        """Distance from p to the manifold; zero iff p lies on it."""
        raise NotImplementedError

    def project(self, p):
        """Global nearest-point projection; raises TubeExceeded only where
        the projection is genuinely ill-posed (e.g. the sphere's center)."""
        raise NotImplementedError

    def retract(self, p):
        """Nearest-point retraction restricted to the tube dist < tube_radius."""
        p = np.asarray(p, dtype=np.float64)
        dist = np.max(self.constraint_residual(p))
        if not np.isfinite(dist) or dist >= self.tube_radius:
            raise TubeExceeded(
                f"distance {dist:.3g} exceeds tube radius {self.tube_radius:.3g}"
            )
        return self.project(p)

    def _require_on_manifold(self, p):
        res = np.max(self.constraint_residual(p))
        if not res <= ON_MANIFOLD_TOL:
            raise OffManifold(f"constraint residual {res:.3g} > {ON_MANIFOLD_TOL:.0e}")

    def tangent_projector(self, p):
        raise NotImplementedError

    def projector_jet(self, p, order=1):
        """P and its derivatives along tangent coordinate directions.

        Generic path: dP[..., c] is the central difference of the projector
        along the curve project(p + h * P_p e_c); d2P uses the 4-point cross
        stencil through the projection. Subclasses may override with closed
        forms (the sphere does).
        """
        p = np.asarray(p, dtype=np.float64)
        self._require_on_manifold(p)
        P = self.tangent_projector(p)
        L = self.ambient_dim
        dP = np.empty(p.shape[:-1] + (L, L, L))
        h = JET_FD_STEP
        for c in range(L):
            tc = P[..., :, c]
            dP[..., c] = (
                self.tangent_projector(self.project(p + h * tc))
                - self.tangent_projector(self.project(p - h * tc))
            ) / (2 * h)
        if order == 1:
            return ProjectorJet(P=P, dP=dP)
        if order != 2:
            raise ValueError("order must be 1 or 2")
        d2P = np.empty(p.shape[:-1] + (L, L, L, L))
        h2 = JET_FD_STEP2
        for c in range(L):
            tc = P[..., :, c]
            for d in range(L):
                td = P[..., :, d]
                pp = self.tangent_projector(self.project(p + h2 * (tc + td)))
                pm = self.tangent_projector(self.project(p + h2 * (tc - td)))
                mp = self.tangent_projector(self.project(p - h2 * (tc - td)))
                mm = self.tangent_projector(self.project(p - h2 * (tc + td)))
                d2P[..., c, d] = (pp - pm - mp + mm) / (4 * h2 * h2)
        return ProjectorJet(P=P, dP=dP, d2P=d2P)

    def grid_projectors(self, points, with_jet=True):
        """(P, dP) fields for dynamics assembly; dP is None if with_jet=False."""
        jet = self.projector_jet(points, order=1) if with_jet else None
        if jet is not None:
            return jet.P, jet.dP
        return self.tangent_projector(points), None


class Sphere(Manifold):
    """Unit sphere S^(L-1) embedded in R^L."""

    def __init__(self, ambient_dim, tube_radius=0.5):
        if ambient_dim < 2:
            raise ValueError("ambient_dim must be >= 2")
        if not 0 < tube_radius < 1:
            raise ValueError("sphere tube_radius must lie in (0, 1)")
        self.ambient_dim = int(ambient_dim)
        self.tube_radius = float(tube_radius)

    def __repr__(self):
        return f"Sphere({self.ambient_dim})"

    @property
    def manifold_dim(self):
        return self.ambient_dim - 1

    def constraint_residual(self, p):
        p = np.asarray(p, dtype=np.float64)
        return np.abs(np.linalg.norm(p, axis=-1) - 1.0)

    def project(self, p):
        p = np.asarray(p, dtype=np.float64)
        norms = np.linalg.norm(p, axis=-1)
        if np.any(norms < 0.05):
            raise TubeExceeded("projection ill-posed near the sphere center")
        return kernels.normalize_last(p)

    def tangent_projector(self, p):
        p = np.asarray(p, dtype=np.float64)
        self._require_on_manifold(p)
        return kernels.sphere_projector(kernels.normalize_last(p))

    def projector_jet(self, p, order=1):
        p = np.asarray(p, dtype=np.float64)
        self._require_on_manifold(p)
        u = kernels.normalize_last(p)
        P = kernels.sphere_projector(u)
        L = self.ambient_dim
        eye = np.eye(L)
        # dP_p(w) v = -<p,v> w - <w,v> p, i.e. dP[a,b,c] = -delta_ac p_b - p_a delta_bc
        dP = -(
            np.einsum("ac,...b->...abc", eye, u) + np.einsum("...a,bc->...abc", u, eye)
        )
        if order == 1:
            return ProjectorJet(P=P, dP=dP)
        if order != 2:
            raise ValueError("order must be 1 or 2")
        # second derivative of the composite P(project(.)) along tangent pairs:
        # d2P(w, v) = -(w v^T + v w^T) + 2 <v,w> p p^T
        pair = np.einsum("ac,bd->abcd", eye, eye) + np.einsum("ad,bc->abcd", eye, eye)
        d2P = -np.broadcast_to(pair, u.shape[:-1] + (L, L, L, L)).copy()
        d2P += 2.0 * np.einsum("...a,...b,cd->...abcd", u, u, eye)
        return ProjectorJet(P=P, dP=dP, d2P=d2P)

    def random_point(self, rng, shape=()):
        v = rng.standard_normal(shape + (self.ambient_dim,))
        return kernels.normalize_last(v)


class TorusOfRevolution(Manifold):
    """Torus in R^3: circle of radius r_minor swept at distance R_major."""

    def __init__(self, R_major, r_minor, tube_radius=None):
        if not (R_major > r_minor > 0):
            raise ValueError("need R_major > r_minor > 0")
        self.R_major = float(R_major)
        self.r_minor = float(r_minor)
        self.ambient_dim = 3
        self.tube_radius = 0.4 * self.r_minor if tube_radius is None else float(tube_radius)
        if not 0 < self.tube_radius < self.r_minor:
            raise ValueError("torus tube_radius must lie in (0, r_minor)")

    def __repr__(self):
        return f"TorusOfRevolution({self.R_major}, {self.r_minor})"

    @property
    def manifold_dim(self):
        return 2

    def _tube_coords(self, p):
        p = np.asarray(p, dtype=np.float64)
        rho = np.hypot(p[..., 0], p[..., 1])
        dist_core = np.hypot(rho - self.R_major, p[..., 2])
        return rho, dist_core

    def constraint_residual(self, p):
        _, dist_core = self._tube_coords(p)
        return np.abs(dist_core - self.r_minor)

    def project(self, p):
        p = np.asarray(p, dtype=np.float64)
        rho, dist_core = self._tube_coords(p)
        # conditioning of the nearest-point map degrades like r/dist_core
        if np.any(rho < 0.05 * self.R_major):
            raise TubeExceeded("projection ill-posed near the symmetry axis")
        if np.any(dist_core < 0.05 * self.r_minor):
            raise TubeExceeded("projection ill-posed near the core circle")
        cx = self.R_major * p[..., 0] / rho
        cy = self.R_major * p[..., 1] / rho
        scale = self.r_minor / dist_core
        out = np.empty_like(p)
        out[..., 0] = cx + scale * (p[..., 0] - cx)
        out[..., 1] = cy + scale * (p[..., 1] - cy)
        out[..., 2] = scale * p[..., 2]
        return out

    def tangent_projector(self, p):
        p = np.asarray(p, dtype=np.float64)
        self._require_on_manifold(p)
        return kernels.torus_projector(p, self.R_major, self.r_minor)

    def random_point(self, rng, shape=()):
        theta = rng.uniform(0.0, 2 * np.pi, shape)
        phi = rng.uniform(0.0, 2 * np.pi, shape)
        rad = self.R_major + self.r_minor * np.cos(phi)
        return np.stack(
            [rad * np.cos(theta), rad * np.sin(theta), self.r_minor * np.sin(phi)],
            axis=-1,
        )


def make_manifold(kind, *params, tube_radius=None):
    """Factory used by config parsing: ('sphere', L) or ('torus', R, r)."""
    if kind == "sphere":
        (L,) = params
        return Sphere(int(L)) if tube_radius is None else Sphere(int(L), tube_radius)
    if kind == "torus":
        R, r = params
        return TorusOfRevolution(float(R), float(r), tube_radius=tube_radius)
    raise ValueError(f"unknown manifold kind {kind!r}")
