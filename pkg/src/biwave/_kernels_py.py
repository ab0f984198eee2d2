"""Pure-numpy implementations of the pointwise hot kernels.

All functions take 2-D (npoints, L) views (the grid flattened); the
shape-generic wrappers live in `biwave.kernels`. The compiled extension
`biwave._kernels` provides the same functions with identical semantics.
"""

import numpy as np

COMPILED = False


def dot_rows(a, b):
    return np.einsum("pl,pl->p", a, b)


def normalize_rows(u):
    return u / np.linalg.norm(u, axis=1)[:, None]


def sphere_tangent_rows(u, v):
    # v - <u,v> u with u assumed unit
    return v - dot_rows(u, v)[:, None] * u


def sphere_projector_rows(u):
    n, L = u.shape
    out = np.broadcast_to(np.eye(L), (n, L, L)) - u[:, :, None] * u[:, None, :]
    return np.ascontiguousarray(out)


def jet_apply_rows(dP, w, v):
    # out[p,a] = sum_{b,c} dP[p,a,b,c] v[p,b] w[p,c]
    return np.einsum("pabc,pb,pc->pa", dP, v, w)


def torus_projector_rows(p, R, r):
    x, y, z = p[:, 0], p[:, 1], p[:, 2]
    rho = np.hypot(x, y)
    dr = rho - R
    dn = np.hypot(dr, z)
    # unit normal nu = ((rho-R)/dn * (x,y)/rho, z/dn)
    nu = np.empty_like(p)
    nu[:, 0] = dr / dn * x / rho
    nu[:, 1] = dr / dn * y / rho
    nu[:, 2] = z / dn
    n = p.shape[0]
    out = np.broadcast_to(np.eye(3), (n, 3, 3)) - nu[:, :, None] * nu[:, None, :]
    return np.ascontiguousarray(out)
