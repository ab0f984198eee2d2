"""Kernel backend selection and shape-generic wrappers.

The compiled Cython core is used when available; BWM_PURE_PYTHON=1 forces
the numpy fallback. Wrappers accept arrays with any leading shape and a
trailing component axis of length L.
"""

import os

import numpy as np

from . import _kernels_py

if os.environ.get("BWM_PURE_PYTHON"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _kernels_py

USING_COMPILED = bool(getattr(_impl, "COMPILED", False))


def _rows(a):
    return np.ascontiguousarray(a, dtype=np.float64).reshape(-1, a.shape[-1])


def dot_last(a, b):
    """Pointwise <a, b> over the trailing axis."""
    return _impl.dot_rows(_rows(a), _rows(b)).reshape(a.shape[:-1])


def normalize_last(u):
    """u / |u| over the trailing axis."""
    return _impl.normalize_rows(_rows(u)).reshape(u.shape)


def sphere_tangent(u, v):
    """v - <u,v> u for unit u."""
    return _impl.sphere_tangent_rows(_rows(u), _rows(v)).reshape(v.shape)


def sphere_projector(u):
    """I - u u^T at each point of a unit field."""
    L = u.shape[-1]
    return _impl.sphere_projector_rows(_rows(u)).reshape(u.shape[:-1] + (L, L))


def jet_apply(dP, w, v):
    """Contract a projector-derivative jet: out_a = dP[a,b,c] v_b w_c.

    `w` is the (tangent) differentiation direction, `v` the vector the
    resulting matrix acts on.
    """
    L = v.shape[-1]
    dP2 = np.ascontiguousarray(dP, dtype=np.float64).reshape(-1, L, L, L)
    return _impl.jet_apply_rows(dP2, _rows(w), _rows(v)).reshape(v.shape)


def torus_projector(p, R, r):
    """Tangent projector field of a torus of revolution in R^3."""
    return _impl.torus_projector_rows(_rows(p), float(R), float(r)).reshape(
        p.shape[:-1] + (3, 3)
    )
