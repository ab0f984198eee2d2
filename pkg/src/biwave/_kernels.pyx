# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled pointwise kernels; mirrors biwave._kernels_py exactly."""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()

COMPILED = True


def dot_rows(const double[:, ::1] a, const double[:, ::1] b):
    cdef Py_ssize_t n = a.shape[0], L = a.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n)
    cdef double[::1] o = out
    cdef Py_ssize_t p, l
    cdef double s
    with nogil:
        for p in range(n):
            s = 0.0
            for l in range(L):
                s += a[p, l] * b[p, l]
            o[p] = s
    return out


def normalize_rows(const double[:, ::1] u):
    cdef Py_ssize_t n = u.shape[0], L = u.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((n, L))
    cdef double[:, ::1] o = out
    cdef Py_ssize_t p, l
    cdef double s
    with nogil:
        for p in range(n):
            s = 0.0
            for l in range(L):
                s += u[p, l] * u[p, l]
            s = sqrt(s)
            for l in range(L):
                o[p, l] = u[p, l] / s
    return out


def sphere_tangent_rows(const double[:, ::1] u, const double[:, ::1] v):
    cdef Py_ssize_t n = u.shape[0], L = u.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((n, L))
    cdef double[:, ::1] o = out
    cdef Py_ssize_t p, l
    cdef double s
    with nogil:
        for p in range(n):
            s = 0.0
            for l in range(L):
                s += u[p, l] * v[p, l]
            for l in range(L):
                o[p, l] = v[p, l] - s * u[p, l]
    return out


def sphere_projector_rows(const double[:, ::1] u):
    cdef Py_ssize_t n = u.shape[0], L = u.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=3] out = np.empty((n, L, L))
    cdef double[:, :, ::1] o = out
    cdef Py_ssize_t p, a, b
    with nogil:
        for p in range(n):
            for a in range(L):
                for b in range(L):
                    o[p, a, b] = (1.0 if a == b else 0.0) - u[p, a] * u[p, b]
    return out


def jet_apply_rows(const double[:, :, :, ::1] dP, const double[:, ::1] w, const double[:, ::1] v):
    cdef Py_ssize_t n = dP.shape[0], L = dP.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.zeros((n, L))
    cdef double[:, ::1] o = out
    cdef Py_ssize_t p, a, b, c
    cdef double s
    with nogil:
        for p in range(n):
            for a in range(L):
                s = 0.0
                for b in range(L):
                    for c in range(L):
                        s += dP[p, a, b, c] * v[p, b] * w[p, c]
                o[p, a] = s
    return out


def torus_projector_rows(const double[:, ::1] p, double R, double r):
    cdef Py_ssize_t n = p.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=3] out = np.empty((n, 3, 3))
    cdef double[:, :, ::1] o = out
    cdef double x, y, z, rho, dr, dn, n0, n1, n2
    cdef Py_ssize_t q, a, b
    cdef double[3] nu
    with nogil:
        for q in range(n):
            x = p[q, 0]; y = p[q, 1]; z = p[q, 2]
            rho = sqrt(x * x + y * y)
            dr = rho - R
            dn = sqrt(dr * dr + z * z)
            nu[0] = dr / dn * x / rho
            nu[1] = dr / dn * y / rho
            nu[2] = z / dn
            for a in range(3):
                for b in range(3):
                    o[q, a, b] = (1.0 if a == b else 0.0) - nu[a] * nu[b]
    return out
