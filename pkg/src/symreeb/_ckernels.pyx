# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: Hamiltonian right-hand sides and the Gauss double sum.

Mirrors ``_pykernels.py``; formulas follow ``_hamiltonians.py``.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, M_PI

cnp.import_array()

DEF QUADRATIC = 0
DEF HENON_HEILES = 1
DEF HILL = 2
DEF PCR3BP = 3


cdef inline void _kepler(double dx, double dy, double w, double* hxx, double* hxy, double* hyy) nogil:
    cdef double r2 = dx * dx + dy * dy
    cdef double r = sqrt(r2)
    cdef double r3 = r2 * r
    cdef double r5 = r3 * r2
    hxx[0] += w * (1.0 / r3 - 3.0 * dx * dx / r5)
    hxy[0] += w * (-3.0 * dx * dy / r5)
    hyy[0] += w * (1.0 / r3 - 3.0 * dy * dy / r5)


cdef int _grad_hess(int kind, double* par, double* x, double* g, double* h, bint want_h) nogil:
    cdef double q1 = x[0], q2 = x[1], p1 = x[2], p2 = x[3]
    cdef double r, r3, s, s3, mu, hxx = 0.0, hxy = 0.0, hyy = 0.0
    cdef int i
    if want_h:
        for i in range(16):
            h[i] = 0.0
    if kind == QUADRATIC:
        g[0] = 2 * par[0] * q1
        g[1] = 2 * par[1] * q2
        g[2] = 2 * par[0] * p1
        g[3] = 2 * par[1] * p2
        if want_h:
            h[0] = 2 * par[0]
            h[5] = 2 * par[1]
            h[10] = 2 * par[0]
            h[15] = 2 * par[1]
        return 0
    if kind == HENON_HEILES:
        g[0] = q1 + 2 * q1 * q2
        g[1] = q2 + q1 * q1 - q2 * q2
        g[2] = p1
        g[3] = p2
        if want_h:
            h[0] = 1 + 2 * q2
            h[1] = 2 * q1
            h[4] = 2 * q1
            h[5] = 1 - 2 * q2
            h[10] = 1.0
            h[15] = 1.0
        return 0
    if kind == HILL:
        r = sqrt(q1 * q1 + q2 * q2)
        r3 = r * r * r
        g[0] = q1 / r3 + p2 - 2 * q1
        g[1] = q2 / r3 - p1 + q2
        g[2] = p1 - q2
        g[3] = p2 + q1
        if want_h:
            _kepler(q1, q2, 1.0, &hxx, &hxy, &hyy)
            h[0] = hxx - 2.0
            h[1] = hxy
            h[4] = hxy
            h[5] = hyy + 1.0
    elif kind == PCR3BP:
        mu = par[0]
        r = sqrt(q1 * q1 + q2 * q2)
        r3 = r * r * r
        s = sqrt((q1 - 1.0) * (q1 - 1.0) + q2 * q2)
        s3 = s * s * s
        g[0] = (1 - mu) * q1 / r3 + mu * (q1 - 1.0) / s3 + p2
        g[1] = (1 - mu) * q2 / r3 + mu * q2 / s3 - p1
        g[2] = p1 - q2
        g[3] = p2 + q1 - mu
        if want_h:
            _kepler(q1, q2, 1.0 - mu, &hxx, &hxy, &hyy)
            _kepler(q1 - 1.0, q2, mu, &hxx, &hxy, &hyy)
            h[0] = hxx
            h[1] = hxy
            h[4] = hxy
            h[5] = hyy
    else:
        return -1
    if want_h:
        h[10] = 1.0
        h[15] = 1.0
        h[3] = 1.0
        h[12] = 1.0
        h[6] = -1.0
        h[9] = -1.0
    return 0


cdef class VectorField:
    """Right-hand side ``y' = X_H(y)``, optionally with ``M' = DX_H M`` (row-major)."""

    cdef public int kind
    cdef public bint variational
    cdef double par[4]
    cdef object params_obj

    def __init__(self, kind, params, variational=False):
        cdef int i
        self.kind = int(kind)
        self.variational = bool(variational)
        arr = np.zeros(4)
        flat = np.asarray(params, dtype=float).ravel()
        arr[:len(flat)] = flat
        for i in range(4):
            self.par[i] = arr[i]
        self.params_obj = flat
        if self.kind < 0 or self.kind > 3:
            raise ValueError(f"unknown Hamiltonian kind {kind}")

    @property
    def params(self):
        return self.params_obj

    def __call__(self, t, y):
        cdef double[::1] yv = np.ascontiguousarray(y, dtype=float)
        cdef int n = 20 if self.variational else 4
        out = np.empty(n)
        cdef double[::1] ov = out
        cdef double g[4]
        cdef double h[16]
        cdef double a[16]
        cdef int i, j, k
        cdef double acc
        _grad_hess(self.kind, self.par, &yv[0], g, h, self.variational)
        ov[0] = -g[2]
        ov[1] = -g[3]
        ov[2] = g[0]
        ov[3] = g[1]
        if self.variational:
            for j in range(4):
                a[j] = -h[8 + j]
                a[4 + j] = -h[12 + j]
                a[8 + j] = h[j]
                a[12 + j] = h[4 + j]
            for i in range(4):
                for j in range(4):
                    acc = 0.0
                    for k in range(4):
                        acc += a[4 * i + k] * yv[4 + 4 * k + j]
                    ov[4 + 4 * i + j] = acc
        return out


def gauss_linking_sum(p, dp, q, dq):
    """Discrete Gauss integral ``sum_ij (p_i - q_j) . (dp_i x dq_j) / |p_i - q_j|^3 / 4pi``."""
    cdef double[:, ::1] P = np.ascontiguousarray(p, dtype=float)
    cdef double[:, ::1] DP = np.ascontiguousarray(dp, dtype=float)
    cdef double[:, ::1] Q = np.ascontiguousarray(q, dtype=float)
    cdef double[:, ::1] DQ = np.ascontiguousarray(dq, dtype=float)
    cdef Py_ssize_t n = P.shape[0], m = Q.shape[0], i, j
    cdef double total = 0.0, row, dx, dy, dz, cx, cy, cz, d2
    cdef double ax, ay, az, tx, ty, tz
    with nogil:
        for i in range(n):
            row = 0.0
            ax = P[i, 0]
            ay = P[i, 1]
            az = P[i, 2]
            tx = DP[i, 0]
            ty = DP[i, 1]
            tz = DP[i, 2]
            for j in range(m):
                dx = ax - Q[j, 0]
                dy = ay - Q[j, 1]
                dz = az - Q[j, 2]
                cx = ty * DQ[j, 2] - tz * DQ[j, 1]
                cy = tz * DQ[j, 0] - tx * DQ[j, 2]
                cz = tx * DQ[j, 1] - ty * DQ[j, 0]
                d2 = dx * dx + dy * dy + dz * dz
                row += (dx * cx + dy * cy + dz * cz) / (d2 * sqrt(d2))
            total += row
    return total / (4.0 * M_PI)


def min_pair_distance(p, q):
    """Smallest Euclidean distance between two point sets."""
    cdef double[:, ::1] P = np.ascontiguousarray(p, dtype=float)
    cdef double[:, ::1] Q = np.ascontiguousarray(q, dtype=float)
    cdef Py_ssize_t n = P.shape[0], m = Q.shape[0], d = P.shape[1], i, j, k
    cdef double best = 1e300, acc, diff
    with nogil:
        for i in range(n):
            for j in range(m):
                acc = 0.0
                for k in range(d):
                    diff = P[i, k] - Q[j, k]
                    acc += diff * diff
                if acc < best:
                    best = acc
    return sqrt(best)
