# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled sampling kernels; see ``_pykernels`` for the reference versions."""

import numpy as np


def repair_to_mean(double[:, ::1] v, double lo, double hi, double target):
    cdef Py_ssize_t b = v.shape[0], n = v.shape[1], r, i
    cdef double mean, d, lam
    for r in range(b):
        mean = 0.0
        for i in range(n):
            mean += v[r, i]
        mean /= n
        lam = 1.0
        for i in range(n):
            d = v[r, i] - mean
            if d > 0 and (hi - target) / d < lam:
                lam = (hi - target) / d
            elif d < 0 and (lo - target) / d < lam:
                lam = (lo - target) / d
        if lam < 0:
            lam = 0.0
        for i in range(n):
            v[r, i] = target + lam * (v[r, i] - mean)
    return np.asarray(v)


def cumulative_curve(double[:, ::1] cells, double ds, double g0, double delta_a, bint curvature):
    cdef Py_ssize_t b = cells.shape[0], n = cells.shape[1], r, i
    G_arr = np.empty((b, n + 1))
    F_arr = np.empty((b, n + 1))
    cdef double[:, ::1] G = G_arr
    cdef double[:, ::1] F = F_arr
    cdef double moment, f0, length = n * ds
    for r in range(b):
        G[r, 0] = g0
        if not curvature:
            for i in range(n):
                F[r, i] = cells[r, i]
                G[r, i + 1] = G[r, i] + cells[r, i] * ds
            F[r, n] = cells[r, n - 1]
            continue
        moment = 0.0
        for i in range(n):
            moment += cells[r, i] * (n - i - 0.5) * ds * ds
        f0 = (delta_a - moment) / length
        F[r, 0] = f0
        for i in range(n):
            F[r, i + 1] = F[r, i] + cells[r, i] * ds
            G[r, i + 1] = G[r, i] + F[r, i] * ds + 0.5 * cells[r, i] * ds * ds
    return G_arr, F_arr


def eval_uniform_piecewise(double[:, ::1] G, double[:, ::1] F, double[:, ::1] H,
                           double s0, double ds, double[::1] s):
    cdef Py_ssize_t b = H.shape[0], n = H.shape[1], m = s.shape[0], r, j, k
    out_arr = np.empty((b, m))
    cdef double[:, ::1] out = out_arr
    cdef double x
    cdef Py_ssize_t[::1] idx = np.empty(m, dtype=np.intp)
    cdef double[::1] off = np.empty(m)
    for j in range(m):
        k = <Py_ssize_t>((s[j] - s0) / ds)
        if k < 0:
            k = 0
        elif k > n - 1:
            k = n - 1
        idx[j] = k
        off[j] = s[j] - (s0 + k * ds)
    for r in range(b):
        for j in range(m):
            k = idx[j]
            x = off[j]
            out[r, j] = G[r, k] + F[r, k] * x + 0.5 * H[r, k] * x * x
    return out_arr
