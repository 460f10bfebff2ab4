# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the kernels in ``_pykernels``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs

cnp.import_array()

BACKEND = "cython"


def block_sum(x, labels, Py_ssize_t m):
    cdef const double[:, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef const Py_ssize_t[::1] lab = np.ascontiguousarray(labels, dtype=np.intp)
    cdef Py_ssize_t rows = xv.shape[0], cols = xv.shape[1], r, j
    out = np.zeros((rows, m), dtype=np.float64)
    cdef double[:, ::1] ov = out
    with nogil:
        for r in range(rows):
            for j in range(cols):
                ov[r, lab[j]] += xv[r, j]
    return out


def stick_aggregate(v, cells, Py_ssize_t n):
    cdef const double[:, ::1] vv = np.ascontiguousarray(v, dtype=np.float64)
    cdef const Py_ssize_t[:, ::1] cv = np.ascontiguousarray(cells, dtype=np.intp)
    cdef Py_ssize_t rows = vv.shape[0], k = vv.shape[1], r, j
    cdef double rem
    out = np.zeros((rows, n), dtype=np.float64)
    cdef double[:, ::1] ov = out
    with nogil:
        for r in range(rows):
            ov[r, cv[r, 0]] += vv[r, 0]
            rem = 1.0 - vv[r, 0]
            for j in range(1, k):
                ov[r, cv[r, j]] += vv[r, j] * rem
                rem = rem * (1.0 - vv[r, j])
            ov[r, cv[r, k]] += rem
    return out


def ig_two_root(mu, lam, nu, u):
    mu_b, lam_b, nu_b, u_b = np.broadcast_arrays(
        np.asarray(mu, dtype=np.float64), np.asarray(lam, dtype=np.float64),
        np.asarray(nu, dtype=np.float64), np.asarray(u, dtype=np.float64))
    shape = mu_b.shape
    cdef const double[::1] m = np.ascontiguousarray(mu_b.ravel())
    cdef const double[::1] l = np.ascontiguousarray(lam_b.ravel())
    cdef const double[::1] z = np.ascontiguousarray(nu_b.ravel())
    cdef const double[::1] w = np.ascontiguousarray(u_b.ravel())
    cdef Py_ssize_t i, size = m.shape[0]
    cdef double y, mu_y, half, big, small
    out = np.empty(size, dtype=np.float64)
    cdef double[::1] ov = out
    with nogil:
        for i in range(size):
            y = z[i] * z[i]
            mu_y = m[i] * y
            half = m[i] / (2.0 * l[i])
            big = m[i] + half * mu_y + half * sqrt(4.0 * l[i] * mu_y + mu_y * mu_y)
            small = (m[i] * m[i]) / big
            if w[i] <= m[i] / (m[i] + small):
                ov[i] = small
            else:
                ov[i] = big
    return out.reshape(shape)


def ks_statistic(a, b):
    cdef const double[::1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef const double[::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    cdef Py_ssize_t n1 = av.shape[0], n2 = bv.shape[0], i = 0, j = 0
    cdef double v, d, best = 0.0
    with nogil:
        while i < n1 and j < n2:
            v = av[i] if av[i] < bv[j] else bv[j]
            while i < n1 and av[i] <= v:
                i += 1
            while j < n2 and bv[j] <= v:
                j += 1
            d = fabs(<double>i / n1 - <double>j / n2)
            if d > best:
                best = d
    return best
