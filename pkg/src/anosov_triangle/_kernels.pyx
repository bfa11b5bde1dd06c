# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the kernels in ``_kernels_py``."""

import numpy as np
from libc.math cimport atan2, sqrt, fabs


cdef inline void _mul3(double[:, ::1] a, double[:, ::1] b, double[:, ::1] out) noexcept nogil:
    cdef int i, j
    for i in range(3):
        for j in range(3):
            out[i, j] = a[i, 0] * b[0, j] + a[i, 1] * b[1, j] + a[i, 2] * b[2, j]


cdef inline void _rescale(double[:, ::1] m) noexcept nogil:
    cdef int i, j
    cdef double s = 0.0
    for i in range(3):
        for j in range(3):
            if fabs(m[i, j]) > s:
                s = fabs(m[i, j])
    for i in range(3):
        for j in range(3):
            m[i, j] /= s


cdef double _max_angle(double[:, ::1] p) noexcept nogil:
    cdef Py_ssize_t i, j, n = p.shape[0]
    cdef double cx, cy, cz, d, a, best = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            cx = p[i, 1] * p[j, 2] - p[i, 2] * p[j, 1]
            cy = p[i, 2] * p[j, 0] - p[i, 0] * p[j, 2]
            cz = p[i, 0] * p[j, 1] - p[i, 1] * p[j, 0]
            d = p[i, 0] * p[j, 0] + p[i, 1] * p[j, 1] + p[i, 2] * p[j, 2]
            a = atan2(sqrt(cx * cx + cy * cy + cz * cz), d)
            if a > best:
                best = a
    return best


def max_angle(pts):
    cdef double[:, ::1] p = np.ascontiguousarray(pts, dtype=np.float64)
    return _max_angle(p)


def chain_product(gens, idx):
    cdef double[:, :, ::1] gs = np.ascontiguousarray(gens, dtype=np.float64)
    cdef long[::1] ix = np.ascontiguousarray(idx, dtype=np.int_)
    m_arr = np.eye(3)
    cdef double[:, ::1] m = m_arr
    cdef double[:, ::1] tmp = np.empty((3, 3))
    cdef Py_ssize_t k
    for k in range(ix.shape[0]):
        _mul3(m, gs[ix[k]], tmp)
        m[...] = tmp
        _rescale(m)
    return m_arr


def box_chain(steps, verts):
    cdef double[:, :, ::1] st = np.ascontiguousarray(steps, dtype=np.float64)
    cdef double[:, :, ::1] vs = np.ascontiguousarray(verts, dtype=np.float64)
    cdef Py_ssize_t n = st.shape[0], k = vs.shape[1], i, r, c
    diams_arr = np.empty(n + 1)
    cdef double[::1] diams = diams_arr
    cdef double[:, ::1] g = np.eye(3)
    cdef double[:, ::1] tmp = np.empty((3, 3))
    cdef double[:, ::1] pts = np.empty((k, 3))
    cdef double s
    bar_arr = np.zeros(3)
    cdef double[::1] bar = bar_arr
    with nogil:
        for i in range(n + 1):
            if i:
                _mul3(g, st[i - 1], tmp)
                g[...] = tmp
                _rescale(g)
            for r in range(k):
                s = 0.0
                for c in range(3):
                    pts[r, c] = g[c, 0] * vs[i, r, 0] + g[c, 1] * vs[i, r, 1] + g[c, 2] * vs[i, r, 2]
                    s += pts[r, c] * pts[r, c]
                s = sqrt(s)
                for c in range(3):
                    pts[r, c] /= s
            diams[i] = _max_angle(pts)
        for r in range(k):
            for c in range(3):
                bar[c] += pts[r, c]
        s = sqrt(bar[0] * bar[0] + bar[1] * bar[1] + bar[2] * bar[2])
        for c in range(3):
            bar[c] /= s
    return diams_arr, bar_arr
