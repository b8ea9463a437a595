# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: radial primitive quadrature, developing sweeps and the
breadth-first angle unwrap. Results match :mod:`hopfion._kernels_py`."""
import numpy as np
cimport numpy as cnp
from libc.math cimport floor, ceil, isnan, NAN

cnp.import_array()


cdef inline double _trilinear(const double[:, :, :] a, double x, double y, double z,
                              Py_ssize_t n1, Py_ssize_t n2, Py_ssize_t n3) nogil:
    cdef Py_ssize_t i = <Py_ssize_t>floor(x)
    cdef Py_ssize_t j = <Py_ssize_t>floor(y)
    cdef Py_ssize_t k = <Py_ssize_t>floor(z)
    if i < 0:
        i = 0
    if j < 0:
        j = 0
    if k < 0:
        k = 0
    if i > n1 - 2:
        i = n1 - 2
    if j > n2 - 2:
        j = n2 - 2
    if k > n3 - 2:
        k = n3 - 2
    cdef double fx = x - i, fy = y - j, fz = z - k
    if fx < 0.0:
        fx = 0.0
    if fy < 0.0:
        fy = 0.0
    if fz < 0.0:
        fz = 0.0
    if fx > 1.0:
        fx = 1.0
    if fy > 1.0:
        fy = 1.0
    if fz > 1.0:
        fz = 1.0
    cdef double c00 = a[i, j, k] * (1 - fx) + a[i + 1, j, k] * fx
    cdef double c10 = a[i, j + 1, k] * (1 - fx) + a[i + 1, j + 1, k] * fx
    cdef double c01 = a[i, j, k + 1] * (1 - fx) + a[i + 1, j, k + 1] * fx
    cdef double c11 = a[i, j + 1, k + 1] * (1 - fx) + a[i + 1, j + 1, k + 1] * fx
    cdef double c0 = c00 * (1 - fy) + c10 * fy
    cdef double c1 = c01 * (1 - fy) + c11 * fy
    return c0 * (1 - fz) + c1 * fz


def radial_primitive(comps, c, h, int k, int intervals):
    """Composite Simpson quadrature of int_0^1 t^(k-1) iota_(x-c) eta(c+t(x-c)) dt."""
    cdef double[:, :, :, :] e = np.ascontiguousarray(comps, dtype=np.float64)
    cdef double[:] cc = np.ascontiguousarray(c, dtype=np.float64)
    cdef double[:] hh = np.ascontiguousarray(h, dtype=np.float64)
    cdef Py_ssize_t nc = e.shape[0], n1 = e.shape[1], n2 = e.shape[2], n3 = e.shape[3]
    cdef int nout = 1 if k == 1 else 3
    out_arr = np.zeros((nout, n1, n2, n3))
    cdef double[:, :, :, :] out = out_arr
    cdef double dt = 1.0 / intervals
    cdef Py_ssize_t i, j, l, m
    cdef int s
    cdef double t, wt, fac, x, y, z, v0, v1, v2, p
    cdef double val[3]
    for i in range(n1):
        for j in range(n2):
            for l in range(n3):
                v0 = (i - cc[0]) * hh[0]
                v1 = (j - cc[1]) * hh[1]
                v2 = (l - cc[2]) * hh[2]
                for s in range(intervals + 1):
                    t = s * dt
                    if s == 0 or s == intervals:
                        wt = dt / 3.0
                    elif s % 2 == 1:
                        wt = 4.0 * dt / 3.0
                    else:
                        wt = 2.0 * dt / 3.0
                    fac = wt
                    for m in range(k - 1):
                        fac = fac * t
                    if fac == 0.0:
                        continue
                    x = cc[0] + t * (i - cc[0])
                    y = cc[1] + t * (j - cc[1])
                    z = cc[2] + t * (l - cc[2])
                    for m in range(nc):
                        val[m] = _trilinear(e[m], x, y, z, n1, n2, n3)
                    if k == 1:
                        out[0, i, j, l] += fac * (val[0] * v0 + val[1] * v1 + val[2] * v2)
                    elif k == 2:
                        out[0, i, j, l] += fac * (val[1] * v2 - val[2] * v1)
                        out[1, i, j, l] += fac * (val[2] * v0 - val[0] * v2)
                        out[2, i, j, l] += fac * (val[0] * v1 - val[1] * v0)
                    else:
                        p = fac * val[0]
                        out[0, i, j, l] += p * v0
                        out[1, i, j, l] += p * v1
                        out[2, i, j, l] += p * v2
    return out_arr


def _as4(a, int axis):
    a = np.moveaxis(a, axis, 0)
    while a.ndim < 4:
        a = a[:, None]
    return a


def axis_sweep(u, steps, int axis):
    """In place: u[i] = u[i-1] * steps[i-1] along ``axis`` (index 0 fixed)."""
    cdef double[:, :, :, :] uu = _as4(u, axis)
    cdef const double[:, :, :, :] ss = _as4(steps, axis)
    cdef Py_ssize_t n = uu.shape[0], a = uu.shape[1], b = uu.shape[2], i, j, l
    cdef double w1, x1, y1, z1, w2, x2, y2, z2
    with nogil:
        for i in range(1, n):
            for j in range(a):
                for l in range(b):
                    w1 = uu[i - 1, j, l, 0]
                    x1 = uu[i - 1, j, l, 1]
                    y1 = uu[i - 1, j, l, 2]
                    z1 = uu[i - 1, j, l, 3]
                    w2 = ss[i - 1, j, l, 0]
                    x2 = ss[i - 1, j, l, 1]
                    y2 = ss[i - 1, j, l, 2]
                    z2 = ss[i - 1, j, l, 3]
                    uu[i, j, l, 0] = w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2
                    uu[i, j, l, 1] = w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2
                    uu[i, j, l, 2] = w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2
                    uu[i, j, l, 3] = w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2
    return u


def bfs_unwrap(angle, mask, start):
    """Breadth-first unwrap of a principal angle field (turns) over ``mask``."""
    from ._kernels_py import _edge_defects

    cdef const double[:, :, :] ang = np.ascontiguousarray(angle, dtype=np.float64)
    cdef const cnp.uint8_t[:, :, :] msk = np.ascontiguousarray(mask, dtype=np.uint8)
    cdef Py_ssize_t n1 = ang.shape[0], n2 = ang.shape[1], n3 = ang.shape[2]
    out_arr = np.full((n1, n2, n3), np.nan)
    cdef double[:, :, :] out = out_arr
    queue_arr = np.empty(n1 * n2 * n3, dtype=np.intp)
    cdef Py_ssize_t[:] queue = queue_arr
    cdef Py_ssize_t head = 0, tail = 0, v, i, j, l, a, b, c, d
    cdef int di[6]
    cdef int dj[6]
    cdef int dl[6]
    di[:] = [1, -1, 0, 0, 0, 0]
    dj[:] = [0, 0, 1, -1, 0, 0]
    dl[:] = [0, 0, 0, 0, 1, -1]
    cdef double inc
    i, j, l = start
    out[i, j, l] = ang[i, j, l]
    queue[tail] = (i * n2 + j) * n3 + l
    tail += 1
    with nogil:
        while head < tail:
            v = queue[head]
            head += 1
            l = v % n3
            j = (v // n3) % n2
            i = v // (n2 * n3)
            for d in range(6):
                a = i + di[d]
                b = j + dj[d]
                c = l + dl[d]
                if a < 0 or a >= n1 or b < 0 or b >= n2 or c < 0 or c >= n3:
                    continue
                if not msk[a, b, c] or not isnan(out[a, b, c]):
                    continue
                inc = ang[a, b, c] - ang[i, j, l]
                inc = inc - ceil(inc - 0.5)
                out[a, b, c] = out[i, j, l] + inc
                queue[tail] = (a * n2 + b) * n3 + c
                tail += 1
    frac, worst = _edge_defects(np.asarray(ang), out_arr, np.asarray(mask, dtype=bool))
    return out_arr, frac, worst
