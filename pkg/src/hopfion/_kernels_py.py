"""Pure-Python/numpy versions of the compiled kernels.

Each function here has the same signature and results as its counterpart in
``_kernels.pyx``; :mod:`hopfion.kernels` picks whichever is available.
"""
from __future__ import annotations

from collections import deque

import numpy as np

from .quat import qmul


def radial_primitive(comps, c, h, k, intervals):
    from .elliptic import radial_primitive_py

    return radial_primitive_py(comps, c, h, k, intervals)


def axis_sweep(u, steps, axis):
    """In place: u[i] = u[i-1] * steps[i-1] along ``axis`` (index 0 fixed)."""
    um = np.moveaxis(u, axis, 0)
    sm = np.moveaxis(steps, axis, 0)
    for i in range(1, um.shape[0]):
        um[i] = qmul(um[i - 1], sm[i - 1])
    return u


def bfs_unwrap(angle, mask, start):
    """Unwrap a principal-angle field (in turns) over the connected mask.

    Breadth-first from ``start`` across the 6-neighbour graph of ``mask``;
    every tree edge adds the increment reduced to (-1/2, 1/2]. Returns the
    unwrapped field (NaN outside the reached set) and the largest distance of
    a non-tree cycle defect from an integer together with the largest defect.
    """
    n1, n2, n3 = angle.shape
    out = np.full(angle.shape, np.nan)
    out[start] = angle[start]
    q = deque([start])
    while q:
        i, j, k = q.popleft()
        base = out[i, j, k]
        for di, dj, dk in ((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)):
            a, b, c = i + di, j + dj, k + dk
            if 0 <= a < n1 and 0 <= b < n2 and 0 <= c < n3 and mask[a, b, c] and np.isnan(out[a, b, c]):
                inc = angle[a, b, c] - angle[i, j, k]
                inc -= np.ceil(inc - 0.5)
                out[a, b, c] = base + inc
                q.append((a, b, c))
    frac, worst = _edge_defects(angle, out, mask)
    return out, frac, worst


def _edge_defects(angle, out, mask):
    frac = 0.0
    worst = 0.0
    for ax in range(3):
        sl0 = [slice(None)] * 3
        sl1 = [slice(None)] * 3
        sl0[ax] = slice(0, -1)
        sl1[ax] = slice(1, None)
        m = mask[tuple(sl0)] & mask[tuple(sl1)]
        inc = angle[tuple(sl1)] - angle[tuple(sl0)]
        inc -= np.ceil(inc - 0.5)
        dfc = (out[tuple(sl1)] - out[tuple(sl0)] - inc)[m]
        dfc = dfc[np.isfinite(dfc)]
        if dfc.size:
            frac = max(frac, float(np.max(np.abs(dfc - np.round(dfc)))))
            worst = max(worst, float(np.max(np.abs(dfc))))
    return frac, worst
