"""Kernel selection: compiled Cython kernels when built, numpy fallback otherwise.

Set ``HOPFION_PURE_PYTHON=1`` to force the fallback.
"""
from __future__ import annotations

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("HOPFION_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled  # type: ignore[attr-defined]

        _impl = _compiled
        BACKEND = "cython"
    except ImportError:  # extension not built
        pass


def radial_primitive(comps, c, h, k, intervals):
    return _impl.radial_primitive(comps, c, h, k, intervals)


def axis_sweep(u, steps, axis):
    return _impl.axis_sweep(u, steps, axis)


def bfs_unwrap(angle, mask, start):
    return _impl.bfs_unwrap(angle, mask, start)
