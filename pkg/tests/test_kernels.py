import os
import subprocess
import sys

import numpy as np
import pytest

from hopfion import _kernels_py, kernels
from hopfion.elliptic import area_form
from hopfion.genmaps import gen_hopf_box, gen_t3
from hopfion.grid import box, torus
from hopfion.quat import qexp_array

compiled = pytest.importorskip("hopfion._kernels")


def test_radial_primitive_matches_fallback():
    eta = area_form(gen_hopf_box(box(16, R=4.0)))
    comps = np.ascontiguousarray(eta.comps)
    c = (np.asarray(eta.lattice.dims) - 1) / 2.0
    h = np.asarray(eta.lattice.spacing)
    a = compiled.radial_primitive(comps, c, h, 2, 16)
    b = _kernels_py.radial_primitive(comps, c, h, 2, 16)
    assert np.allclose(a, b, atol=1e-12)


def test_axis_sweep_matches_fallback(rng):
    steps = qexp_array(0.2 * rng.standard_normal((10, 9, 8, 3)))
    out = []
    for mod in (compiled, _kernels_py):
        u = np.zeros((10, 9, 8, 4))
        u[0] = (1.0, 0.0, 0.0, 0.0)
        mod.axis_sweep(u, steps, 0)
        out.append(u)
    assert np.allclose(out[0], out[1], atol=1e-13)
    assert np.allclose(np.linalg.norm(out[0], axis=-1), 1.0)


def test_bfs_unwrap_matches_fallback():
    phi = gen_t3([[1, 0, 0], [0, 1, 0]], torus(12))
    ang = np.ascontiguousarray(np.arctan2(phi.values[..., 2], phi.values[..., 1]) / (2 * np.pi))
    mask = np.ones(ang.shape, dtype=bool)
    a = compiled.bfs_unwrap(ang, mask, (0, 0, 0))
    b = _kernels_py.bfs_unwrap(ang, mask, (0, 0, 0))
    assert np.allclose(a[0], b[0]) and a[1] == pytest.approx(b[1]) and a[2] == pytest.approx(b[2])


def test_backend_switch():
    assert kernels.BACKEND in ("cython", "python")
    env = dict(os.environ, HOPFION_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from hopfion import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
