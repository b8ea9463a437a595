"""Compare the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--dims 16,24,32] [--repeat 3]

Prints one line per kernel and size with both timings, the speedup and the
largest difference between the two results.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from hopfion import _kernels_py
from hopfion.elliptic import area_form
from hopfion.genmaps import gen_hopf_box, gen_t3
from hopfion.grid import box, torus
from hopfion.quat import qexp_array

try:
    from hopfion import _kernels as compiled
except ImportError:  # extension not built
    compiled = None


def best_of(fn, repeat):
    best, out = np.inf, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def case_radial(n):
    eta = area_form(gen_hopf_box(box(n, R=4.0)))
    comps = np.ascontiguousarray(eta.comps)
    c = (np.asarray(eta.lattice.dims) - 1) / 2.0
    h = np.asarray(eta.lattice.spacing)
    return lambda mod: mod.radial_primitive(comps, c, h, 2, 64)


def case_sweep(n):
    rng = np.random.default_rng(0)
    steps = qexp_array(0.1 * rng.standard_normal((n, n, n, 3)))

    def run(mod):
        u = np.zeros((n, n, n, 4))
        u[0] = (1.0, 0.0, 0.0, 0.0)
        return mod.axis_sweep(u, steps, 0)
    return run


def case_bfs(n):
    phi = gen_t3([[1, 0, 0], [0, 1, 0]], torus(n))
    ang = np.ascontiguousarray(np.arctan2(phi.values[..., 2], phi.values[..., 1]) / (2 * np.pi))
    mask = np.ones(ang.shape, dtype=bool)
    return lambda mod: mod.bfs_unwrap(ang, mask, (0, 0, 0))[0]


CASES = {"radial_primitive": case_radial, "axis_sweep": case_sweep, "bfs_unwrap": case_bfs}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dims", default="16,24,32")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if compiled is None:
        print("compiled kernels not built; only the fallback is available")
    print(f"{'kernel':<18}{'n':>4}{'python [s]':>12}{'cython [s]':>12}{'speedup':>9}{'max diff':>11}")
    for name, make in CASES.items():
        for n in (int(v) for v in args.dims.split(",")):
            run = make(n)
            t_py, r_py = best_of(lambda: run(_kernels_py), args.repeat)
            if compiled is None:
                print(f"{name:<18}{n:>4}{t_py:>12.4f}{'-':>12}{'-':>9}{'-':>11}")
                continue
            t_c, r_c = best_of(lambda: run(compiled), args.repeat)
            diff = float(np.nanmax(np.abs(r_py - r_c)))
            print(f"{name:<18}{n:>4}{t_py:>12.4f}{t_c:>12.4f}{t_py / t_c:>9.1f}{diff:>11.2e}")


if __name__ == "__main__":
    main()
