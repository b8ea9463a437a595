import numpy as np
import pytest

from hopfion.errors import ClassMismatch
from hopfion.genmaps import conjugate, gen_bump_s3, gen_hopf_box, gen_t3, winding_s1
from hopfion.grid import box, torus
from hopfion.intertwine import (
    check_classes, conjugation_residual, gauge_twist, intertwine_cech, intertwine_trivial,
    partition_of_unity,
)
from hopfion.cech import standard_cover
from hopfion.invariants import degree, global_lift


@pytest.fixture(scope="module")
def pair16():
    lat = torus(16)
    psi = gen_t3([[1, 0, 0], [0, 1, 0]], lat)
    return conjugate(gen_bump_s3(lat), psi), psi


def test_partition_of_unity_sums_to_one():
    cover = standard_cover(torus(16))
    rho = partition_of_unity(cover)
    assert rho.shape == (27,) + (16, 16, 16)
    assert np.allclose(rho.sum(axis=0), 1.0)
    for p, chart in enumerate(cover.charts):
        assert np.all(rho[p][~chart.mask()] == 0)


def test_trivial_intertwiner_on_box():
    lat = box(32, R=4.0)
    psi = gen_hopf_box(lat)
    phi = conjugate(gen_bump_s3(lat), psi)
    u, _ = global_lift(phi)
    v, _ = global_lift(psi)
    res = intertwine_trivial(u, v, phi, psi)
    assert res.conjugation < 1e-10
    assert res.construction == "global_lift"


def test_cech_intertwiner(pair16):
    phi, psi = pair16
    res = intertwine_cech(phi, psi)
    assert res.construction == "cech_glue"
    assert res.conjugation < 1e-10 and res.gluing < 1e-10
    assert res.diagnostics["h1_windings"] == [0, 0, 0]
    assert conjugation_residual(res.Phi.values, phi.values, psi.values) == res.conjugation


def test_gauge_twist_keeps_intertwining(pair16):
    phi, psi = pair16
    res = intertwine_cech(phi, psi)
    lam = winding_s1(psi.lattice, (0, 0, 1))
    tw = gauge_twist(res, psi, lam, phi)
    assert tw.conjugation < 1e-10
    # class (0, 0, 1) against winding (0, 0, 1): the degree moves by 2
    shift = degree(tw.Phi).raw - degree(res.Phi).raw
    assert abs(shift - 2) < 0.25


def test_class_mismatch():
    with pytest.raises(ClassMismatch):
        check_classes((0, 0, 1), (0, 1, 0))
    check_classes((1, 2, 3), [1, 2, 3])
