import numpy as np
import pytest

from hopfion.errors import DomainError
from hopfion.genmaps import (
    GENERATORS, collapse_profile, collapse_t2, conjugate, gen_bump_s3, gen_constant,
    gen_hopf_box, gen_pN, gen_power, gen_random_smooth, gen_singular, gen_t3, hopf_box_lift,
    inverse_stereo, pN_values, perturb, t3_class, taper_radii, winding_s1,
)
from hopfion.grid import box, shell_mask, torus
from hopfion.quat import hopf_sigma_array


def test_t3_class_minors():
    assert t3_class([[0, 1, 0], [0, 0, 1]]) == (1, 0, 0)
    assert t3_class([[1, 0, 0], [0, 1, 0]]) == (0, 0, 1)
    assert t3_class([[3, 1, 2], [-5, 0, -2]]) == (-2, -4, 5)


def test_collapse_map_is_constant_off_the_disk():
    assert collapse_profile(np.array([0.0]))[0] == 0 and collapse_profile(np.array([1.0]))[0] == 1
    y = np.array([[0.05, 0.05], [0.5, 0.5], [1.05, 0.05]])
    out = collapse_t2(y)
    assert np.allclose(out[0], [0, 1, 0, 0]) and np.allclose(out[2], out[0])
    assert np.allclose(out[1], [0, -1, 0, 0])
    assert np.allclose(np.linalg.norm(out, axis=-1), 1)


def test_inverse_stereo_values():
    pos = np.array([[0.0, 0, 0], [1.0, 0, 0]])
    q = inverse_stereo(pos)
    assert np.allclose(q[0], [1, 0, 0, 0])
    assert np.allclose(q[1], [0, 1, 0, 0])
    assert np.allclose(inverse_stereo(pos, power=2)[1], [-1, 0, 0, 0])


def test_taper_radii():
    assert taper_radii(box(64, R=4.0)) == pytest.approx((3.2, 3.6))
    lo, hi = taper_radii(box(16, R=4.0))
    assert hi == pytest.approx(4.0 - 1.5 * 8.0 / 15) and lo == pytest.approx(hi * 8 / 9)


@pytest.mark.parametrize("make", [
    lambda lat: gen_hopf_box(lat),
    lambda lat: gen_power(2, lat),
    lambda lat: gen_power(-1, lat),
    lambda lat: gen_bump_s3(lat),
    lambda lat: gen_random_smooth("S3", 2, 4, lat),
    lambda lat: gen_random_smooth("S2", 2, 4, lat),
    lambda lat: gen_singular("half_degree", lat),
    lambda lat: perturb(gen_hopf_box(lat), 0.2, 1),
])
@pytest.mark.parametrize("n", [16, 33])
def test_box_generators_are_constant_on_outer_shells(make, n):
    phi = make(box(n, R=4.0))
    assert phi.boundary_defect() == 0.0
    shell = phi.values[shell_mask(phi.lattice, 2)]
    assert np.allclose(shell, phi.lattice.domain.far_value, atol=1e-15)


def test_hopf_box_is_sigma_of_its_lift():
    lat = box(24, R=4.0)
    u = hopf_box_lift(lat)
    phi = gen_hopf_box(lat)
    assert np.allclose(hopf_sigma_array(u.values)[..., 1:], phi.values[..., 1:], atol=1e-12)


def test_pN_values_on_poles_and_equator():
    vals = np.array([[0, 1.0, 0, 0], [0, 0, 1.0, 0], [0, 0, 0, 1.0]])
    out = pN_values(vals, 2)
    assert np.allclose(out[0], [0, 1, 0, 0])
    assert np.allclose(out[1], [0, 0, 1, 0]) and np.allclose(out[2], [0, 0, -1, 0], atol=1e-12)
    phi = gen_hopf_box(box(16, R=4.0))
    assert gen_pN(phi, 1) is phi
    assert gen_pN(phi, 3).boundary_defect() == 0.0


def test_torus_generators():
    lat = torus(16)
    phi = gen_t3([[0, 1, 0], [0, 0, 1]], lat)
    # depends on x2, x3 only
    assert np.allclose(phi.values[0], phi.values[5])
    lam = winding_s1(lat, (0, 2, 0))
    assert lam.kind == "S1" and np.allclose(lam.values[:, 0, 0], [1, 0, 0, 0])
    with pytest.raises(DomainError):
        gen_t3([[0, 1, 0], [0, 0, 1]], box(16))
    with pytest.raises(ValueError):
        gen_t3([[0, 0.5, 0], [0, 0, 1]], lat)


def test_conjugate_and_seeds(t16):
    a = gen_random_smooth("S3", 2, 7, t16)
    b = gen_random_smooth("S3", 2, 7, t16)
    c = gen_random_smooth("S3", 2, 8, t16)
    assert np.array_equal(a.values, b.values) and not np.allclose(a.values, c.values)
    phi = gen_constant((0, 1, 0, 0), "S2", t16)
    psi = conjugate(a, phi)
    assert psi.kind == "S2"
    assert np.allclose(psi.values[..., 1:], hopf_sigma_array(a.values)[..., 1:], atol=1e-12)


def test_singular_maps():
    lat = box(16, R=2.0)
    for name in ("eta1", "eta2", "eta3"):
        phi = gen_singular(name, lat)
        assert phi.kind == "S2" and np.all(np.isfinite(phi.values))
    with pytest.raises(KeyError):
        gen_singular("eta9", lat)


def test_generator_registry():
    assert {"hopf_box", "power", "t3", "singular", "random_smooth"} <= set(GENERATORS)
