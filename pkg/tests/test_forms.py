import numpy as np
import pytest

from hopfion.errors import DegreeError
from hopfion.forms import (
    DiscreteForm, codiff, constant_form, d, dfield, faddeev_energy, inner, integrate,
    maurer_cartan, pullback_area, pullback_vol3, skyrme_energy, top_form, triple, wedge,
    zero_form,
)
from hopfion.genmaps import gen_constant, gen_hopf_box, gen_random_smooth, hopf_box_lift
from hopfion.grid import box, sample, torus


def _random_form(lat, degree, rng, kind="scalar"):
    shape = ((1, 3, 3, 1)[degree],) + lat.dims + (() if kind == "scalar" else (4,))
    return DiscreteForm(degree, rng.standard_normal(shape), lat, kind)


@pytest.mark.parametrize("degree", [0, 1])
def test_d_squared_vanishes_on_torus(t16, rng, degree):
    a = _random_form(t16, degree, rng)
    assert d(d(a)).max_abs() < 1e-10 * max(1.0, d(a).max_abs())


@pytest.mark.parametrize("degree", [0, 1, 2])
def test_codiff_is_adjoint(t16, rng, degree):
    a = _random_form(t16, degree, rng)
    b = _random_form(t16, degree + 1, rng)
    assert inner(d(a), b) == pytest.approx(inner(a, codiff(b)), rel=1e-10, abs=1e-10)


def test_d_of_top_form_raises(t16):
    with pytest.raises(DegreeError):
        d(top_form(t16, np.zeros(t16.dims)))


def test_wedge_of_coordinate_forms(t16):
    dx = constant_form(t16, 1, [1, 0, 0])
    dy = constant_form(t16, 1, [0, 1, 0])
    dz = constant_form(t16, 1, [0, 0, 1])
    xy = wedge(dx, dy)
    assert np.allclose(xy.comps[2], 1) and np.allclose(xy.comps[:2], 0)
    assert np.allclose(wedge(dy, dx).comps, -xy.comps)
    vol = wedge(xy, dz)
    assert vol.degree == 3 and np.allclose(vol.comps, 1)
    assert integrate(vol) == pytest.approx(1.0)
    with pytest.raises(DegreeError):
        wedge(vol, dx)


def test_integrate_sin_squared():
    lat = torus(24)
    x = lat.positions()[..., 0]
    f = top_form(lat, np.sin(2 * np.pi * x) ** 2)
    assert integrate(f) == pytest.approx(0.5, abs=1e-12)


def test_box_integration_is_trapezoidal():
    lat = box(17, R=1.0)
    x = lat.positions()[..., 0]
    assert integrate(top_form(lat, x + 1.0)) == pytest.approx(8.0, rel=1e-12)


def test_maurer_cartan_of_linear_rotation():
    lat = torus(16, L=2 * np.pi)
    u = sample(lat, lambda p: np.stack(
        [np.cos(p[..., 0]), np.sin(p[..., 0]), 0 * p[..., 0], 0 * p[..., 0]], -1), "S3")
    for scheme, tol in (("geodesic", 1e-12), ("central", 0.03)):
        a = maurer_cartan(u, scheme)
        assert a.kind == "sp1"
        assert np.allclose(a.comps[0][..., 1], 1.0, atol=tol)
        assert np.allclose(a.comps[1:], 0.0, atol=1e-12)


def test_quaternion_form_parts(t16, rng):
    a = _random_form(t16, 1, rng, "quaternion")
    re, im = a.real(), a.imag()
    assert re.kind == "scalar" and im.kind == "sp1"
    assert np.allclose(im.comps[..., 0], 0)
    assert im.residual == pytest.approx(np.max(np.abs(a.comps[..., 0])))


def test_triple_identity_is_exact(t16):
    u = gen_random_smooth("S3", 2, 3, t16, amplitude=0.5)
    a = maurer_cartan(u)
    t = triple(a).comps[..., 0]
    aa = wedge(a, a).comps
    pairing = np.sum(a.comps * aa, axis=-1)
    pairing = pairing[0] + pairing[1] + pairing[2]
    assert np.allclose(-t[0], pairing, atol=1e-12)


def test_pullbacks_integrate_to_degrees():
    lat = box(40, R=4.0)
    u = hopf_box_lift(lat)
    assert integrate(pullback_vol3(u)) == pytest.approx(1.0, abs=0.02)
    # a random smooth map to S2 on the torus has zero area flux through a slice
    phi = gen_random_smooth("S2", 1, 2, torus(24))
    w = pullback_area(phi)
    assert abs(np.sum(w.comps[0][0]) * phi.lattice.spacing[1] * phi.lattice.spacing[2]) < 1e-2


def test_energies():
    lat = box(32, R=4.0)
    c = gen_constant((0.0, 1.0, 0.0, 0.0), "S2", lat)
    e0 = faddeev_energy(c)
    assert e0.total == 0.0 and e0.max_quartic_density == 0.0
    phi = gen_hopf_box(lat)
    e = faddeev_energy(phi)
    assert e.quadratic > 0 and e.quartic > 0
    assert e.total == pytest.approx(e.quadratic + e.quartic)
    s = skyrme_energy(hopf_box_lift(lat))
    assert s.total > 0 and set(s.as_dict()) >= {"quadratic", "quartic", "total", "l3_probe"}


def test_zero_form_and_dfield(t16):
    x = t16.positions()[..., 0]
    f = zero_form(t16, np.sin(2 * np.pi * x))
    g = d(f)
    assert np.allclose(g.comps[1:], 0)
    ref = 2 * np.pi * np.cos(2 * np.pi * x)
    assert np.max(np.abs(g.comps[0] - ref)) < 0.2
    assert np.max(np.abs(d(f, order=4).comps[0] - ref)) < 0.01
    u = gen_random_smooth("S3", 1, 0, t16)
    assert dfield(u).kind == "quaternion"
