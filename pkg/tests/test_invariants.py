import json

import pytest

from hopfion.genmaps import (
    conjugate, gen_bump_s3, gen_constant, gen_hopf_box, gen_random_smooth, gen_t3, hopf_box_lift,
    perturb,
)
from hopfion.grid import box, torus
from hopfion.invariants import (
    RelaxResult, commute_check, degree, faddeev_gradient, hopf, relax, snap, upsilon,
)


def test_snap_and_confidence(t16):
    r = snap("degree", 2.1, t16)
    assert (r.snapped, r.confidence) == (2, "OK") and r.gap == pytest.approx(0.1)
    low = snap("degree", 0.5, t16)
    assert low.confidence == "LOW_CONFIDENCE"
    m = snap("upsilon", -3.0, t16, modulus=4)
    assert m.residue == 1
    out = json.loads(m.to_json())
    assert out["grid"]["domain"]["type"] == "torus" and out["grid"]["dims"] == [16, 16, 16]


def test_degree_of_basic_maps():
    lat = box(40, R=4.0)
    assert abs(degree(hopf_box_lift(lat)).raw - 1) < 0.02
    assert degree(gen_constant((1, 0, 0, 0), "S3", lat)).raw == 0.0
    assert abs(degree(gen_bump_s3(lat)).raw - 1) < 0.05


def test_hopf_of_standard_map_and_constant():
    lat = box(40, R=4.0)
    r = hopf(gen_hopf_box(lat))
    assert r.snapped == 1 and r.gap < 0.05
    assert abs(r.diagnostics["lift_degree"] - 1) < 0.02
    assert hopf(gen_constant((0, 1, 0, 0), "S2", lat)).raw == pytest.approx(0.0, abs=1e-12)


def test_hopf_on_zero_class_torus():
    phi = gen_random_smooth("S2", 1, 5, torus(24), amplitude=0.5)
    assert abs(hopf(phi).raw) < 0.05


def test_upsilon_of_field_with_itself():
    psi = gen_t3([[1, 0, 0], [0, 1, 0]], torus(16))
    r = upsilon(psi, psi)
    assert r.snapped == 0 and r.modulus == 2 and r.residue == 0
    assert r.diagnostics["class"] == [0, 0, 1]


def test_upsilon_on_box_intertwines():
    lat = box(32, R=4.0)
    psi = gen_hopf_box(lat)
    r = upsilon(psi, conjugate(gen_bump_s3(lat), psi))
    assert r.modulus == 0 and r.diagnostics["class"] == [0, 0, 0]
    assert r.diagnostics["conjugation_residual"] < 1e-10


def test_commute_check_converges():
    vals = []
    for n in (16, 32):
        u = gen_random_smooth("S3", 1, 2, torus(n), amplitude=0.5)
        vals.append(commute_check(u).max)
    assert vals[1] < vals[0] / 4


@pytest.mark.parametrize("lat", [box(12, R=2.0), torus(10)])
def test_faddeev_gradient_matches_finite_differences(lat, rng):
    phi = gen_random_smooth("S2", 1, 1, lat, amplitude=0.8)
    e0, g = faddeev_gradient(phi)
    assert e0 > 0
    for _ in range(5):
        idx = tuple(int(rng.integers(2, n - 2)) for n in lat.dims) + (int(rng.integers(1, 4)),)
        eps = 1e-6
        plus, minus = phi.values.copy(), phi.values.copy()
        plus[idx] += eps
        minus[idx] -= eps
        ep, _ = faddeev_gradient(phi.with_values(plus, check=False))
        em, _ = faddeev_gradient(phi.with_values(minus, check=False))
        assert g[idx[:3] + (idx[3] - 1,)] == pytest.approx((ep - em) / (2 * eps), rel=1e-5, abs=1e-8)


def test_relax_decreases_energy_and_keeps_class():
    phi = perturb(gen_t3([[0, 1, 0], [0, 0, 1]], torus(16)), 0.1, 3)
    res = relax(phi, steps=40, record_every=20)
    assert isinstance(res, RelaxResult)
    assert all(b <= a for a, b in zip(res.energy, res.energy[1:]))
    assert res.energy[-1] < res.energy[0]
    assert [r["step"] for r in res.invariants] == [0, 20, 40]
    assert res.class_constant()
    assert res.invariants[0]["class"] == [1, 0, 0]


def test_relax_freezes_box_shells():
    lat = box(16, R=4.0)
    phi = perturb(gen_hopf_box(lat), 0.1, 1)
    res = relax(phi, steps=5, record_every=5)
    assert res.phi.boundary_defect() == 0.0
