import numpy as np
import pytest

from hopfion.elliptic import (
    CubeChart, NotClosed, area_form, closedness_defect, hodge_split, local_form,
    poincare_primitive, solve_xi_torus,
)
from hopfion.errors import DomainError
from hopfion.forms import DiscreteForm, constant_form, d, inner
from hopfion.genmaps import gen_random_smooth, gen_t3
from hopfion.grid import box, torus


def test_hodge_split_sums_and_is_orthogonal(t16, rng):
    a = DiscreteForm(1, rng.standard_normal((3,) + t16.dims), t16)
    s = hodge_split(a)
    assert np.allclose((s.exact + s.coexact + s.harmonic).comps, a.comps)
    assert d(s.exact).max_abs() < 1e-10
    assert abs(inner(s.exact, s.coexact)) < 1e-8
    assert np.allclose(s.periods, a.comps.reshape(3, -1).mean(axis=1))


def test_hodge_split_of_constant_form_is_harmonic(t16):
    a = constant_form(t16, 2, [0.0, 0.0, 3.0])
    s = hodge_split(a)
    assert s.exact.max_abs() < 1e-12 and s.coexact.max_abs() < 1e-12
    assert np.allclose(s.periods, [0, 0, 3])


def test_hodge_split_needs_torus():
    with pytest.raises(DomainError):
        hodge_split(constant_form(box(16), 1, [1, 0, 0]))


def test_solve_xi_recovers_exact_part():
    phi = gen_random_smooth("S2", 1, 4, torus(24), amplitude=0.5)
    sol = solve_xi_torus(phi)
    split = hodge_split(sol.eta)
    target = sol.eta - split.harmonic - split.coexact
    assert sol.residual < 1e-10 and sol.closedness < 0.02
    assert np.max(np.abs(d(sol.xi).comps - target.comps)) < 1e-8
    # zero class; the central-difference periods vanish up to truncation
    assert sol.remainder < 1e-3


def test_solve_xi_sees_the_class():
    phi = gen_t3([[1, 0, 0], [0, 1, 0]], torus(24))
    sol = solve_xi_torus(phi)
    # central-difference area form: the period is 1 up to truncation
    assert abs(sol.periods[2] / (2 * np.pi) - 1) < 0.1
    assert np.allclose(sol.periods[:2], 0, atol=1e-10)


def test_primitive_of_constant_form():
    lat = box(17, R=1.0)
    eta = constant_form(lat, 2, [0.0, 0.0, 1.0])
    xi = poincare_primitive(eta)
    assert np.max(np.abs(d(xi).comps - eta.comps)) < 1e-12
    # radial gauge: xi = (x dy - y dx)/2
    x = lat.positions()
    assert np.allclose(xi.comps[0], -x[..., 1] / 2) and np.allclose(xi.comps[1], x[..., 0] / 2)


def test_primitive_of_exact_one_form():
    lat = box(17, R=1.0)
    x = lat.positions()
    f = x[..., 0] ** 2 + x[..., 1] * x[..., 2]
    eta = DiscreteForm(1, np.stack([2 * x[..., 0], x[..., 2], x[..., 1]]), lat)
    g = poincare_primitive(eta).comps[0]
    assert np.allclose(g, f - f[8, 8, 8], atol=1e-10)


def test_primitive_rejects_open_forms():
    lat = box(17, R=1.0)
    x = lat.positions()
    eta = DiscreteForm(2, np.stack([x[..., 0], 0 * x[..., 0], 0 * x[..., 0]]), lat)
    assert closedness_defect(eta) > 1e-3
    with pytest.raises(NotClosed):
        poincare_primitive(eta)
    poincare_primitive(eta, check=False)


def test_charts(t16):
    chart = CubeChart(t16, (12, 0, 0), (9, 9, 9))
    assert chart.index_arrays()[0][:5].tolist() == [12, 13, 14, 15, 0]
    assert chart.mask().sum() == 9**3
    lat = chart.local_lattice()
    assert lat.dims == (9, 9, 9) and not lat.is_torus
    assert np.allclose(lat.spacing, t16.spacing)
    phi = gen_random_smooth("S2", 1, 0, t16)
    eta = area_form(phi)
    loc = local_form(eta, chart)
    assert np.allclose(loc.comps[:, 4], eta.comps[:, 0, :9, :9])
    with pytest.raises(ValueError):
        CubeChart(box(16), (10, 0, 0), (9, 9, 9))
