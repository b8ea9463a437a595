import numpy as np
import pytest

from hopfion.quat import (I, J, K, ONE, ImUnit, LieValue, Quaternion, UnitComplex, UnitQuaternion,
                          bracket, decompose, frak_q, frak_q_array, hopf_sigma, qexp, qexp_array,
                          qlog, qlog_array, qmul, rotate)
from hopfion.errors import AntipodalLog


def test_algebra_relations():
    assert np.allclose(qmul(I, J), K)
    assert np.allclose(qmul(J, K), I)
    assert np.allclose(qmul(K, I), J)
    assert np.allclose(qmul(I, I), -ONE)
    assert np.allclose(qmul(qmul(I, J), K), -ONE)


def test_identity_and_distributivity(rng):
    q = rng.standard_normal(4)
    assert np.allclose(qmul(ONE, q), q)
    assert np.allclose(qmul(q, ONE), q)
    # (1+i)(1+j) expanded by hand
    assert np.allclose(qmul(ONE + I, ONE + J), [1.0, 1.0, 1.0, 1.0])


def test_qmul_associative_and_normed(rng):
    p, q, r = rng.standard_normal((3, 50, 4))
    assert np.allclose(qmul(qmul(p, q), r), qmul(p, qmul(q, r)))
    assert np.allclose(np.linalg.norm(qmul(p, q), axis=-1),
                       np.linalg.norm(p, axis=-1) * np.linalg.norm(q, axis=-1))


def test_value_classes():
    a = Quaternion(1, 2, 3, 4)
    assert (a * a.inverse()).isclose(Quaternion(1, 0, 0, 0))
    u = UnitQuaternion(3, 0, 4, 0)
    assert abs(u.norm() - 1.0) < 1e-15
    x = ImUnit(0, 0, 2)
    assert x.isclose(LieValue(0, 0, 1))
    with pytest.raises(ValueError):
        ImUnit(0, 0, 0)
    z = UnitComplex(0.3) * UnitComplex(0.5)
    assert abs(z.angle - 0.8) < 1e-15


def test_exp_log():
    assert qexp(LieValue()).isclose(Quaternion(1, 0, 0, 0))
    assert qexp(LieValue(np.pi / 2, 0, 0)).isclose(Quaternion(0, 1, 0, 0))


def test_log_round_trip(rng):
    d = rng.standard_normal(3)
    v = 1.3 * d / np.linalg.norm(d)
    assert qlog(qexp(LieValue(*v))).isclose(LieValue(*v), 1e-12)
    vs = rng.standard_normal((200, 3))
    vs *= (3.0 * rng.random(200) / np.linalg.norm(vs, axis=-1))[:, None]
    assert np.allclose(qlog_array(qexp_array(vs)), vs, atol=1e-12)


def test_log_antipodal_guard():
    with pytest.raises(AntipodalLog):
        qlog_array(-ONE)


def test_hopf_sigma():
    assert hopf_sigma(Quaternion(1, 0, 0, 0)).isclose(LieValue(1, 0, 0))
    assert hopf_sigma(Quaternion(0, 0, 1, 0)).isclose(LieValue(-1, 0, 0))
    q = UnitQuaternion(0.3, -0.2, 0.5, 0.7)
    phase = qexp(LieValue(0.7, 0, 0))
    assert hopf_sigma(phase * q).isclose(hopf_sigma(q), 1e-12)


def test_rotate(rng):
    x = LieValue(0.2, -1.0, 0.4)
    assert rotate(Quaternion(1, 0, 0, 0), x).isclose(x)
    assert rotate(qexp(LieValue(0, 0, np.pi / 4)), LieValue(1, 0, 0)).isclose(LieValue(0, 1, 0), 1e-12)
    q = UnitQuaternion(*rng.standard_normal(4))
    assert abs(rotate(q, x).norm() - x.norm()) < 1e-12


def test_decompose():
    i, j = LieValue(1, 0, 0), LieValue(0, 1, 0)
    par, perp = decompose(i, i)
    assert par.isclose(i) and perp.isclose(LieValue())
    par, perp = decompose(j, i)
    assert par.isclose(LieValue()) and perp.isclose(j)
    par, perp = decompose(LieValue(1, 2, 0), i)
    assert par.isclose(i) and perp.isclose(LieValue(0, 2, 0))


def test_bracket_is_twice_cross(rng):
    a, b = rng.standard_normal((2, 10, 3))
    pa = np.concatenate([np.zeros((10, 1)), a], axis=-1)
    pb = np.concatenate([np.zeros((10, 1)), b], axis=-1)
    assert np.allclose(bracket(pa, pb)[..., 1:], 2 * np.cross(a, b))


def test_frak_q():
    x = ImUnit(0.3, 0.4, -0.5)
    assert frak_q(x, UnitComplex(0.0)).isclose(Quaternion(1, 0, 0, 0), 1e-12)
    lam = UnitComplex(1.1)
    assert frak_q(ImUnit(1, 0, 0), lam).isclose(Quaternion.from_array(lam.as_array()), 1e-12)
    assert frak_q(ImUnit(-1, 0, 0), UnitComplex(0.4)).isclose(
        Quaternion(np.cos(0.4), -np.sin(0.4), 0, 0), 1e-12)


def test_frak_q_commutes_with_x(rng):
    x = rng.standard_normal((100, 4))
    x[:, 0] = 0
    x /= np.linalg.norm(x, axis=-1, keepdims=True)
    a = rng.random(100) * 2 * np.pi
    lam = np.stack([np.cos(a), np.sin(a), 0 * a, 0 * a], axis=-1)
    q = frak_q_array(x, lam)
    assert np.allclose(qmul(q, x), qmul(x, q), atol=1e-12)
