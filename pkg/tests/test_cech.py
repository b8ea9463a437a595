import numpy as np
import pytest

from hopfion.cech import (
    PrimaryClass, coboundary, cochain_value, cocycle_class, cocycle_defect, divisibility,
    equalize_cocycles, primary_class, standard_cover, transition_angles,
)
from hopfion.errors import DomainError, IntegralityFailure
from hopfion.genmaps import gen_constant, gen_t3
from hopfion.grid import box, torus


@pytest.fixture(scope="module")
def cover():
    return standard_cover(torus(16))


def test_standard_cover_shape(cover):
    assert len(cover) == 27
    assert cover.covers_every_vertex()
    assert len(cover.pairs) == 27 * 26 // 2
    # every pair of charts overlaps in a box
    for pq in cover.pairs[:40]:
        assert cover.overlap_indices(pq) is not None
    # three different arcs on one axis have no common point
    idx = {lab: i for i, lab in enumerate(cover.labels)}
    assert cover.overlap_indices((idx[(0, 0, 0)], idx[(1, 0, 0)], idx[(2, 0, 0)])) is None
    with pytest.raises(DomainError):
        standard_cover(box(16))


def test_cochain_value_is_alternating():
    c = {(1, 2, 3): 5}
    assert cochain_value(c, (1, 2, 3)) == 5
    assert cochain_value(c, (2, 1, 3)) == -5
    assert cochain_value(c, (2, 3, 1)) == 5
    assert cochain_value(c, (1, 1, 3)) == 0


def test_coboundary_is_closed_and_classless(cover, rng):
    gamma = {pq: int(v) for pq, v in zip(cover.pairs, rng.integers(-3, 4, len(cover.pairs)))}
    n = coboundary(gamma, cover)
    assert cocycle_defect(n, cover) == 0
    assert cocycle_class(n, cover) == (0, 0, 0)


def test_equalize_cocycles(cover, rng):
    gamma = {pq: int(v) for pq, v in zip(cover.pairs, rng.integers(-2, 3, len(cover.pairs)))}
    m = {t: 0 for t in cover.triples}
    n = coboundary(gamma, cover)
    found = equalize_cocycles(n, m, cover)
    assert coboundary(found, cover) == n


def test_primary_class_of_generator():
    phi = gen_t3([[1, 0, 0], [0, 1, 0]], torus(16))
    cls = primary_class(phi)
    assert cls.snapped == (0, 0, 1)
    assert cls.cocycle_class == cls.snapped
    assert cls.gap < 1e-10
    rep = cls.cech.report()
    assert rep["charts"] == 27 and rep["integrality_gap"] < 0.1
    assert rep["circle_deviation"] < 1e-10


def test_constant_field_has_trivial_cocycle():
    phi = gen_constant((0, 0, 1, 0), "S2", torus(16))
    cech = transition_angles(phi)
    cls = primary_class(phi)
    assert cls.snapped == (0, 0, 0) and cls.cocycle_class == (0, 0, 0)
    assert max(abs(v).max() for v in cech.theta.values()) < 1e-10


def test_underresolved_class_fails_loudly():
    with pytest.raises(IntegralityFailure):
        primary_class(gen_t3([[3, 1, 2], [-5, 0, -2]], torus(16)))


def test_divisibility():
    assert divisibility((0, 0, 0)) == 0
    assert divisibility((-2, -4, 6)) == 2
    assert divisibility(PrimaryClass((0, 3, 0), (0.0, 3.0, 0.0), 0.0)) == 3
    assert np.gcd(4, 6) == divisibility((4, 6, 0))
