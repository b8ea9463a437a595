"""Cech description of the primary invariant on the torus.

The torus is covered by 27 cube charts, three overlapping arcs per axis.
On every chart the field phi has a local lift u_p, and on an overlap the
two lifts differ by a circle-valued function::

    u_p = lambda_pq u_q,    lambda_pq = exp(2 pi i theta_pq).

On a triple overlap ``n_pqr = theta_qr + theta_rp + theta_pq`` is an integer,
and the integer cocycle n represents the class of phi^* mu_S2 in H^2.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .elliptic import CubeChart
from .errors import ClassMismatch, DomainError, IntegralityFailure, UnwrapInconsistent
from .grid import Field, Lattice3
from .lift import LiftResult, align_lift, lattice_periods, lift_chart
from .quat import qconj, qmul

INTEGRALITY_TOL = 0.25
UNWRAP_TOL = 1e-3
ARCS = 3
ARC_FRACTION = 0.6


# ---------------------------------------------------------------------------
# the cover
# ---------------------------------------------------------------------------

def _arc_indices(start: int, length: int, n: int) -> np.ndarray:
    return (start + np.arange(length)) % n


def _arc_overlap(arcs, labels, n: int) -> np.ndarray:
    """Global indices shared by the given arcs, in the cyclic order of the first.

    Overlaps of at most two distinct arcs of the standard cover are single
    arcs, so the result is contiguous along the circle.
    """
    first = arcs[labels[0]]
    idx = _arc_indices(first[0], first[1], n)
    keep = np.ones(idx.size, dtype=bool)
    for lab in labels[1:]:
        s, m = arcs[lab]
        keep &= ((idx - s) % n) < m
    return idx[keep]


@dataclass
class ChartCover:
    """Cube charts on the torus with their nonempty overlaps.

    Chart ``p`` is labelled by ``labels[p] = (a1, a2, a3)``, the arc chosen on
    each axis. ``pairs``, ``triples`` and ``quads`` list the index tuples
    (increasing) of charts with nonempty common intersection.
    """

    lattice: Lattice3
    arcs: list
    labels: list
    charts: list
    pairs: list = field(default_factory=list)
    triples: list = field(default_factory=list)
    quads: list = field(default_factory=list)

    def __len__(self):
        return len(self.charts)

    def overlap_indices(self, charts) -> tuple | None:
        """Per-axis global index arrays of the common overlap, or None if empty."""
        out = []
        for d in range(3):
            labs = [self.labels[p][d] for p in charts]
            distinct = sorted(set(labs))
            if len(distinct) > 2:
                return None
            idx = _arc_overlap(self.arcs[d], [labs[0]] + [x for x in distinct if x != labs[0]],
                               self.lattice.dims[d])
            if idx.size == 0:
                return None
            out.append(idx)
        return tuple(out)

    def local_indices(self, p: int, global_idx) -> tuple:
        """Chart-local index arrays of a set of global per-axis indices."""
        st = self.charts[p].start
        return tuple((g - s) % n for g, s, n in zip(global_idx, st, self.lattice.dims))

    def covers_every_vertex(self) -> bool:
        hit = np.zeros(self.lattice.dims, dtype=bool)
        for c in self.charts:
            hit |= c.mask()
        return bool(hit.all())


def standard_cover(lattice: Lattice3) -> ChartCover:
    """27-chart cover: three arcs per axis starting at round(a n/3), length round(0.6 n).

    Any two arcs on an axis meet in a single arc, while all three have no
    common point. Consequently every pairwise chart overlap is a nonempty
    box, and a set of charts has a common point exactly when on each axis it
    uses at most two distinct arcs.
    """
    if not lattice.is_torus:
        raise DomainError("the standard cover is defined on the torus only")
    arcs = []
    for n in lattice.dims:
        length = int(round(ARC_FRACTION * n))
        arcs.append([(int(round(a * n / ARCS)), length) for a in range(ARCS)])
    labels = list(itertools.product(range(ARCS), repeat=3))
    charts = [CubeChart(lattice, tuple(arcs[d][lab[d]][0] for d in range(3)),
                        tuple(arcs[d][lab[d]][1] for d in range(3))) for lab in labels]
    cover = ChartCover(lattice, arcs, labels, charts)
    nc = len(charts)

    def ok(group):
        return all(len({labels[p][d] for p in group}) <= 2 for d in range(3))

    cover.pairs = [pq for pq in itertools.combinations(range(nc), 2)]
    cover.triples = [t for t in itertools.combinations(range(nc), 3) if ok(t)]
    cover.quads = [t for t in itertools.combinations(range(nc), 4) if ok(t)]
    return cover


# ---------------------------------------------------------------------------
# transition functions and the cocycle
# ---------------------------------------------------------------------------

@dataclass
class CechData:
    """Local lifts, transition angles and (after :func:`cocycle`) the cocycle.

    ``theta[(p, q)]`` (p < q) is the unwrapped angle field, in turns, on the
    overlap box ``overlaps[(p, q)]``; ``theta_qp = -theta_pq`` is implied.
    """

    cover: ChartCover
    lifts: list
    theta: dict
    overlaps: dict
    circle_deviation: float
    unwrap_defect: float
    unwrap_winding: float
    n: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)
    integrality_gap: float = float("nan")
    vertex_gap: float = float("nan")
    constancy_gap: float = float("nan")

    def theta_on(self, p: int, q: int, global_idx) -> np.ndarray:
        """theta_pq restricted to a sub-box of the (p, q) overlap."""
        if p == q:
            return np.zeros(tuple(len(g) for g in global_idx))
        a, b = (p, q) if p < q else (q, p)
        base = self.overlaps[(a, b)]
        sel = []
        for g, full in zip(global_idx, base):
            pos = {int(v): i for i, v in enumerate(full)}
            sel.append(np.array([pos[int(v)] for v in g]))
        vals = self.theta[(a, b)][np.ix_(*sel)]
        return vals if p < q else -vals

    def report(self) -> dict:
        return {
            "charts": len(self.cover),
            "pairs": len(self.cover.pairs),
            "triples": len(self.cover.triples),
            "circle_deviation": self.circle_deviation,
            "unwrap_defect": self.unwrap_defect,
            "integrality_gap": self.integrality_gap,
            "vertex_gap": self.vertex_gap,
            "constancy_gap": self.constancy_gap,
            "nonzero_cocycle": {",".join(map(str, k)): v for k, v in self.n.items() if v != 0},
            "lift_conjugation_max": max(r.conjugation for r in self.lifts),
        }


def chart_lifts(phi: Field, cover: ChartCover) -> list[LiftResult]:
    """Lift phi on every chart of the cover.

    The developed lifts are aligned pointwise (:func:`hopfion.lift.align_lift`)
    so that transition functions are exactly circle valued. The residual of
    the developed lift, before alignment, is kept in ``conjugation``.
    """
    out = []
    for chart in cover.charts:
        res = lift_chart(phi, chart, check_closed=False)
        vals, _ = align_lift(res.u.values, chart.extract(phi.values))
        out.append(LiftResult(res.u.with_values(vals, check=False), res.conjugation,
                              res.path_consistency, res.flatness, chart, res.holonomy))
    return out


def transition_angles(phi: Field, cover: ChartCover | None = None,
                      lifts: list[LiftResult] | None = None) -> CechData:
    """theta_pq on every overlap, from lambda_pq = u_p u_q^{-1}.

    The principal angle is taken at the overlap's first vertex and unwrapped
    along a breadth-first spanning tree with increments in (-1/2, 1/2].
    """
    if cover is None:
        cover = standard_cover(phi.lattice)
    if lifts is None:
        lifts = chart_lifts(phi, cover)
    theta, overlaps = {}, {}
    dev = frac = wind = 0.0
    for p, q in cover.pairs:
        g = cover.overlap_indices((p, q))
        up = lifts[p].u.values[np.ix_(*cover.local_indices(p, g))]
        uq = lifts[q].u.values[np.ix_(*cover.local_indices(q, g))]
        lam = qmul(up, qconj(uq))
        dev = max(dev, float(np.max(np.hypot(lam[..., 2], lam[..., 3]))))
        ang = np.arctan2(lam[..., 1], lam[..., 0]) / (2.0 * np.pi)
        out, f, w = kernels.bfs_unwrap(np.ascontiguousarray(ang), np.ones(ang.shape, dtype=bool), (0, 0, 0))
        if f > UNWRAP_TOL:
            raise UnwrapInconsistent(f"non-integer cycle defect {f:.3g} on overlap {(p, q)}")
        frac, wind = max(frac, f), max(wind, w)
        theta[(p, q)] = out
        overlaps[(p, q)] = g
    return CechData(cover, lifts, theta, overlaps, dev, frac, wind)


def cocycle(cech: CechData, tol: float = INTEGRALITY_TOL) -> dict:
    """Snap n_pqr = theta_qr + theta_rp + theta_pq on every triple overlap.

    The median over the overlap is rounded. The integrality gap is the
    largest distance of a median from its integer, the vertex gap the
    largest distance of any vertex value, and the constancy gap the largest
    in-overlap spread. The snapped cocycle is then checked for closedness.
    """
    n, raw = {}, {}
    gap = vgap = spread = 0.0
    for p, q, r in cech.cover.triples:
        g = cech.cover.overlap_indices((p, q, r))
        vals = cech.theta_on(q, r, g) + cech.theta_on(r, p, g) + cech.theta_on(p, q, g)
        med = float(np.median(vals))
        k = int(round(med))
        n[(p, q, r)] = k
        raw[(p, q, r)] = med
        gap = max(gap, abs(med - k))
        vgap = max(vgap, float(np.max(np.abs(vals - k))))
        spread = max(spread, float(np.max(vals) - np.min(vals)))
    cech.n, cech.raw = n, raw
    cech.integrality_gap, cech.vertex_gap, cech.constancy_gap = gap, vgap, spread
    if gap >= tol:
        raise IntegralityFailure(f"cocycle integrality gap {gap:.3f}")
    bad = cocycle_defect(n, cech.cover)
    if bad:
        raise IntegralityFailure(f"snapped cocycle is not closed on {bad} quadruple overlaps")
    return n


def cochain_value(c: dict, simplex) -> int:
    """Value of an alternating cochain on an ordered simplex."""
    if len(set(simplex)) < len(simplex):
        return 0
    order = sorted(range(len(simplex)), key=lambda i: simplex[i])
    key = tuple(simplex[i] for i in order)
    # parity of the sorting permutation
    sign, seen = 1, [False] * len(order)
    for i in range(len(order)):
        if not seen[i]:
            j, length = i, 0
            while not seen[j]:
                seen[j] = True
                j = order[j]
                length += 1
            if length % 2 == 0:
                sign = -sign
    return sign * c.get(key, 0)


def cocycle_defect(n: dict, cover: ChartCover) -> int:
    """Number of quadruple overlaps violating n_pqr - n_lqr + n_lpr - n_lpq = 0."""
    bad = 0
    for l, p, q, r in cover.quads:
        if n[(p, q, r)] - n[(l, q, r)] + n[(l, p, r)] - n[(l, p, q)] != 0:
            bad += 1
    return bad


def coboundary(gamma: dict, cover: ChartCover) -> dict:
    """(delta gamma)_pqr = gamma_qr + gamma_rp + gamma_pq on triple overlaps."""
    return {(p, q, r): cochain_value(gamma, (q, r)) + cochain_value(gamma, (r, p)) + cochain_value(gamma, (p, q))
            for p, q, r in cover.triples}


# ---------------------------------------------------------------------------
# the class
# ---------------------------------------------------------------------------

@dataclass
class PrimaryClass:
    """Periods (m1, m2, m3) of phi^* mu_S2 over the coordinate 2-tori."""

    snapped: tuple
    raw: tuple
    gap: float
    cocycle_class: tuple | None = None
    cech: CechData | None = None

    def as_dict(self) -> dict:
        out = {"snapped": list(self.snapped), "raw": list(self.raw), "gap": self.gap,
               "divisibility": divisibility(self)}
        if self.cocycle_class is not None:
            out["cocycle_class"] = list(self.cocycle_class)
        return out


# orientation of the shuffle 2-cycles relative to the period route; fixed
# once by comparing the two routes on the class (1, 0, 0) generator
CYCLE_SIGN = 1


def class_periods(phi: Field) -> tuple[np.ndarray, np.ndarray]:
    """Raw periods of the lattice area form, averaged over all slices."""
    raw = lattice_periods(phi)
    return raw, np.rint(raw)


def cocycle_class(n: dict, cover: ChartCover) -> tuple[int, int, int]:
    """Evaluate the cocycle on the three coordinate 2-cycles of the nerve.

    For axes (p, q) = (d+1, d+2) the 2-cycle is the sum over squares
    [a, b] x [c, e] of the circle nerves (edges 0-1, 1-2, 2-0) triangulated
    as [(a,c),(b,c),(b,e)] - [(a,c),(a,e),(b,e)], with the arc on axis d
    fixed at 0.
    """
    index = {lab: i for i, lab in enumerate(cover.labels)}
    edges = [(0, 1), (1, 2), (2, 0)]
    out = []
    for dd in range(3):
        p, q = (dd + 1) % 3, (dd + 2) % 3

        def chart(x, y):
            lab = [0, 0, 0]
            lab[p], lab[q] = x, y
            return index[tuple(lab)]

        total = 0
        for a, b in edges:
            for c, e in edges:
                total += cochain_value(n, (chart(a, c), chart(b, c), chart(b, e)))
                total -= cochain_value(n, (chart(a, c), chart(a, e), chart(b, e)))
        out.append(CYCLE_SIGN * total)
    return tuple(out)


def primary_class(phi: Field, with_cocycle: bool = True, tol: float = INTEGRALITY_TOL) -> PrimaryClass:
    """Primary class of phi on the torus by periods, cross-checked by the cocycle."""
    if not phi.lattice.is_torus:
        raise DomainError("primary_class needs a torus field")
    raw, snapped = class_periods(phi)
    gap = float(np.max(np.abs(raw - snapped)))
    if gap >= tol:
        raise IntegralityFailure(f"class periods {np.round(raw, 3).tolist()} are not integral")
    cls = PrimaryClass(tuple(int(v) for v in snapped), tuple(float(v) for v in raw), gap)
    if with_cocycle:
        cech = transition_angles(phi)
        n = cocycle(cech, tol)
        cls.cocycle_class = cocycle_class(n, cech.cover)
        cls.cech = cech
    return cls


def divisibility(cls: PrimaryClass | tuple) -> int:
    """gcd of the class entries (0 for the zero class)."""
    vals = cls.snapped if isinstance(cls, PrimaryClass) else cls
    g = 0
    for v in vals:
        g = math.gcd(g, abs(int(v)))
    return g


# ---------------------------------------------------------------------------
# matching two cocycles
# ---------------------------------------------------------------------------

def _propagate(target: dict, cover: ChartCover, gamma: dict) -> bool:
    """Fill unknown gamma_pq from triangles with two known edges; True if any progress."""
    progress = False
    for p, q, r in cover.triples:
        e = [(q, r), (p, r), (p, q)]
        unknown = [x for x in e if x not in gamma]
        if len(unknown) != 1:
            continue
        # target_pqr = gamma_qr - gamma_pr + gamma_pq
        coef = {(q, r): 1, (p, r): -1, (p, q): 1}
        rest = target[(p, q, r)] - sum(coef[x] * gamma[x] for x in e if x in gamma)
        x = unknown[0]
        gamma[x] = coef[x] * rest
        progress = True
    return progress


def equalize_cocycles(n: dict, m: dict, cover: ChartCover) -> dict:
    """Integer gamma with (n - m)_pqr = gamma_qr + gamma_rp + gamma_pq.

    Gauge gamma_0q = 0, then every remaining edge is forced by a triangle
    whose other two edges are known. Edges left free after propagation span
    H^1 of the nerve; they are set to 0 (further small values are tried if
    that fails) and the result is verified by substitution.
    """
    target = {t: n[t] - m[t] for t in cover.triples}
    nc = len(cover)
    base = {(0, q): 0 for q in range(1, nc)}
    free = []

    def solve(choices):
        gamma = dict(base)
        k = 0
        while True:
            while _propagate(target, cover, gamma):
                pass
            missing = [pq for pq in cover.pairs if pq not in gamma]
            if not missing:
                return gamma
            if k >= len(free):
                free.append(missing[0])
            gamma[missing[0]] = choices[k] if k < len(choices) else 0
            k += 1

    gamma = solve(())
    if coboundary(gamma, cover) == target:
        return gamma
    for choices in itertools.product(range(-2, 3), repeat=max(len(free), 1)):
        gamma = solve(choices)
        if coboundary(gamma, cover) == target:
            return gamma
    raise ClassMismatch("the cocycles are not cohomologous (no integer gamma exists)")
