"""Intertwining maps: Phi with phi = Phi psi Phi^{-1}.

For fields with global lifts (zero class, or any box field) Phi = u^{-1} v.
Otherwise the local lifts on the standard cover are glued with a partition
of unity: with u_p = lambda_pq u_q and v_p = kappa_pq v_q, the local maps

    Phi_p = u_p^{-1} mu_p v_p,   mu_p = exp(2 pi i sigma_p),

agree on overlaps as soon as sigma_p - sigma_q = theta_pq - vartheta_pq - gamma_pq,
and sigma_p = sum_k rho_k beta_pk provides exactly that.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cech import (CechData, ChartCover, cocycle, equalize_cocycles, standard_cover,
                   transition_angles)
from .errors import ClassMismatch, GlueFailure
from .grid import Field
from .lift import LiftResult, align_lift
from .quat import frak_q_array, hopf_sigma_array, qconj, qmul

GLUE_TOL = 5e-2
GLUE_FAIL = 0.5


@dataclass
class IntertwineResult:
    """Phi with its conjugation and gluing residuals."""

    Phi: Field
    conjugation: float
    gluing: float = 0.0
    construction: str = "global_lift"
    diagnostics: dict = field(default_factory=dict)

    def report(self) -> dict:
        out = {"conjugation_residual": self.conjugation, "gluing_residual": self.gluing,
               "construction": self.construction}
        out.update(self.diagnostics)
        return out


def conjugation_residual(Phi: np.ndarray, phi: np.ndarray, psi: np.ndarray) -> float:
    """max |Phi psi Phi^{-1} - phi|."""
    return float(np.max(np.abs(qmul(qmul(Phi, psi), qconj(Phi)) - phi)))


def intertwine_trivial(u: LiftResult | Field, v: LiftResult | Field,
                       phi: Field | None = None, psi: Field | None = None) -> IntertwineResult:
    """Phi = u^{-1} v for global lifts u of phi and v of psi.

    When the fields are given, the lifts are first aligned pointwise to them
    so that the residual measures only rounding; otherwise phi and psi are
    taken as u^{-1} i u and v^{-1} i v.
    """
    uf = u.u if isinstance(u, LiftResult) else u
    vf = v.u if isinstance(v, LiftResult) else v
    uu, vv = uf.values, vf.values
    diag = {}
    if phi is not None:
        uu, diag["alignment_angle_phi"] = align_lift(uu, phi.values)
    if psi is not None:
        vv, diag["alignment_angle_psi"] = align_lift(vv, psi.values)
    Phi = qmul(qconj(uu), vv)
    Phi /= np.linalg.norm(Phi, axis=-1, keepdims=True)
    a = phi.values if phi is not None else hopf_sigma_array(uu)
    b = psi.values if psi is not None else hopf_sigma_array(vv)
    res = conjugation_residual(Phi, a, b)
    return IntertwineResult(Field(uf.lattice, Phi, "S3", check=False), res, 0.0, "global_lift", diag)


# ---------------------------------------------------------------------------
# partition of unity on the standard cover
# ---------------------------------------------------------------------------

def _bump(t):
    out = np.zeros_like(t)
    m = np.abs(t) < 1.0
    out[m] = np.exp(1.0 - 1.0 / (1.0 - t[m] ** 2))
    return out


def axis_weights(cover: ChartCover) -> list[np.ndarray]:
    """Per axis, an (arcs, n) array of normalised bump weights (sum 1 per index)."""
    out = []
    for d, n in enumerate(cover.lattice.dims):
        w = np.zeros((len(cover.arcs[d]), n))
        for a, (s, m) in enumerate(cover.arcs[d]):
            j = np.arange(m)
            half = (m - 1) / 2.0
            w[a, (s + j) % n] = _bump((j - half) / half)
        out.append(w / w.sum(axis=0, keepdims=True))
    return out


def partition_of_unity(cover: ChartCover) -> np.ndarray:
    """rho_k on the whole lattice, shape (charts, n1, n2, n3)."""
    w = axis_weights(cover)
    rho = np.empty((len(cover),) + cover.lattice.dims)
    for k, lab in enumerate(cover.labels):
        rho[k] = w[0][lab[0]][:, None, None] * w[1][lab[1]][None, :, None] * w[2][lab[2]][None, None, :]
    return rho


def _axis_loops(cover: ChartCover):
    index = {lab: i for i, lab in enumerate(cover.labels)}
    loops = []
    for d in range(3):
        ch = []
        for a in range(3):
            lab = [0, 0, 0]
            lab[d] = a
            ch.append(index[tuple(lab)])
        loops.append(ch)
    return loops


def _h1_cocycle(cover: ChartCover, d: int) -> dict:
    """Integer 1-cocycle with loop sum 1 along axis d (crossing arc 2 -> arc 0)."""
    z = {}
    for p, q in cover.pairs:
        ap, aq = cover.labels[p][d], cover.labels[q][d]
        if ap == 2 and aq == 0:
            z[(p, q)] = 1
        elif ap == 0 and aq == 2:
            z[(p, q)] = -1
    return z


def _value(c: dict, p: int, q: int):
    if p < q:
        return c.get((p, q), 0)
    return -c.get((q, p), 0)


def intertwine_cech(phi: Field, psi: Field, cover: ChartCover | None = None,
                    cech_phi: CechData | None = None, cech_psi: CechData | None = None,
                    glue_tol: float = GLUE_FAIL) -> IntertwineResult:
    """Glue Phi with phi = Phi psi Phi^{-1} from local lifts on the standard cover.

    The integer gauge gamma is fixed up to H^1 of the torus; that remaining
    freedom changes Phi by a twist of some winding and is fixed by making the
    loop sums of the overlap medians of beta along each axis lie in
    (-1/2, 1/2]. Raises :class:`ClassMismatch` when the classes differ and
    :class:`GlueFailure` when the gluing residual exceeds ``glue_tol``.
    """
    if cover is None:
        cover = standard_cover(phi.lattice)
    cp = cech_phi or transition_angles(phi, cover)
    cq = cech_psi or transition_angles(psi, cover)
    n = cp.n or cocycle(cp)
    m = cq.n or cocycle(cq)
    gamma = equalize_cocycles(n, m, cover)

    def beta(p, q):
        g = cover.overlap_indices((p, q))
        return cp.theta_on(p, q, g) - cq.theta_on(p, q, g) - _value(gamma, p, q)

    # remove the H^1 part: loop sums of medians along each axis
    med = {pq: float(np.median(beta(*pq))) for pq in cover.pairs}
    windings = []
    for d, (a, b, c) in enumerate(_axis_loops(cover)):
        loop = _value(med, a, b) + _value(med, b, c) + _value(med, c, a)
        w = int(round(loop))
        windings.append(w)
        if w:
            z = _h1_cocycle(cover, d)
            for pq in cover.pairs:
                gamma[pq] = gamma.get(pq, 0) + w * z.get(pq, 0)

    rho = partition_of_unity(cover)
    local = []
    for p, chart in enumerate(cover.charts):
        sig = np.zeros(chart.size)
        for k in range(len(cover)):
            if k == p:
                continue
            g = cover.overlap_indices((p, k))
            r = rho[k][np.ix_(*g)]
            if not np.any(r):
                continue
            sig[np.ix_(*cover.local_indices(p, g))] += r * beta(p, k)
        mu = np.zeros(chart.size + (4,))
        mu[..., 0] = np.cos(2 * np.pi * sig)
        mu[..., 1] = np.sin(2 * np.pi * sig)
        local.append(qmul(qmul(qconj(cp.lifts[p].u.values), mu), cq.lifts[p].u.values))

    glue = 0.0
    for p, q in cover.pairs:
        g = cover.overlap_indices((p, q))
        a = local[p][np.ix_(*cover.local_indices(p, g))]
        b = local[q][np.ix_(*cover.local_indices(q, g))]
        glue = max(glue, float(np.max(np.linalg.norm(a - b, axis=-1))))
    if glue > glue_tol:
        raise GlueFailure(f"gluing residual {glue:.3g} exceeds {glue_tol}")

    owner = np.argmax(rho, axis=0)
    Phi = np.empty(phi.lattice.dims + (4,))
    for p, chart in enumerate(cover.charts):
        sel = owner[np.ix_(*chart.index_arrays())] == p
        if not np.any(sel):
            continue
        gi = [ix for ix in np.nonzero(sel)]
        glob = tuple(chart.index_arrays()[d][gi[d]] for d in range(3))
        Phi[glob] = local[p][tuple(gi)]
    Phi /= np.linalg.norm(Phi, axis=-1, keepdims=True)
    res = conjugation_residual(Phi, phi.values, psi.values)
    diag = {"h1_windings": windings,
            "cocycle_gap_phi": cp.integrality_gap, "cocycle_gap_psi": cq.integrality_gap}
    return IntertwineResult(Field(phi.lattice, Phi, "S3", check=False), res, glue, "cech_glue", diag)


def gauge_twist(Phi: IntertwineResult | Field, psi: Field, lam: Field,
                phi: Field | None = None) -> IntertwineResult:
    """Phi' = Phi q(psi, lambda); q commutes with psi, so Phi' still intertwines."""
    base = Phi.Phi if isinstance(Phi, IntertwineResult) else Phi
    q = frak_q_array(psi.values, lam.values)
    new = qmul(base.values, q)
    new /= np.linalg.norm(new, axis=-1, keepdims=True)
    target = phi.values if phi is not None else qmul(qmul(base.values, psi.values), qconj(base.values))
    res = conjugation_residual(new, target, psi.values)
    tag = Phi.construction if isinstance(Phi, IntertwineResult) else "twist"
    glue = Phi.gluing if isinstance(Phi, IntertwineResult) else 0.0
    return IntertwineResult(base.with_values(new, check=False), res, glue, tag)


def check_classes(cls_phi, cls_psi):
    if tuple(cls_phi) != tuple(cls_psi):
        raise ClassMismatch(f"classes differ: {tuple(cls_phi)} vs {tuple(cls_psi)}")
