"""Integer invariants of lattice fields and the energy descent loop.

* ``degree``: integral of u^* omega_S3 for S3 fields.
* ``hopf``: integral of theta ^ d theta, theta = (1/2 pi) <u^{-1} du, phi>, u a lift.
* ``upsilon``: degree of an intertwining map, reduced modulo 2m where m is
  the divisibility of the common primary class.

Raw values are snapped to the nearest integer; a gap of 0.25 or more marks
the report ``LOW_CONFIDENCE`` instead of failing.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .cech import class_periods, divisibility
from .errors import ClassMismatch, StepFailure
from .forms import (DiscreteForm, PAIRS, d, integrate, maurer_cartan, pullback_vol3, theta_form,
                    vertex_weights, wedge)
from .grid import Field, shell_mask
from .intertwine import IntertwineResult, gauge_twist, intertwine_cech, intertwine_trivial
from .lift import align_lift, lift_chart

SNAP_TOL = 0.25
# Hopf(phi) = +deg(u) for the lift u of phi, and the sign of theta ^ d theta
# is chosen so that the standard Hopf map has invariant +1
ORIENTATION = 1.0
RECORD_EVERY = 50
MAX_HALVINGS = 30


@dataclass
class InvariantReport:
    name: str
    raw: float
    snapped: int
    gap: float
    modulus: int = 0
    residue: int | None = None
    confidence: str = "OK"
    diagnostics: dict = field(default_factory=dict)
    grid: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return asdict(self)

    def to_json(self, **kw) -> str:
        return json.dumps(self.as_dict(), **kw)


def grid_info(lattice) -> dict:
    dom = lattice.domain
    if lattice.is_torus:
        domain = {"type": "torus", "periods": list(dom.periods)}
    else:
        domain = {"type": "box", "R": dom.R, "far_value": list(dom.far_value)}
    return {"dims": list(lattice.dims), "domain": domain}


def snap(name: str, raw: float, lattice, modulus: int = 0, diagnostics=None) -> InvariantReport:
    k = int(np.rint(raw))
    gap = abs(raw - k)
    residue = k % modulus if modulus > 0 else None
    conf = "LOW_CONFIDENCE" if gap >= SNAP_TOL else "OK"
    return InvariantReport(name, float(raw), k, float(gap), modulus, residue, conf,
                           dict(diagnostics or {}), grid_info(lattice))


def degree(u: Field, scheme: str = "geodesic") -> InvariantReport:
    """Degree of an S3 field: integral of the pulled-back normalised volume form."""
    vol = pullback_vol3(u, scheme=scheme)
    return snap("degree", integrate(vol), u.lattice, diagnostics={"scheme": scheme})


def global_lift(phi: Field):
    """Lift of phi over the whole box or (zero-class) torus, aligned exactly to phi.

    Returns ``(u, lift_result)``; ``u`` satisfies u^{-1} i u = phi to rounding.
    """
    res = lift_chart(phi, check_closed=False)
    vals, angle = align_lift(res.u.values, phi.values)
    u = res.u.with_values(vals, check=False)
    res.alignment_angle = angle
    return u, res


def hopf(phi: Field, lift=None) -> InvariantReport:
    """Hopf invariant of an S2 field on a box, or on the torus with zero class."""
    if lift is None:
        u, res = global_lift(phi)
        diag = res.diagnostics()
        diag["alignment_angle"] = res.alignment_angle
    else:
        u = lift
        diag = {}
    theta = theta_form(u, phi)
    raw = ORIENTATION * integrate(wedge(theta, d(theta, order=4)))
    diag["lift_degree"] = integrate(pullback_vol3(u))
    return snap("hopf", raw, phi.lattice, diagnostics=diag)


def _classes(phi: Field, psi: Field):
    if not phi.lattice.is_torus:
        return (0, 0, 0)
    a = class_periods(phi)[1].astype(int)
    b = class_periods(psi)[1].astype(int)
    if tuple(a) != tuple(b):
        raise ClassMismatch(f"classes differ: {tuple(a)} vs {tuple(b)}")
    return tuple(int(v) for v in a)


def intertwiner(phi: Field, psi: Field) -> tuple[IntertwineResult, tuple]:
    """Phi with psi = Phi phi Phi^{-1}, by global lifts or by Cech gluing."""
    cls = _classes(phi, psi)
    if any(cls):
        return intertwine_cech(psi, phi), cls
    u, _ = global_lift(psi)
    v, _ = global_lift(phi)
    return intertwine_trivial(u, v, psi, phi), cls


def upsilon(phi: Field, psi: Field, twist: Field | None = None) -> InvariantReport:
    """Degree of Phi with psi = Phi phi Phi^{-1}, modulo twice the divisibility.

    ``twist`` (an S1 field lambda) replaces Phi by Phi q(phi, lambda), which
    still intertwines and shifts the degree by twice class . winding(lambda).
    """
    res, cls = intertwiner(phi, psi)
    if twist is not None:
        res = gauge_twist(res, phi, twist, psi)
    modulus = 2 * divisibility(cls)
    rep = snap("upsilon", integrate(pullback_vol3(res.Phi)), phi.lattice, modulus, res.report())
    rep.diagnostics["class"] = list(cls)
    return rep


# ---------------------------------------------------------------------------
# pullback and d commute
# ---------------------------------------------------------------------------

def _default_f(y):
    out = np.array(y, dtype=float, copy=True)
    out[..., 0] = 0.0
    return out


def _divergence(f, y, eps=1e-5):
    """sum_l X_l(f^l)(y), X_l the left-invariant field y e_l, by central differences."""
    from .quat import qconj, qexp_array

    total = np.zeros(y.shape[:-1])
    for l in range(3):
        v = np.zeros(3)
        v[l] = eps
        step = qexp_array(v)
        fp = f(_right(y, step))
        fm = f(_right(y, qconj(step)))
        total += (fp[..., l + 1] - fm[..., l + 1]) / (2 * eps)
    return total


def _right(y, q):
    from .quat import qmul

    return qmul(y, np.broadcast_to(q, y.shape))


@dataclass
class CommuteResidual:
    max: float
    integrated: float
    scale: float

    def as_dict(self) -> dict:
        return asdict(self)


def commute_check(u: Field, f=None, order: int = 4) -> CommuteResidual:
    """Compare u^*(d <f, y^-1 dy ^ y^-1 dy>) with d(u^* <f, y^-1 dy ^ y^-1 dy>).

    On S3, d <f, theta ^ theta> = (1/3) sum_l X_l(f^l) <theta, theta ^ theta>,
    so the left side is evaluated pointwise; the right side differentiates
    the pulled-back 2-form <f(u), a ^ a> with the lattice d. Both use the
    same a = u^{-1} du: fourth-order geodesic differences with the
    fourth-order d by default, plain central differences with ``order=2``.
    ``integrated`` is the L1 norm of the difference and ``scale`` the L1 norm
    of the left side.
    """
    a = maurer_cartan(u, scheme="geodesic" if order == 4 else "central")
    aa = wedge(a, a)
    vals = u.values
    if f is None:
        div = 3.0 * vals[..., 0]
        fy = _default_f(vals)
    else:
        div = _divergence(f, vals)
        fy = f(vals)
    left = (div / 3.0) * _pair3(a, aa)
    two = DiscreteForm(2, np.sum(aa.comps[..., 1:] * fy[None, ..., 1:], axis=-1), u.lattice)
    right = d(two, order=order).comps[0]
    w = vertex_weights(u.lattice) * u.lattice.cell_volume
    diff = np.abs(left - right)
    return CommuteResidual(float(diff.max()), float(np.sum(diff * w)), float(np.sum(np.abs(left) * w)))


def _pair3(a: DiscreteForm, b: DiscreteForm) -> np.ndarray:
    """<a ^ b> for a 1-form a and 2-form b with the Euclidean pairing on Im H."""
    out = 0.0
    for c, (p, q) in enumerate(PAIRS):
        m = 3 - p - q
        out = out + np.sum(a.comps[m][..., 1:] * b.comps[c][..., 1:], axis=-1)
    return out


# ---------------------------------------------------------------------------
# relaxation
# ---------------------------------------------------------------------------

def _forward(p: np.ndarray, d: int, wrap: bool) -> np.ndarray:
    """phi(x + e_d) - phi(x); zero on the last box layer."""
    if wrap:
        return np.roll(p, -1, axis=d) - p
    out = np.zeros_like(p)
    hi = [slice(None)] * 3
    lo = [slice(None)] * 3
    hi[d], lo[d] = slice(1, None), slice(None, -1)
    out[tuple(lo)] = p[tuple(hi)] - p[tuple(lo)]
    return out


def _forward_adjoint(g: np.ndarray, d: int, wrap: bool) -> np.ndarray:
    """Transpose of :func:`_forward`."""
    if wrap:
        return np.roll(g, 1, axis=d) - g
    out = np.zeros_like(g)
    hi = [slice(None)] * 3
    lo = [slice(None)] * 3
    hi[d], lo[d] = slice(1, None), slice(None, -1)
    out[tuple(lo)] -= g[tuple(lo)]
    out[tuple(hi)] += g[tuple(lo)]
    return out


def faddeev_gradient(phi: Field) -> tuple[float, np.ndarray]:
    """Compact lattice Faddeev energy and its exact gradient in the values.

    E = sum_x h^3 [ sum_d |F_d|^2 + sum_{d<e} |F_d x F_e|^2 ] with the forward
    differences F_d = (phi(x + e_d) - phi(x)) / h_d on links and plaquette
    corners. Central differences would split the lattice into eight
    decoupled sublattices, along which descent can unwind a soliton at no
    cost; the forward stencil has no such null directions.
    """
    lat = phi.lattice
    wrap = lat.is_torus
    h = np.asarray(lat.spacing)
    vol = float(np.prod(h))
    p = phi.values[..., 1:]
    F = np.stack([_forward(p, dd, wrap) / h[dd] for dd in range(3)])
    n2 = np.sum(F * F, axis=-1)
    energy = vol * float(n2.sum())
    G = 2.0 * F
    for a_, b_ in PAIRS:
        c = np.cross(F[a_], F[b_])
        energy += vol * float(np.sum(c * c))
        fab = np.sum(F[a_] * F[b_], axis=-1, keepdims=True)
        G[a_] += 2.0 * (n2[b_][..., None] * F[a_] - fab * F[b_])
        G[b_] += 2.0 * (n2[a_][..., None] * F[b_] - fab * F[a_])
    grad = np.zeros_like(p)
    for dd in range(3):
        grad += _forward_adjoint(G[dd], dd, wrap) * (vol / h[dd])
    return energy, grad


def _invariant_record(phi: Field, step: int) -> dict:
    rec = {"step": step}
    if phi.lattice.is_torus:
        raw, snapped = class_periods(phi)
        rec["class"] = [int(v) for v in snapped]
        rec["class_raw"] = [float(v) for v in raw]
        if not np.any(snapped):
            h = hopf(phi)
            rec["hopf"], rec["hopf_raw"] = h.snapped, h.raw
    else:
        h = hopf(phi)
        rec["hopf"], rec["hopf_raw"] = h.snapped, h.raw
    return rec


@dataclass
class RelaxResult:
    phi: Field
    energy: list
    invariants: list
    step_sizes: list

    def class_constant(self) -> bool:
        keys = ("class", "hopf")
        for k in keys:
            vals = [r[k] for r in self.invariants if k in r]
            if len({tuple(v) if isinstance(v, list) else v for v in vals}) > 1:
                return False
        return True


def relax(phi: Field, steps: int = 500, step_size: float | None = None,
          record_every: int = RECORD_EVERY) -> RelaxResult:
    """Projected gradient descent on the Faddeev energy with backtracking.

    Each step moves phi along minus the tangential part of the L2 gradient
    and renormalises; the step is halved until the energy does not
    increase (at most 30 times). On a box the two outer shells stay fixed.
    """
    lat = phi.lattice
    vol = lat.cell_volume
    frozen = None if lat.is_torus else shell_mask(lat, 2)
    tau = 0.05 * min(lat.spacing) ** 2 if step_size is None else float(step_size)
    cur = phi
    energy, grad = faddeev_gradient(cur)
    trace, taus, records = [energy], [], [_invariant_record(cur, 0)]
    for it in range(1, steps + 1):
        p = cur.values[..., 1:]
        g = grad / vol
        g -= np.sum(g * p, axis=-1, keepdims=True) * p
        if frozen is not None:
            g[frozen] = 0.0
        for _ in range(MAX_HALVINGS + 1):
            q = p - tau * g
            q /= np.linalg.norm(q, axis=-1, keepdims=True)
            vals = np.zeros(cur.values.shape)
            vals[..., 1:] = q
            trial = cur.with_values(vals, check=False)
            e_new, grad_new = faddeev_gradient(trial)
            if e_new <= energy:
                break
            tau *= 0.5
        else:
            raise StepFailure(f"no descent after {MAX_HALVINGS} halvings at step {it}")
        cur, energy, grad = trial, e_new, grad_new
        trace.append(energy)
        taus.append(tau)
        if it % record_every == 0:
            records.append(_invariant_record(cur, it))
    return RelaxResult(cur, trace, records, taus)
