"""Discrete nonlinear Poincare lemma.

Given phi: chart -> S2 and a real 1-form xi with d xi = -1/4 phi dphi ^ dphi,
the sp(1)-valued form a = 1/2 phi^{-1} dphi + phi xi is flat. Integrating it
along lattice paths (the developing map) gives u with u^{-1} du ~ a, and then
u^{-1} i u = phi up to truncation error.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .elliptic import CubeChart, area_form, poincare_primitive, solve_xi_torus
from .errors import HarmonicObstruction, LiftMismatch
from .forms import DiscreteForm, d, dfield, plaquette_area, wedge
from .grid import Field, Lattice3
from .quat import hopf_sigma_array, qconj, qexp_array, qmul, sigma_representative

FLAT_TOL = 0.5
LIFT_TOL = 5e-2
HARMONIC_TOL = 1e-3


@dataclass
class Connection:
    """sp(1)-valued 1-form with its flatness residual max|da + a ^ a|."""

    form: DiscreteForm
    residual: float


@dataclass
class LiftResult:
    """A lift u of phi (u^{-1} i u ~ phi) with its residuals."""

    u: Field
    conjugation: float
    path_consistency: float
    flatness: float = 0.0
    chart: CubeChart | None = None
    holonomy: np.ndarray | None = None
    xi: DiscreteForm | None = None

    def diagnostics(self) -> dict:
        out = {
            "conjugation_residual": self.conjugation,
            "path_consistency_residual": self.path_consistency,
            "flatness_residual": self.flatness,
        }
        if self.holonomy is not None:
            out["holonomy_angles"] = [float(v) for v in self.holonomy]
        return out


def flatness(a: DiscreteForm) -> float:
    """max |da + a ^ a| over vertices and plaquette orientations."""
    curv = d(a).comps + wedge(a, a).comps
    return float(np.max(np.sqrt(np.sum(curv * curv, axis=-1))))


def build_connection(phi: Field, xi: DiscreteForm) -> Connection:
    """a = 1/2 phi^{-1} dphi + phi xi, with tangent-projected differences of phi."""
    if xi.lattice != phi.lattice:
        raise ValueError("phi and xi live on different lattices")
    p = phi.values[None]
    D = dfield(phi).comps
    T = D - np.sum(D * p, axis=-1, keepdims=True) * p
    # phi^{-1} = -phi for unit imaginary phi
    a = -0.5 * qmul(p, T) + p * xi.comps[..., None]
    a[..., 0] = 0.0
    form = DiscreteForm(1, a, phi.lattice, "sp1")
    return Connection(form, flatness(form))


def _steps(a: np.ndarray, h, wrap: bool) -> list[np.ndarray]:
    """Edge transports exp(h * midpoint average of a_d) for each axis."""
    out = []
    for dd in range(3):
        nxt = np.roll(a[dd], -1, axis=dd)
        g = qexp_array(0.5 * h[dd] * (a[dd] + nxt)[..., 1:])
        out.append(g)
    return out


def _develop_order(steps, u0, shape, order) -> np.ndarray:
    u = np.zeros(shape + (4,))
    first = order[0]
    # seed line, then planes, then the full block
    sel = [0, 0, 0]
    sel[first] = slice(None)
    line = u[tuple(sel)]
    line[0] = u0
    kernels.axis_sweep(line, np.ascontiguousarray(steps[first][tuple(sel)]), 0)
    second = order[1]
    sel = [0, 0, 0]
    sel[first] = slice(None)
    sel[second] = slice(None)
    plane = u[tuple(sel)]
    pax = 0 if second < first else 1
    plane_steps = np.ascontiguousarray(steps[second][tuple(sel)])
    kernels.axis_sweep(plane, plane_steps, pax)
    kernels.axis_sweep(u, np.ascontiguousarray(steps[order[2]]), order[2])
    return u


def develop(a: DiscreteForm | Connection, u0=(1.0, 0.0, 0.0, 0.0), return_both: bool = False):
    """Developing map of a connection over its whole (local) lattice.

    Starts at index (0, 0, 0) with value ``u0`` and multiplies on the right by
    ``exp(h_d * abar_d)`` per edge, ``abar`` being the edge-midpoint average.
    Returns ``(u, path_consistency)`` where the second value compares the
    x1,x2,x3 sweep with the x3,x2,x1 sweep.
    """
    if isinstance(a, Connection):
        a = a.form
    lat = a.lattice
    comps = np.ascontiguousarray(a.comps)
    steps = _steps(comps, lat.spacing, lat.is_torus)
    u0 = np.asarray(u0, dtype=float)
    u0 = u0 / np.linalg.norm(u0)
    fwd = _develop_order(steps, u0, lat.dims, (0, 1, 2))
    bwd = _develop_order(steps, u0, lat.dims, (2, 1, 0))
    consistency = float(np.max(np.abs(fwd - bwd)))
    if return_both:
        return fwd, bwd, consistency
    return fwd, consistency


def lift_chart(phi: Field, chart: CubeChart | None = None, anchor_value=None,
               check_closed: bool = True) -> LiftResult:
    """Lift phi on a chart (or the whole domain) to u with u^{-1} i u ~ phi.

    On a box the chart defaults to the whole box. On the torus, passing no
    chart (or the full torus) requests a global lift, which exists only for
    zero primary class; a :class:`HarmonicObstruction` is raised otherwise.
    The returned field lives on the chart's local lattice.
    """
    lat = phi.lattice
    whole_torus = lat.is_torus and (chart is None or (chart.size == lat.dims and chart.start == (0, 0, 0)))
    if whole_torus:
        periods = lattice_periods(phi)
        if np.max(np.abs(periods)) > HARMONIC_TOL:
            raise HarmonicObstruction(
                f"global lift requested but the primary class periods are {np.round(periods, 4).tolist()}"
            )
        sol = solve_xi_torus(phi)
        local_phi, xi = phi, sol.xi
    else:
        if chart is None:
            chart = CubeChart.full(lat)
        local_phi = chart.restrict_field(phi) if (lat.is_torus or chart.size != lat.dims) else phi
        eta = area_form(local_phi)
        xi = poincare_primitive(eta, check=check_closed)
        xi = DiscreteForm(1, xi.comps, local_phi.lattice)
    conn = build_connection(local_phi, xi)
    phi0 = local_phi.values[0, 0, 0]
    u0 = sigma_representative(phi0) if anchor_value is None else np.asarray(anchor_value, float)
    u, consistency = develop(conn, u0)
    hol = None
    if whole_torus:
        u, hol = _remove_holonomy(u, conn.form, local_phi.lattice)
        # the phase shifts the phi-component of u^{-1} du by -alpha_d / L_d
        L = np.asarray(lat.domain.periods)
        xi = DiscreteForm(1, xi.comps - (hol / L)[:, None, None, None], xi.lattice)
    uf = Field(local_phi.lattice, u / np.linalg.norm(u, axis=-1, keepdims=True), "S3", check=False)
    conj = float(np.max(np.abs(hopf_sigma_array(uf.values) - local_phi.values)))
    return LiftResult(uf, conj, consistency, conn.residual, chart, hol, xi)


def lattice_periods(phi: Field) -> np.ndarray:
    """Periods of the plaquette area form over the coordinate 2-tori (integers up to rounding)."""
    L = phi.lattice.domain.periods
    a = plaquette_area(phi)
    return np.array([a.comps[c].mean() * L[(c + 1) % 3] * L[(c + 2) % 3] for c in range(3)])


def _remove_holonomy(u: np.ndarray, a: DiscreteForm, lat: Lattice3):
    """Make a developed map periodic by a left phase exp(-i sum alpha_d x_d/L_d).

    Going once around cycle d the developing map returns as lambda_d u with a
    constant unit complex lambda_d = exp(i alpha_d); the phase removes it.
    """
    steps = _steps(a.comps, lat.spacing, True)
    alphas = np.zeros(3)
    for dd in range(3):
        last = np.take(u, [-1], axis=dd)
        first = np.take(u, [0], axis=dd)
        wrapped = qmul(last, np.take(steps[dd], [-1], axis=dd))
        lam = qmul(wrapped, qconj(first))
        # average over the transverse face, then take the complex angle
        re = float(np.mean(lam[..., 0]))
        im = float(np.mean(lam[..., 1]))
        alphas[dd] = np.arctan2(im, re)
    x = [np.arange(lat.dims[0])[:, None, None] / lat.dims[0],
         np.arange(lat.dims[1])[None, :, None] / lat.dims[1],
         np.arange(lat.dims[2])[None, None, :] / lat.dims[2]]
    ang = -(alphas[0] * x[0] + alphas[1] * x[1] + alphas[2] * x[2])
    phase = np.zeros(ang.shape + (4,))
    phase[..., 0] = np.cos(ang)
    phase[..., 1] = np.sin(ang)
    return qmul(phase, u), alphas


def align_lift(u: np.ndarray, phi: np.ndarray) -> tuple[np.ndarray, float]:
    """Correct an approximate lift pointwise so that u^{-1} i u = phi exactly.

    With s = u^{-1} i u, the shortest-arc rotation r = (1 - phi s)/|1 - phi s|
    satisfies r s r^{-1} = phi, so u r^{-1} is an exact lift. The correction
    is continuous wherever s and phi are not antipodal; the largest
    correction angle (radians) is returned with the aligned values.
    """
    s = hopf_sigma_array(u)
    r = -qmul(phi, s)
    r[..., 0] += 1.0
    nr = np.linalg.norm(r, axis=-1, keepdims=True)
    if np.any(nr < 1e-6):
        raise LiftMismatch("lift is antipodal to the field somewhere; cannot align")
    r = r / nr
    out = qmul(u, qconj(r))
    out /= np.linalg.norm(out, axis=-1, keepdims=True)
    angle = float(np.max(2.0 * np.arccos(np.clip(r[..., 0], -1.0, 1.0))))
    return out, angle


def lift_uniqueness_check(u: LiftResult | Field, v: LiftResult | Field):
    """lambda = v u^{-1} per vertex, and its max distance from the circle C in H.

    Returns ``(lam_field, deviation)``; ``lam_field`` is the projection of
    lambda onto unit complex numbers.
    """
    uf = u.u if isinstance(u, LiftResult) else u
    vf = v.u if isinstance(v, LiftResult) else v
    lam = qmul(vf.values, qconj(uf.values))
    dev = float(np.max(np.sqrt(lam[..., 2] ** 2 + lam[..., 3] ** 2)))
    proj = lam.copy()
    proj[..., 2:] = 0.0
    n = np.linalg.norm(proj, axis=-1, keepdims=True)
    proj = np.where(n > 0, proj / np.where(n > 0, n, 1.0), np.array([1.0, 0, 0, 0]))
    return Field(uf.lattice, proj, "S1", check=False), dev
