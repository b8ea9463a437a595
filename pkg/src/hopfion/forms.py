"""Vertex-collocated discrete exterior calculus.

A k-form stores its components in a leading axis: one component for k = 0 and
k = 3, three for k = 1 (dx1, dx2, dx3) and k = 2 (dx2^dx3, dx3^dx1, dx1^dx2).
Scalar forms have component arrays of shape ``(c, n1, n2, n3)``; sp(1)- and
quaternion-valued forms carry a trailing axis of length 4.

Derivatives are central differences (periodic on the torus, with second-order
one-sided stencils on the two faces of a box). All wedge products are exact
pointwise algebra, so the algebraic identities hold to rounding and the only
truncation error comes from the difference operators.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import DegreeError, LiftMismatch
from .grid import Field, Lattice3
from .quat import I, qconj, qmul

NCOMP = (1, 3, 3, 1)
VALUE_KINDS = ("scalar", "sp1", "quaternion")
# 2-form component c is dx^{P[c][0]} ^ dx^{P[c][1]}
PAIRS = ((1, 2), (2, 0), (0, 1))


@dataclass
class DiscreteForm:
    """A k-form on a lattice.

    Attributes
    ----------
    degree : int
    comps : ndarray
        ``(c, n1, n2, n3)`` for scalar forms, ``(c, n1, n2, n3, 4)`` otherwise.
    lattice : Lattice3
    kind : {"scalar", "sp1", "quaternion"}
    residual : float
        Norm of whatever a projection discarded when the form was built
        (0 when nothing was projected away).
    """

    degree: int
    comps: np.ndarray
    lattice: Lattice3
    kind: str = "scalar"
    residual: float = dc_field(default=0.0)

    def __post_init__(self):
        if self.degree not in (0, 1, 2, 3):
            raise DegreeError(f"degree {self.degree} out of range")
        if self.kind not in VALUE_KINDS:
            raise ValueError(f"unknown value kind {self.kind!r}")
        self.comps = np.asarray(self.comps, dtype=float)
        want = (NCOMP[self.degree],) + self.lattice.dims
        if self.kind != "scalar":
            want = want + (4,)
        if self.comps.shape != want:
            raise ValueError(f"components of shape {self.comps.shape}, expected {want}")

    def __add__(self, other: "DiscreteForm") -> "DiscreteForm":
        _same(self, other)
        return DiscreteForm(self.degree, self.comps + other.comps, self.lattice, _join(self.kind, other.kind))

    def __sub__(self, other: "DiscreteForm") -> "DiscreteForm":
        _same(self, other)
        return DiscreteForm(self.degree, self.comps - other.comps, self.lattice, _join(self.kind, other.kind))

    def __neg__(self):
        return DiscreteForm(self.degree, -self.comps, self.lattice, self.kind)

    def scale(self, s) -> "DiscreteForm":
        """Multiply by a real scalar or a real 0-form array of shape dims."""
        s = np.asarray(s, dtype=float)
        if s.ndim == 3:
            s = s[None] if self.kind == "scalar" else s[None, ..., None]
        return DiscreteForm(self.degree, self.comps * s, self.lattice, self.kind)

    __mul__ = scale
    __rmul__ = scale

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.comps))) if self.comps.size else 0.0

    def real(self) -> "DiscreteForm":
        """Scalar part of a quaternion form (the discarded norm goes in ``residual``)."""
        if self.kind == "scalar":
            return self
        res = float(np.max(np.abs(self.comps[..., 1:])))
        return DiscreteForm(self.degree, self.comps[..., 0].copy(), self.lattice, "scalar", res)

    def imag(self) -> "DiscreteForm":
        """Imaginary part as an sp1 form (the discarded real part goes in ``residual``)."""
        if self.kind == "scalar":
            raise ValueError("scalar form has no imaginary part")
        c = self.comps.copy()
        res = float(np.max(np.abs(c[..., 0])))
        c[..., 0] = 0.0
        return DiscreteForm(self.degree, c, self.lattice, "sp1", res)


def _same(a: DiscreteForm, b: DiscreteForm):
    if a.degree != b.degree:
        raise DegreeError("degree mismatch")
    if a.lattice != b.lattice:
        raise ValueError("forms live on different lattices")


def _join(k1: str, k2: str) -> str:
    if k1 == k2:
        return k1
    if "quaternion" in (k1, k2) or {k1, k2} == {"scalar", "sp1"}:
        return "quaternion"
    return k1


def zero_form(lattice: Lattice3, values, kind: str | None = None) -> DiscreteForm:
    values = np.asarray(values, dtype=float)
    if kind is None:
        kind = "scalar" if values.shape == lattice.dims else "quaternion"
    return DiscreteForm(0, values[None], lattice, kind)


def top_form(lattice: Lattice3, values, kind: str = "scalar") -> DiscreteForm:
    return DiscreteForm(3, np.asarray(values, dtype=float)[None], lattice, kind)


def constant_form(lattice: Lattice3, degree: int, comps) -> DiscreteForm:
    """Scalar form with spatially constant components."""
    c = np.asarray(comps, dtype=float).reshape(NCOMP[degree], 1, 1, 1)
    return DiscreteForm(degree, np.broadcast_to(c, (NCOMP[degree],) + lattice.dims).copy(), lattice)


# ---------------------------------------------------------------------------
# difference operators
# ---------------------------------------------------------------------------

def _diff(arr: np.ndarray, d: int, lattice: Lattice3) -> np.ndarray:
    """Central difference of ``arr`` along spatial axis ``d`` (axes 0..2)."""
    h = lattice.spacing[d]
    if lattice.is_torus:
        return (np.roll(arr, -1, axis=d) - np.roll(arr, 1, axis=d)) / (2.0 * h)
    out = np.empty_like(arr)
    a = np.moveaxis(arr, d, 0)
    o = np.moveaxis(out, d, 0)
    o[1:-1] = (a[2:] - a[:-2]) / (2.0 * h)
    o[0] = (-3.0 * a[0] + 4.0 * a[1] - a[2]) / (2.0 * h)
    o[-1] = (3.0 * a[-1] - 4.0 * a[-2] + a[-3]) / (2.0 * h)
    return out


diff = _diff


def diff_adjoint(arr: np.ndarray, d: int, lattice: Lattice3) -> np.ndarray:
    """Transpose of :func:`diff` as a matrix acting along axis ``d``."""
    if lattice.is_torus:
        return -_diff(arr, d, lattice)
    h2 = 2.0 * lattice.spacing[d]
    out = np.zeros_like(arr)
    g = np.moveaxis(arr, d, 0)
    o = np.moveaxis(out, d, 0)
    o[2:] += g[1:-1] / h2
    o[:-2] -= g[1:-1] / h2
    o[0] -= 3.0 * g[0] / h2
    o[1] += 4.0 * g[0] / h2
    o[2] -= g[0] / h2
    o[-1] += 3.0 * g[-1] / h2
    o[-2] -= 4.0 * g[-1] / h2
    o[-3] += g[-1] / h2
    return out


def dfield(field: Field) -> DiscreteForm:
    """Quaternion-valued 1-form dF from central differences of the values."""
    lat = field.lattice
    comps = np.stack([diff(field.values, d, lat) for d in range(3)])
    return DiscreteForm(1, comps, lat, "quaternion")


def d(form: DiscreteForm, order: int = 2) -> DiscreteForm:
    """Exterior derivative (gradient, curl, divergence).

    ``order=2`` uses the central differences of :func:`diff` (one-sided on
    box faces); ``order=4`` uses :func:`diff4`.
    """
    lat = form.lattice
    c = form.comps
    diff = _diff if order == 2 else diff4
    if form.degree == 0:
        out = np.stack([diff(c[0], k, lat) for k in range(3)])
    elif form.degree == 1:
        out = np.stack([
            diff(c[2], 1, lat) - diff(c[1], 2, lat),
            diff(c[0], 2, lat) - diff(c[2], 0, lat),
            diff(c[1], 0, lat) - diff(c[0], 1, lat),
        ])
    elif form.degree == 2:
        out = (diff(c[0], 0, lat) + diff(c[1], 1, lat) + diff(c[2], 2, lat))[None]
    else:
        raise DegreeError("d of a 3-form is not defined on a 3-dimensional domain")
    return DiscreteForm(form.degree + 1, out, lat, form.kind)


def codiff(form: DiscreteForm) -> DiscreteForm:
    """Codifferential, the flat L^2 adjoint of :func:`d`.

    With the central-difference matrix antisymmetric on the torus this gives
    ``<d alpha, beta> = <alpha, codiff beta>`` exactly up to rounding.
    """
    lat = form.lattice
    c = form.comps
    if form.degree == 0:
        raise DegreeError("codifferential of a 0-form is not defined")
    if form.degree == 1:
        out = -(diff(c[0], 0, lat) + diff(c[1], 1, lat) + diff(c[2], 2, lat))[None]
    elif form.degree == 2:
        out = np.stack([
            diff(c[2], 1, lat) - diff(c[1], 2, lat),
            diff(c[0], 2, lat) - diff(c[2], 0, lat),
            diff(c[1], 0, lat) - diff(c[0], 1, lat),
        ])
    else:
        out = -np.stack([diff(c[0], k, lat) for k in range(3)])
    return DiscreteForm(form.degree - 1, out, lat, form.kind)


def inner(a: DiscreteForm, b: DiscreteForm) -> float:
    """Discrete L^2 pairing sum(a . b) * cell volume."""
    _same(a, b)
    return float(np.sum(a.comps * b.comps) * a.lattice.cell_volume)


# ---------------------------------------------------------------------------
# wedge
# ---------------------------------------------------------------------------

def _mul(x: np.ndarray, kx: str, y: np.ndarray, ky: str) -> np.ndarray:
    if kx == "scalar" and ky == "scalar":
        return x * y
    if kx == "scalar":
        return x[..., None] * y
    if ky == "scalar":
        return x * y[..., None]
    return qmul(x, y)


def wedge(a: DiscreteForm, b: DiscreteForm) -> DiscreteForm:
    """Pointwise wedge product with the coefficient of ``a`` on the left."""
    _lat = a.lattice
    if a.lattice != b.lattice:
        raise ValueError("forms live on different lattices")
    k = a.degree + b.degree
    if k > 3:
        raise DegreeError(f"wedge of degrees {a.degree} and {b.degree} exceeds 3")
    ka, kb = a.kind, b.kind
    A, B = a.comps, b.comps
    kind = "scalar" if ka == kb == "scalar" else (
        "sp1" if "scalar" in (ka, kb) and "sp1" in (ka, kb) else "quaternion"
    )

    def m(x, y):
        return _mul(x, ka, y, kb)

    if a.degree == 0:
        out = np.stack([m(A[0], B[c]) for c in range(B.shape[0])])
    elif b.degree == 0:
        out = np.stack([m(A[c], B[0]) for c in range(A.shape[0])])
    elif a.degree == 1 and b.degree == 1:
        out = np.stack([m(A[p], B[q]) - m(A[q], B[p]) for p, q in PAIRS])
    elif a.degree == 1 and b.degree == 2:
        out = (m(A[0], B[0]) + m(A[1], B[1]) + m(A[2], B[2]))[None]
    else:  # 2 ^ 1
        out = (m(A[0], B[0]) + m(A[1], B[1]) + m(A[2], B[2]))[None]
    return DiscreteForm(k, out, _lat, kind)


def pair(a: DiscreteForm, x) -> DiscreteForm:
    """Pointwise inner product <a, x> of a quaternion form with a field or array."""
    xv = x.values if isinstance(x, Field) else np.asarray(x, dtype=float)
    if a.kind == "scalar":
        raise ValueError("pairing needs a quaternion-valued form")
    return DiscreteForm(a.degree, np.sum(a.comps * xv, axis=-1), a.lattice, "scalar")


def left_mul(x, a: DiscreteForm) -> DiscreteForm:
    """Multiply every component of ``a`` on the left by the field values ``x``."""
    xv = x.values if isinstance(x, Field) else np.asarray(x, dtype=float)
    if a.kind == "scalar":
        comps = xv * a.comps[..., None]
    else:
        comps = qmul(xv, a.comps)
    return DiscreteForm(a.degree, comps, a.lattice, "quaternion")


# ---------------------------------------------------------------------------
# integration
# ---------------------------------------------------------------------------

def vertex_weights(lattice: Lattice3) -> np.ndarray:
    """Quadrature weights: uniform on the torus, trapezoidal on a box."""
    ws = []
    for n in lattice.dims:
        w = np.ones(n)
        if not lattice.is_torus:
            w[0] = w[-1] = 0.5
        ws.append(w)
    return ws[0][:, None, None] * ws[1][None, :, None] * ws[2][None, None, :]


def integrate(form: DiscreteForm):
    """Integral of a 3-form (real or quaternion valued)."""
    if form.degree != 3:
        raise DegreeError("only 3-forms can be integrated over the domain")
    w = vertex_weights(form.lattice) * form.lattice.cell_volume
    c = form.comps[0]
    if form.kind == "scalar":
        return float(np.sum(c * w))
    return np.sum(c * w[..., None], axis=(0, 1, 2))


# ---------------------------------------------------------------------------
# pullbacks
# ---------------------------------------------------------------------------

GEODESIC_WEIGHTS = ((1, 2.0 / 3.0), (2, -1.0 / 12.0))
CENTRAL4_WEIGHTS = GEODESIC_WEIGHTS


def shift(arr: np.ndarray, d: int, k: int, lattice: Lattice3) -> np.ndarray:
    """Values at x + k e_d: periodic on the torus, edge-replicated on a box."""
    if lattice.is_torus:
        return np.roll(arr, -k, axis=d)
    n = arr.shape[d]
    idx = np.clip(np.arange(n) + k, 0, n - 1)
    return np.take(arr, idx, axis=d)


def diff4(arr: np.ndarray, d: int, lattice: Lattice3) -> np.ndarray:
    """Fourth-order central difference (constant extension on a box)."""
    h = lattice.spacing[d]
    return sum(w * (shift(arr, d, k, lattice) - shift(arr, d, -k, lattice)) for k, w in CENTRAL4_WEIGHTS) / h


def s3_log(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Principal log of u^{-1} v as (..., 3) sp(1) coefficients (no antipode guard)."""
    from .quat import qlog_array

    return qlog_array(qmul(qconj(u), v), guard=-1.0)


def s2_log(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Riemannian log on S2: the tangent vector at p pointing to q of length dist(p, q)."""
    c = np.clip(np.sum(p * q, axis=-1), -1.0, 1.0)
    theta = np.arccos(c)
    t = q - c[..., None] * p
    n = np.sqrt(np.sum(t * t, axis=-1))
    fac = np.where(n > 1e-300, theta / np.where(n > 0, n, 1.0), 1.0)
    return t * fac[..., None]


def geodesic_derivatives(field: Field) -> np.ndarray:
    """Fourth-order derivatives in the intrinsic geometry of the target.

    For S3 fields this returns u^{-1} du (a (3, ..., 4) sp(1) stack); for S2
    fields it returns the tangent vectors d phi. Both are exact for motion
    along one-parameter subgroups / great circles at constant speed.
    """
    lat = field.lattice
    U = field.values
    out = np.zeros((3,) + U.shape)
    for dd in range(3):
        h = lat.spacing[dd]
        acc = 0.0
        for k, w in GEODESIC_WEIGHTS:
            fp, fm = shift(U, dd, k, lat), shift(U, dd, -k, lat)
            if field.kind == "S2":
                acc = acc + w * (s2_log(U, fp) - s2_log(U, fm))
            else:
                acc = acc + w * (s3_log(U, fp) - s3_log(U, fm))
        acc = acc / h
        if field.kind == "S2":
            out[dd] = acc
        else:
            out[dd][..., 1:] = acc
    return out


def maurer_cartan(u: Field, scheme: str = "geodesic") -> DiscreteForm:
    """a = u^{-1} du as an sp(1) 1-form.

    ``scheme="central"`` uses Im(u^{-1} D u) with second-order central
    differences; ``"geodesic"`` (default) differences the logs of
    u(x)^{-1} u(x +- k e_d) with fourth-order weights. In both cases
    ``residual`` holds the real part of u^{-1} D u that the central scheme
    discards, an O(h^2) diagnostic.
    """
    du = dfield(u)
    full = qmul(qconj(u.values)[None], du.comps)
    res = float(np.max(np.abs(full[..., 0])))
    if scheme == "central":
        full[..., 0] = 0.0
        return DiscreteForm(1, full, u.lattice, "sp1", res)
    if scheme != "geodesic":
        raise ValueError(f"unknown scheme {scheme!r}")
    return DiscreteForm(1, geodesic_derivatives(u), u.lattice, "sp1", res)


def pullback_area(phi: Field, scheme: str = "geodesic") -> DiscreteForm:
    """phi^* omega_S2 = -(1/8 pi) phi dphi ^ dphi as a real 2-form.

    ``residual`` is the imaginary part of the central-difference product,
    which vanishes in the continuum.
    """
    dp = dfield(phi)
    full = qmul(phi.values[None], wedge(dp, dp).comps) * (-1.0 / (8.0 * np.pi))
    res = float(np.max(np.abs(full[..., 1:])))
    if scheme == "central":
        return DiscreteForm(2, full[..., 0].copy(), phi.lattice, "scalar", res)
    if scheme != "geodesic":
        raise ValueError(f"unknown scheme {scheme!r}")
    T = DiscreteForm(1, geodesic_derivatives(phi), phi.lattice, "quaternion")
    full = qmul(phi.values[None], wedge(T, T).comps) * (-1.0 / (8.0 * np.pi))
    return DiscreteForm(2, full[..., 0].copy(), phi.lattice, "scalar", res)


def plaquette_area(phi: Field) -> DiscreteForm:
    """Lattice area 2-form from signed spherical triangles.

    Every plaquette (x, x+e_p, x+e_p+e_q, x+e_q) is split into two geodesic
    triangles whose signed areas (van Oosterom-Strackee formula) are divided
    by 4 pi h_p h_q. The value stored at a vertex is the average over the four
    plaquettes that touch it, so the form is vertex-collocated like every
    other form, while its sum over any closed lattice 2-torus is exactly an
    integer times the cell area. Plaquettes across the box boundary count as
    zero.
    """
    lat = phi.lattice
    P = phi.values[..., 1:]
    comps = np.zeros((3,) + lat.dims)
    for c, (p, q) in enumerate(PAIRS):
        a = P
        b = _shift_plain(P, p, lat)
        cc = _shift_plain(_shift_plain(P, p, lat), q, lat)
        dd = _shift_plain(P, q, lat)
        area = _tri(a, b, cc) + _tri(a, cc, dd)
        if not lat.is_torus:
            for ax in (p, q):
                sl = [slice(None)] * 3
                sl[ax] = slice(-1, None)
                area[tuple(sl)] = 0.0
        area = area / (4.0 * np.pi * lat.spacing[p] * lat.spacing[q])
        # average of the four plaquettes touching each vertex
        avg = area + _shift_plain(area, p, lat, -1)
        avg = avg + _shift_plain(avg, q, lat, -1)
        comps[c] = 0.25 * avg
    return DiscreteForm(2, comps, lat, "scalar")


def _shift_plain(arr, d, lat, k=1):
    if lat.is_torus:
        return np.roll(arr, -k, axis=d)
    out = np.zeros_like(arr)
    src = [slice(None)] * arr.ndim
    dst = [slice(None)] * arr.ndim
    if k > 0:
        src[d], dst[d] = slice(k, None), slice(0, -k)
    else:
        src[d], dst[d] = slice(0, k), slice(-k, None)
    out[tuple(dst)] = arr[tuple(src)]
    return out


def _tri(a, b, c):
    """Signed solid angle of the geodesic triangle (a, b, c) on the unit sphere."""
    num = np.sum(a * np.cross(b, c), axis=-1)
    den = 1.0 + np.sum(a * b, axis=-1) + np.sum(b * c, axis=-1) + np.sum(c * a, axis=-1)
    return 2.0 * np.arctan2(num, den)


def triple(a: DiscreteForm) -> DiscreteForm:
    """a ^ a ^ a for a quaternion 1-form."""
    return wedge(a, wedge(a, a))


def pullback_vol3(u: Field, a: DiscreteForm | None = None, scheme: str = "geodesic") -> DiscreteForm:
    """u^* omega_S3 = -(1/12 pi^2) Re(a ^ a ^ a)."""
    if a is None:
        a = maurer_cartan(u, scheme)
    t = triple(a)
    out = -t.comps[..., 0] / (12.0 * np.pi**2)
    return DiscreteForm(3, out, u.lattice, "scalar", a.residual)


def theta_form(u: Field, phi: Field | None = None, tol: float = 1e-6,
               a: DiscreteForm | None = None) -> DiscreteForm:
    """theta = (1/2 pi) <u^{-1} du, phi>.

    When ``phi`` is omitted the exact lift target ``u^{-1} i u`` is used.
    """
    from .quat import hopf_sigma_array

    target = hopf_sigma_array(u.values)
    if phi is not None:
        mismatch = float(np.max(np.abs(target - phi.values)))
        if mismatch > tol:
            raise LiftMismatch(f"u^-1 i u differs from phi by {mismatch:.3e}")
        target = phi.values
    if a is None:
        a = maurer_cartan(u)
    return pair(a, target).scale(1.0 / (2.0 * np.pi))


# ---------------------------------------------------------------------------
# energies
# ---------------------------------------------------------------------------

@dataclass
class EnergyReport:
    quadratic: float
    quartic: float
    total: float
    l3: float
    max_quartic_density: float = 0.0

    def as_dict(self) -> dict:
        return {
            "quadratic": self.quadratic,
            "quartic": self.quartic,
            "total": self.total,
            "l3_probe": self.l3,
            "max_quartic_density": self.max_quartic_density,
        }


def tangent_derivatives(phi: Field) -> np.ndarray:
    """Central differences of phi projected onto the tangent plane at phi."""
    D = dfield(phi).comps
    p = phi.values[None]
    return D - np.sum(D * p, axis=-1, keepdims=True) * p


def _cross_norm2(T: np.ndarray) -> np.ndarray:
    """sum over d<e of |T_d x T_e|^2 for (3, ..., 4) vector stacks."""
    out = 0.0
    for p, q in PAIRS:
        c = np.cross(T[p][..., 1:], T[q][..., 1:])
        out = out + np.sum(c * c, axis=-1)
    return out


def _energy(T: np.ndarray, lattice: Lattice3, quartic_density: np.ndarray) -> EnergyReport:
    w = vertex_weights(lattice) * lattice.cell_volume
    g2 = np.sum(T * T, axis=(0, -1))
    quad = float(np.sum(g2 * w))
    quart = float(np.sum(quartic_density * w))
    l3 = float(np.sum(g2**1.5 * w))
    return EnergyReport(quad, quart, quad + quart, l3, float(np.max(quartic_density)))


def faddeev_density(phi: Field) -> tuple[np.ndarray, np.ndarray]:
    """Quadratic and quartic Faddeev densities at each vertex."""
    T = tangent_derivatives(phi)
    return np.sum(T * T, axis=(0, -1)), _cross_norm2(T)


def faddeev_energy(phi: Field) -> EnergyReport:
    """E = int |dphi|^2 + |dphi ^ dphi|^2 with tangent-projected differences."""
    T = tangent_derivatives(phi)
    return _energy(T, phi.lattice, _cross_norm2(T))


def skyrme_energy(u: Field) -> EnergyReport:
    """E = int |a|^2 + |a ^ a|^2 with a = u^{-1} du."""
    a = maurer_cartan(u)
    aa = wedge(a, a).comps
    return _energy(a.comps, u.lattice, np.sum(aa * aa, axis=(0, -1)))


def hopf_target(u: Field) -> Field:
    """The S2 field u^{-1} i u."""
    from .quat import hopf_sigma_array

    vals = hopf_sigma_array(u.values)
    vals[..., 0] = 0.0
    vals /= np.linalg.norm(vals, axis=-1, keepdims=True)
    return Field(u.lattice, vals, "S2")


__all__ = [
    "DiscreteForm", "EnergyReport", "dfield", "d", "codiff", "wedge", "integrate",
    "maurer_cartan", "pullback_area", "pullback_vol3", "theta_form", "faddeev_energy",
    "skyrme_energy", "inner", "pair", "left_mul", "diff", "zero_form", "top_form",
    "constant_form", "triple", "vertex_weights", "tangent_derivatives", "hopf_target",
    "faddeev_density", "I",
]
