"""Elliptic pieces: discrete Hodge decomposition on the torus, the coexact
solve for xi, and the radial homotopy primitive on cube charts.

The spectral solver uses the Fourier symbols of the *same* central difference
operators as :mod:`hopfion.forms` (``i sin(k h)/h``), so discrete identities
such as ``d(solve_xi) = eta - harmonic`` hold to rounding. The kernel of the
discrete Laplacian contains the zero mode and, on even grids, the Nyquist
modes; both are treated as harmonic.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import DomainError, NotClosed
from .forms import DiscreteForm, d, dfield, wedge
from .grid import Field, Lattice3
from .quat import qmul

SOLVER_TOL = 1e-9
PRIMITIVE_TOL = 1e-3
SIMPSON_INTERVALS = 64
KERNEL_TOL = 1e-12


# ---------------------------------------------------------------------------
# charts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CubeChart:
    """An axis-aligned block of vertices, star-shaped about its center.

    ``start`` is the global index of the block's first vertex and ``size``
    the number of vertices per axis. On the torus the block may wrap around.
    """

    lattice: Lattice3
    start: tuple[int, int, int]
    size: tuple[int, int, int]

    def __post_init__(self):
        for s, m, n in zip(self.start, self.size, self.lattice.dims):
            if m < 2:
                raise ValueError("chart needs at least two vertices per axis")
            if not self.lattice.is_torus and (s < 0 or s + m > n):
                raise ValueError("box chart leaves the lattice")
            if self.lattice.is_torus and m > n:
                raise ValueError("chart longer than the period")

    @classmethod
    def full(cls, lattice: Lattice3) -> "CubeChart":
        return cls(lattice, (0, 0, 0), lattice.dims)

    @property
    def center(self) -> np.ndarray:
        """Center in local index coordinates."""
        return (np.asarray(self.size) - 1) / 2.0

    @property
    def half_widths(self) -> np.ndarray:
        return self.center * np.asarray(self.lattice.spacing)

    def index_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Global indices of the chart's vertices along each axis."""
        out = []
        for s, m, n in zip(self.start, self.size, self.lattice.dims):
            idx = s + np.arange(m)
            out.append(idx % n if self.lattice.is_torus else idx)
        return tuple(out)

    def extract(self, arr: np.ndarray, lead: int = 0) -> np.ndarray:
        """Restrict a global array (spatial axes after ``lead`` axes) to the chart."""
        ix = self.index_arrays()
        out = arr
        for k in range(3):
            out = np.take(out, ix[k], axis=lead + k)
        return out

    def mask(self) -> np.ndarray:
        m = np.zeros(self.lattice.dims, dtype=bool)
        ix = self.index_arrays()
        m[np.ix_(*ix)] = True
        return m

    def local_lattice(self) -> Lattice3:
        """A box lattice with the chart's shape and spacing (for local forms)."""
        from .grid import Box, make_lattice

        h = self.lattice.spacing
        if not all(abs(h[k] - h[0]) < 1e-14 * h[0] for k in range(3)) or len(set(self.size)) != 1:
            return _AnisoBox(self.size, h)
        R = h[0] * (self.size[0] - 1) / 2.0
        return make_lattice(self.size, Box(R))

    def restrict_field(self, field: Field) -> Field:
        return Field(self.local_lattice(), self.extract(field.values), field.kind, check=False)


class _AnisoBox(Lattice3):
    """Box-like lattice with prescribed spacings, used for non-cubic charts."""

    def __init__(self, size, spacing):
        from .grid import Box

        object.__setattr__(self, "dims", tuple(int(s) for s in size))
        object.__setattr__(self, "domain", Box(1.0))
        object.__setattr__(self, "spacing", tuple(float(v) for v in spacing))

    def axis(self, d: int) -> np.ndarray:
        n, h = self.dims[d], self.spacing[d]
        return (np.arange(n) - (n - 1) / 2.0) * h

    def __eq__(self, other):
        return isinstance(other, Lattice3) and self.dims == other.dims and self.spacing == other.spacing \
            and not other.is_torus

    def __hash__(self):
        return hash((self.dims, self.spacing))


def local_form(form: DiscreteForm, chart: CubeChart) -> DiscreteForm:
    """Restrict a global form to a chart, on the chart's local lattice."""
    return DiscreteForm(form.degree, chart.extract(form.comps, lead=1), chart.local_lattice(), form.kind)


# ---------------------------------------------------------------------------
# spectral Hodge theory on the torus
# ---------------------------------------------------------------------------

def _symbols(lattice: Lattice3):
    """Real parts s_d of the central-difference symbols i s_d, broadcastable."""
    out = []
    for dd in range(3):
        n, h = lattice.dims[dd], lattice.spacing[dd]
        k = 2.0 * np.pi * np.fft.fftfreq(n, d=h)
        s = np.sin(k * h) / h
        s[np.abs(s) < KERNEL_TOL / h] = 0.0
        shape = [1, 1, 1]
        shape[dd] = n
        out.append(s.reshape(shape))
    return out


def _kernel_mask(s):
    s2 = s[0] ** 2 + s[1] ** 2 + s[2] ** 2
    return s2 == 0.0, s2


@dataclass
class HodgeSplit:
    """alpha = exact + coexact + harmonic, with the harmonic periods."""

    exact: DiscreteForm
    coexact: DiscreteForm
    harmonic: DiscreteForm
    periods: np.ndarray


def _periods(form: DiscreteForm) -> np.ndarray:
    L = form.lattice.domain.periods
    mean = form.comps.reshape(form.comps.shape[0], -1).mean(axis=1)
    if form.degree == 1:
        return mean * np.asarray(L)
    if form.degree == 2:
        return mean * np.array([L[1] * L[2], L[2] * L[0], L[0] * L[1]])
    return mean * np.prod(L)


def hodge_split(form: DiscreteForm) -> HodgeSplit:
    """Discrete Hodge decomposition of a scalar 1- or 2-form on the torus."""
    lat = form.lattice
    if not lat.is_torus:
        raise DomainError("Hodge decomposition is implemented on the torus only")
    if form.degree not in (1, 2) or form.kind != "scalar":
        raise ValueError("hodge_split expects a scalar 1-form or 2-form")
    s = _symbols(lat)
    ker, s2 = _kernel_mask(s)
    F = np.fft.fftn(form.comps, axes=(1, 2, 3))
    sdot = s[0] * F[0] + s[1] * F[1] + s[2] * F[2]
    safe = np.where(ker, 1.0, s2)
    long = np.stack([s[k] * sdot / safe for k in range(3)])
    long[:, ker] = 0.0
    harm = np.zeros_like(F)
    harm[:, ker] = F[:, ker]
    trans = F - long - harm
    back = lambda G: np.real(np.fft.ifftn(G, axes=(1, 2, 3)))
    if form.degree == 1:
        exact, coexact = long, trans
    else:
        exact, coexact = trans, long
    mk = lambda G: DiscreteForm(form.degree, back(G), lat)
    h = mk(harm)
    return HodgeSplit(mk(exact), mk(coexact), h, _periods(h))


def area_form(phi: Field) -> DiscreteForm:
    """eta = -1/4 phi dphi ^ dphi as a real 2-form (equal to 2 pi phi^* omega_S2)."""
    dp = dfield(phi)
    p = phi.values[None]
    T = dp.comps - np.sum(dp.comps * p, axis=-1, keepdims=True) * p
    dp = DiscreteForm(1, T, phi.lattice, "quaternion")
    full = qmul(phi.values[None], wedge(dp, dp).comps) * -0.25
    return DiscreteForm(2, full[..., 0].copy(), phi.lattice, "scalar",
                        float(np.max(np.abs(full[..., 1:]))))


@dataclass
class XiSolution:
    xi: DiscreteForm
    eta: DiscreteForm
    harmonic: DiscreteForm
    periods: np.ndarray
    closedness: float
    residual: float

    @property
    def remainder(self) -> float:
        """Harmonic periods of eta normalised to units of the class (2 pi)."""
        return float(np.max(np.abs(self.periods))) / (2.0 * np.pi)


def solve_xi_torus(phi: Field, eta: DiscreteForm | None = None) -> XiSolution:
    """xi = codiff Laplacian^{-1} eta with eta = -1/4 phi dphi ^ dphi.

    The harmonic part of eta is reported through ``periods``; divided by
    ``2 pi`` these are the periods of phi^* omega_S2, that is the primary class.
    ``closedness`` is the relative size of eta's coexact (non-closed) part,
    which only comes from truncation in the pointwise product.
    """
    lat = phi.lattice
    if not lat.is_torus:
        raise DomainError("solve_xi_torus needs a torus lattice")
    if eta is None:
        eta = area_form(phi)
    s = _symbols(lat)
    ker, s2 = _kernel_mask(s)
    F = np.fft.fftn(eta.comps, axes=(1, 2, 3))
    safe = np.where(ker, 1.0, s2)
    # xi_hat = i s x F / |s|^2 ; d xi then equals the transverse part of eta
    X = np.stack([
        s[1] * F[2] - s[2] * F[1],
        s[2] * F[0] - s[0] * F[2],
        s[0] * F[1] - s[1] * F[0],
    ]) * (1j / safe)
    X[:, ker] = 0.0
    xi = DiscreteForm(1, np.real(np.fft.ifftn(X, axes=(1, 2, 3))), lat)
    split = hodge_split(eta)
    scale = max(float(np.sqrt(np.mean(eta.comps**2))), 1e-300)
    closed = float(np.sqrt(np.mean(split.coexact.comps**2))) / scale
    target = eta - split.harmonic - split.coexact
    res = float(np.max(np.abs(d(xi).comps - target.comps))) / max(eta.max_abs(), 1e-300)
    return XiSolution(xi, eta, split.harmonic, split.periods, closed, res)


# ---------------------------------------------------------------------------
# radial homotopy primitive
# ---------------------------------------------------------------------------

def closedness_defect(eta: DiscreteForm) -> float:
    """Scaled size of d(eta): rms(d eta) * h / rms(eta), interior only on boxes."""
    if eta.degree == 3:
        return 0.0
    de = d(eta).comps
    e = eta.comps
    if not eta.lattice.is_torus:
        sl = (slice(None),) + (slice(2, -2),) * 3
        de, e = de[sl], e[sl]
    scale = float(np.sqrt(np.mean(e**2)))
    if scale == 0.0:
        return 0.0
    h = max(eta.lattice.spacing)
    return float(np.sqrt(np.mean(de**2))) * h / scale


def _contract(vals: np.ndarray, v: np.ndarray, degree: int) -> np.ndarray:
    """Interior product iota_v of a k-form given by components ``vals``."""
    if degree == 1:
        return np.sum(vals * v, axis=0)[None]
    if degree == 2:
        return np.stack([
            vals[1] * v[2] - vals[2] * v[1],
            vals[2] * v[0] - vals[0] * v[2],
            vals[0] * v[1] - vals[1] * v[0],
        ])
    return vals * v  # 3-form: c v gives the 2-form with components c v


def poincare_primitive(eta: DiscreteForm, chart: CubeChart | None = None,
                       check: bool = True, tol: float = PRIMITIVE_TOL,
                       intervals: int = SIMPSON_INTERVALS) -> DiscreteForm:
    """Radial homotopy primitive K(eta) on a star-shaped chart.

    ``K(eta)(x) = int_0^1 t^(k-1) iota_(x-c) eta(c + t(x-c)) dt``, evaluated by
    composite Simpson quadrature with trilinear interpolation of eta. The
    result lives on the chart's local lattice (or on eta's lattice when no
    chart is given). ``NotClosed`` is raised when the scaled d-residual of
    eta exceeds ``tol``.
    """
    from . import kernels

    if eta.kind != "scalar":
        raise ValueError("primitive implemented for scalar forms")
    k = eta.degree
    if k == 0:
        raise ValueError("0-forms have no primitive")
    if chart is not None and chart.size != eta.lattice.dims or (chart is not None and chart.lattice.is_torus):
        eta = local_form(eta, chart)
    lat = eta.lattice
    if check:
        defect = closedness_defect(eta)
        if defect > tol:
            raise NotClosed(f"scaled d-residual {defect:.3e} exceeds {tol:.1e}")
    size = np.asarray(lat.dims)
    c = (size - 1) / 2.0
    h = np.asarray(lat.spacing)
    out = kernels.radial_primitive(np.ascontiguousarray(eta.comps), c, h, k, intervals)
    return DiscreteForm(k - 1, out, lat)


def radial_primitive_py(comps: np.ndarray, c: np.ndarray, h: np.ndarray, k: int, intervals: int) -> np.ndarray:
    """Reference implementation of the radial integral using scipy interpolation."""
    dims = comps.shape[1:]
    idx = np.indices(dims, dtype=float)
    disp = (idx - c.reshape(3, 1, 1, 1)) * h.reshape(3, 1, 1, 1)  # x - c in length units
    ts = np.linspace(0.0, 1.0, intervals + 1)
    w = np.ones(intervals + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    w *= (ts[1] - ts[0]) / 3.0
    ncomp_out = {1: 1, 2: 3, 3: 3}[k]
    acc = np.zeros((ncomp_out,) + dims)
    for t, wt in zip(ts, w):
        fac = wt * t ** (k - 1)
        if fac == 0.0:
            continue
        coords = c.reshape(3, 1, 1, 1) + t * (idx - c.reshape(3, 1, 1, 1))
        vals = np.stack([ndimage.map_coordinates(comps[m], coords, order=1, mode="nearest")
                         for m in range(comps.shape[0])])
        acc += fac * _contract(vals, disp, k)
    return acc
