"""Generators for the example maps used as ground truth.

Box generators are exactly constant on the two outer vertex shells. This is
done with an explicit smooth radial homotopy that takes the map to its limit
value between ``0.8 R`` and ``0.9 R``.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import DomainError
from .grid import Box, Field, Lattice3, field_from_values, make_lattice
from .quat import I, hopf_sigma_array, qconj, qexp_array, qmul

TAPER = (0.8, 0.9)


@dataclass(frozen=True)
class GeneratorSpec:
    """Name plus parameters of a generator, as addressed from the CLI."""

    name: str
    params: dict = dc_field(default_factory=dict)

    def build(self, lattice: Lattice3) -> Field:
        fn = GENERATORS.get(self.name)
        if fn is None:
            raise KeyError(f"unknown generator {self.name!r}")
        return fn(lattice=lattice, **self.params)


def smooth_step(t):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
        b = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
    return a / (a + b)


def taper_radii(lattice: Lattice3) -> tuple[float, float]:
    """Inner and outer radius of the boundary taper on a box.

    Nominally [0.8R, 0.9R]; on coarse grids the outer radius is pulled in to
    R - 1.5h so that the two outer vertex shells are always exactly constant.
    """
    R = lattice.domain.R
    hi = min(TAPER[1] * R, R - 1.5 * max(lattice.spacing))
    return TAPER[0] / TAPER[1] * hi, hi


def _taper_weight(r, radii):
    lo, hi = radii
    return smooth_step((r - lo) / (hi - lo))


def _require_box(lattice: Lattice3):
    if lattice.is_torus:
        raise DomainError("this generator needs a box lattice")


def _with_far(lattice: Lattice3, far) -> Lattice3:
    """Same lattice with the far value replaced."""
    return make_lattice(lattice.dims, Box(lattice.domain.R, tuple(np.asarray(far, float))))


def stereo_angle(r, radii=None):
    """Rotation angle of the inverse stereographic map, tapered to pi over ``radii``."""
    alpha = 2.0 * np.arctan(r)
    if radii is not None:
        alpha = alpha + _taper_weight(r, radii) * (np.pi - alpha)
    return alpha


def inverse_stereo(pos, radii=None, power: int = 1, center=(0.0, 0.0, 0.0)):
    """S(x)^power with S(x) = (1 - |x|^2 + 2x)/(1 + |x|^2) = exp(2 atan|x| x/|x|)."""
    x = pos - np.asarray(center, dtype=float)
    r = np.sqrt(np.sum(x * x, axis=-1))
    alpha = stereo_angle(r, radii)
    safe = np.where(r > 0, r, 1.0)
    n = x / safe[..., None]
    return qexp_array(power * alpha[..., None] * n)


def gen_power(n: int = 1, lattice: Lattice3 = None) -> Field:
    """u(x) = S(x)^n, equal to (-1)^n near the boundary."""
    _require_box(lattice)
    if lattice.domain.R < 4:
        raise DomainError("gen_power needs R >= 4")
    n = int(n)
    far = np.array([(-1.0) ** n, 0.0, 0.0, 0.0])
    lat = _with_far(lattice, far)
    vals = inverse_stereo(lat.positions(), taper_radii(lat), n)
    vals[_outer(lat)] = far
    return field_from_values(lat, vals, "S3")


def gen_hopf_box(lattice: Lattice3 = None) -> Field:
    """phi = sigma(S(x)), equal to i near the boundary."""
    _require_box(lattice)
    if lattice.domain.R < 4:
        raise DomainError("gen_hopf_box needs R >= 4")
    lat = _with_far(lattice, I)
    vals = hopf_sigma_array(inverse_stereo(lat.positions(), taper_radii(lat)))
    vals[_outer(lat)] = I
    return field_from_values(lat, vals, "S2")


def hopf_box_lift(lattice: Lattice3) -> Field:
    """The exact lift S(x) of :func:`gen_hopf_box`, useful as a reference."""
    lat = _with_far(lattice, (-1.0, 0.0, 0.0, 0.0))
    return field_from_values(lat, inverse_stereo(lat.positions(), taper_radii(lat)), "S3")


def _outer(lat: Lattice3) -> np.ndarray:
    r = np.sqrt(np.sum(lat.positions() ** 2, axis=-1))
    return r >= taper_radii(lat)[1]


# ---------------------------------------------------------------------------
# torus generators
# ---------------------------------------------------------------------------

def collapse_profile(t):
    """Odd quintic 0 -> 1 with vanishing first and second derivative at 1."""
    t = np.clip(t, 0.0, 1.0)
    return (15.0 * t - 10.0 * t**3 + 3.0 * t**5) / 8.0


def collapse_t2(y, radius: float = 0.5):
    """Smooth degree-one map T^2 -> S^2 collapsing the 1-skeleton to i.

    ``y`` holds points of R^2 (last axis) read modulo 1. The disk of the given
    radius around the center of the fundamental square is wrapped once around
    the sphere, with the center going to -i; everything outside it goes to i.
    """
    v = np.mod(y, 1.0) - 0.5
    r = np.sqrt(np.sum(v * v, axis=-1))
    g = np.pi * collapse_profile(r / radius)
    safe = np.where(r > 0, r, 1.0)
    out = np.zeros(y.shape[:-1] + (4,))
    out[..., 1] = -np.cos(g)
    out[..., 2] = np.sin(g) * v[..., 1] / safe
    out[..., 3] = np.sin(g) * v[..., 0] / safe
    return out


def t3_class(A) -> tuple[int, int, int]:
    """Primary class of :func:`gen_t3`: the 2x2 minors of A^T.

    Component d is the determinant of A with column d deleted, ordered so that
    it is the period over the coordinate 2-torus normal to x_d.
    """
    A = np.asarray(A, dtype=int).reshape(2, 3)
    m1 = A[0, 1] * A[1, 2] - A[0, 2] * A[1, 1]
    m2 = A[0, 2] * A[1, 0] - A[0, 0] * A[1, 2]
    m3 = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
    return int(m1), int(m2), int(m3)


def gen_t3(A=((0, 1, 0), (0, 0, 1)), lattice: Lattice3 = None) -> Field:
    """phi(x) = F(A x mod 1) for an integer 2x3 matrix A on the torus.

    Coordinates are normalised by the periods so that A acts on T^3 = R^3/Z^3.
    The class is given by :func:`t3_class`.
    """
    if not lattice.is_torus:
        raise DomainError("gen_t3 needs a torus lattice")
    A = np.asarray(A, dtype=float).reshape(2, 3)
    if np.any(A != np.round(A)):
        raise ValueError("A must have integer entries")
    x = lattice.positions() / np.asarray(lattice.domain.periods)
    y = x @ A.T
    return field_from_values(lattice, collapse_t2(y), "S2")


def gen_bump_s3(lattice: Lattice3 = None, radius: float = 0.45, center=None) -> Field:
    """Degree-one map T^3 -> S^3 (or box -> S^3) supported in a ball.

    ``Q(x) = exp(pi s(|x - c|/radius) (x - c)/|x - c|)`` with the profile of
    :func:`collapse_profile`, so Q = 1 at the center, Q = -1 outside the ball.
    On the torus, radius is measured in units of the (unit-normalised) periods.
    """
    if lattice.is_torus:
        L = np.asarray(lattice.domain.periods)
        x = lattice.positions() / L
        c = np.full(3, 0.5) if center is None else np.asarray(center, float)
        v = x - c
        v = v - np.round(v)
    else:
        x = lattice.positions()
        c = np.zeros(3) if center is None else np.asarray(center, float)
        v = x - c
        # same fraction of the box as of the unit torus, inside the taper radius
        radius = min(radius * 2.0 * lattice.domain.R, taper_radii(lattice)[0])
    r = np.sqrt(np.sum(v * v, axis=-1))
    g = np.pi * collapse_profile(r / radius)
    safe = np.where(r > 0, r, 1.0)
    vals = qexp_array(g[..., None] * v / safe[..., None])
    vals[r >= radius] = (-1.0, 0.0, 0.0, 0.0)
    if not lattice.is_torus:
        lattice = _with_far(lattice, (-1.0, 0.0, 0.0, 0.0))
    return field_from_values(lattice, vals, "S3")


def winding_s1(lattice: Lattice3 = None, winding=(1, 0, 0)) -> Field:
    """lambda(x) = exp(2 pi i w . x / L) on the torus."""
    if not lattice.is_torus:
        raise DomainError("winding maps need a torus lattice")
    x = lattice.positions() / np.asarray(lattice.domain.periods)
    ang = 2.0 * np.pi * (x @ np.asarray(winding, dtype=float))
    vals = np.zeros(lattice.dims + (4,))
    vals[..., 0] = np.cos(ang)
    vals[..., 1] = np.sin(ang)
    return field_from_values(lattice, vals, "S1")


# ---------------------------------------------------------------------------
# pointwise post-compositions
# ---------------------------------------------------------------------------

def pN_values(vals: np.ndarray, N: int) -> np.ndarray:
    """z -> z^N in the stereographic chart from -i (i at 0, -i at infinity)."""
    x1, x2, x3 = vals[..., 1], vals[..., 2], vals[..., 3]
    polar = np.arctan2(np.sqrt(x2 * x2 + x3 * x3), x1)  # angle from i
    az = np.arctan2(x3, x2)
    with np.errstate(over="ignore"):
        rho = np.tan(0.5 * polar) ** N
    new_polar = 2.0 * np.arctan(rho)
    out = np.zeros_like(vals)
    out[..., 1] = np.cos(new_polar)
    out[..., 2] = np.sin(new_polar) * np.cos(N * az)
    out[..., 3] = np.sin(new_polar) * np.sin(N * az)
    return out


def gen_pN(phi: Field, N: int = 2) -> Field:
    """Post-compose an S2 field with p_N([z:w]) = [z^N : w^N]."""
    N = int(N)
    if N < 1:
        raise ValueError("N must be a positive integer")
    if phi.kind != "S2":
        raise ValueError("gen_pN needs an S2 field")
    if N == 1:
        return phi
    return field_from_values(phi.lattice, pN_values(phi.values, N), "S2")


def conjugate(Q: Field, phi: Field) -> Field:
    """The S2 field Q^{-1} phi Q."""
    vals = qmul(qmul(qconj(Q.values), phi.values), Q.values)
    vals[..., 0] = 0.0
    return field_from_values(phi.lattice, vals, "S2")


def perturb(phi: Field, amplitude: float = 0.05, seed: int = 0, band: int = 2) -> Field:
    """Smoothly perturbed copy of phi (box fields keep their outer shells).

    A random band-limited sp(1) field v is used to form exp(v)^{-1} phi exp(v)
    (S2) or phi exp(v) (S3).
    """
    v = _random_lie(phi.lattice, band, seed, amplitude)
    g = qexp_array(v)
    if phi.kind == "S2":
        vals = qmul(qmul(qconj(g), phi.values), g)
        vals[..., 0] = 0.0
    else:
        vals = qmul(phi.values, g)
    return field_from_values(phi.lattice, vals, phi.kind)


# ---------------------------------------------------------------------------
# singular examples
# ---------------------------------------------------------------------------

def _offset_positions(lattice: Lattice3):
    h = np.asarray(lattice.spacing)
    x = lattice.positions() - h / 3.0
    r = np.sqrt(np.sum(x * x, axis=-1))
    return x, r


def gen_singular(id: str = "eta2", lattice: Lattice3 = None) -> Field:
    """Singular example maps centred at (h/3, h/3, h/3).

    ``eta1`` is x/|x| (S2). ``eta2`` and ``eta3`` are the circle-valued maps
    cos(f) i + sin(f) j with f = ln|x| and f = ln|ln|x||. The three eta maps
    are left untapered: eta1 has degree one on spheres and cannot be made
    constant near the boundary, and a radial taper of f adds an energy shell
    that is poorly resolved at desk sizes and swamps the core behaviour the
    maps are meant to show. Their far value is nominal. ``half_degree`` is
    the S3 map equal to S(x)
    for |x| >= 1 and to S(x/|x|) inside the unit ball.
    """
    _require_box(lattice)
    x, r = _offset_positions(lattice)
    if id == "eta1":
        vals = np.zeros(lattice.dims + (4,))
        vals[..., 1:] = x / r[..., None]
        lat = _with_far(lattice, I)
        return Field(lat, vals / np.linalg.norm(vals, axis=-1, keepdims=True), "S2")
    if id in ("eta2", "eta3"):
        with np.errstate(divide="ignore"):
            f = np.log(r) if id == "eta2" else np.log(np.abs(np.log(r)))
        vals = np.zeros(lattice.dims + (4,))
        vals[..., 1] = np.cos(f)
        vals[..., 2] = np.sin(f)
        lat = _with_far(lattice, I)
        return field_from_values(lat, vals, "S2")
    if id == "half_degree":
        rr = np.maximum(r, 1.0)
        alpha = stereo_angle(rr, taper_radii(lattice))
        n = x / r[..., None]
        lat = _with_far(lattice, (-1.0, 0.0, 0.0, 0.0))
        vals = qexp_array(alpha[..., None] * n)
        vals[_outer(lat)] = (-1.0, 0.0, 0.0, 0.0)
        return field_from_values(lat, vals, "S3")
    raise KeyError(f"unknown singular map {id!r}")


# ---------------------------------------------------------------------------
# random smooth fields
# ---------------------------------------------------------------------------

def _random_lie(lattice: Lattice3, band: int, seed: int, amplitude: float) -> np.ndarray:
    """Band-limited real sp(1) field with rms norm ``amplitude`` (zero if band = 0)."""
    if band <= 0:
        return np.zeros(lattice.dims + (3,))
    if band > min(lattice.dims) // 4:
        raise ValueError("band must not exceed dims/4")
    rng = np.random.default_rng(seed)
    if lattice.is_torus:
        x = lattice.positions() / np.asarray(lattice.domain.periods)
    else:
        x = (lattice.positions() + lattice.domain.R) / (2.0 * lattice.domain.R)
    ms = [m for m in np.ndindex(2 * band + 1, 2 * band + 1, 2 * band + 1)]
    v = np.zeros(lattice.dims + (3,))
    for m in ms:
        m = np.asarray(m) - band
        # keep one representative of each +-m pair; real field from cos/sin
        key = tuple(m)
        if key < tuple(-m) or not np.any(m):
            continue
        ph = 2.0 * np.pi * (x @ m)
        weight = np.exp(-np.sum(m * m) / (band * band))
        a, b = rng.standard_normal((2, 3)) * weight
        v += np.cos(ph)[..., None] * a + np.sin(ph)[..., None] * b
    rms = np.sqrt(np.mean(np.sum(v * v, axis=-1)))
    if rms > 0:
        v *= amplitude / rms
    if not lattice.is_torus:
        r = np.sqrt(np.sum(lattice.positions() ** 2, axis=-1))
        v *= (1.0 - _taper_weight(r, taper_radii(lattice)))[..., None]
    return v


def gen_random_smooth(kind: str = "S3", band: int = 2, seed: int = 0, lattice: Lattice3 = None,
                      amplitude: float = 1.5) -> Field:
    """exp of a seeded band-limited sp(1) field (S3), or i conjugated by it (S2)."""
    v = _random_lie(lattice, band, seed, amplitude)
    u = qexp_array(v)
    lat = lattice
    if not lattice.is_torus:
        lat = _with_far(lattice, (1.0, 0.0, 0.0, 0.0) if kind == "S3" else I)
        u[_outer(lat)] = (1.0, 0.0, 0.0, 0.0)
    if kind == "S3":
        return field_from_values(lat, u, "S3")
    if kind == "S2":
        vals = hopf_sigma_array(u)
        vals[..., 0] = 0.0
        return field_from_values(lat, vals, "S2")
    raise ValueError("gen_random_smooth supports kinds S3 and S2")


def gen_constant(value=(0.0, 1.0, 0.0, 0.0), kind: str = "S2", lattice: Lattice3 = None) -> Field:
    value = np.asarray(value, dtype=float)
    lat = lattice if lattice.is_torus else _with_far(lattice, value / np.linalg.norm(value))
    return field_from_values(lat, np.broadcast_to(value, lat.dims + (4,)), kind)


GENERATORS = {
    "hopf_box": gen_hopf_box,
    "power": gen_power,
    "t3": gen_t3,
    "singular": gen_singular,
    "random_smooth": gen_random_smooth,
    "bump_s3": gen_bump_s3,
    "constant": gen_constant,
    "winding": winding_s1,
}
