"""Quaternion algebra on single values and on stacked arrays.

Arrays of quaternions use a trailing axis of length 4 ordered ``(w, x, y, z)``
so a field on a lattice is simply an ``(n1, n2, n3, 4)`` array. The small value
classes (:class:`Quaternion`, :class:`UnitQuaternion`, ...) wrap the same array
functions and exist for readable scalar code and tests.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AntipodalLog

UNIT_TOL = 1e-12
LOG_GUARD = 1e-9

ONE = np.array([1.0, 0.0, 0.0, 0.0])
I = np.array([0.0, 1.0, 0.0, 0.0])
J = np.array([0.0, 0.0, 1.0, 0.0])
K = np.array([0.0, 0.0, 0.0, 1.0])


# ---------------------------------------------------------------------------
# array layer
# ---------------------------------------------------------------------------

def _arr(q):
    if isinstance(q, _QuatBase):
        return q.as_array()
    return np.asarray(q, dtype=float)


def qmul(p, q):
    """Hamilton product; broadcasts over leading axes."""
    if isinstance(p, _QuatBase) and isinstance(q, _QuatBase):
        return Quaternion.from_array(qmul(p.as_array(), q.as_array()))
    p = _arr(p)
    q = _arr(q)
    pw, px, py, pz = p[..., 0], p[..., 1], p[..., 2], p[..., 3]
    qw, qx, qy, qz = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    return np.stack(
        [
            pw * qw - px * qx - py * qy - pz * qz,
            pw * qx + px * qw + py * qz - pz * qy,
            pw * qy - px * qz + py * qw + pz * qx,
            pw * qz + px * qy - py * qx + pz * qw,
        ],
        axis=-1,
    )


def qconj(q):
    q = _arr(q)
    out = -q
    out[..., 0] = q[..., 0]
    return out


def qnorm2(q):
    q = _arr(q)
    return np.sum(q * q, axis=-1)


def qnorm(q):
    return np.sqrt(qnorm2(q))


def qinv(q):
    q = _arr(q)
    return qconj(q) / qnorm2(q)[..., None]


def qdot(p, q):
    """Euclidean inner product <p, q> = Re(conj(p) q)."""
    return np.sum(_arr(p) * _arr(q), axis=-1)


def qnormalize(q):
    q = _arr(q)
    return q / qnorm(q)[..., None]


def imag(q):
    """Zero the real part."""
    q = np.array(_arr(q), dtype=float, copy=True)
    q[..., 0] = 0.0
    return q


def vec_to_quat(v):
    """Embed an (..., 3) array of sp(1) coefficients as pure quaternions."""
    v = np.asarray(v, dtype=float)
    out = np.zeros(v.shape[:-1] + (4,))
    out[..., 1:] = v
    return out


def bracket(p, q):
    """Commutator [p, q] = pq - qp."""
    return qmul(p, q) - qmul(q, p)


def qexp_array(v):
    """exp of pure quaternions given as (..., 3) or (..., 4) arrays."""
    v = np.asarray(v, dtype=float)
    if v.shape[-1] == 4:
        v = v[..., 1:]
    theta = np.sqrt(np.sum(v * v, axis=-1))
    # sin(t)/t with a series branch near zero
    small = theta < 1e-8
    safe = np.where(small, 1.0, theta)
    sinc = np.where(small, 1.0 - theta * theta / 6.0, np.sin(safe) / safe)
    out = np.empty(v.shape[:-1] + (4,))
    out[..., 0] = np.cos(theta)
    out[..., 1:] = v * sinc[..., None]
    return out


def qlog_array(q, guard: float = LOG_GUARD):
    """Principal log of unit quaternions; returns (..., 3) sp(1) coefficients."""
    q = np.asarray(q, dtype=float)
    if np.any(np.sqrt(np.sum((q - np.array([-1.0, 0, 0, 0])) ** 2, axis=-1)) < guard):
        raise AntipodalLog("log requested within guard distance of -1")
    vnorm = np.sqrt(np.sum(q[..., 1:] ** 2, axis=-1))
    theta = np.arctan2(vnorm, q[..., 0])
    small = vnorm < 1e-12
    safe = np.where(small, 1.0, vnorm)
    scale = np.where(small, 1.0, theta / safe)
    return q[..., 1:] * scale[..., None]


def hopf_sigma_array(q):
    """sigma(q) = q^{-1} i q for unit quaternion arrays."""
    q = np.asarray(q, dtype=float)
    return qmul(qmul(qconj(q), I), q)


def rotate_array(q, x):
    """A_q(x) = q x q^{-1}."""
    return qmul(qmul(q, x), qconj(q))


def sigma_representative(x):
    """Unit q with q^{-1} i q = x, deterministic.

    Built as the inverse of the shortest-arc rotation taking i to x. On the
    hemisphere <x, i> < 0 the arc is taken from -i and composed with j (which
    sends i to -i), so the construction stays well conditioned and returns
    exactly j at x = -i.
    """
    x = np.asarray(x, dtype=float)
    # r x r^{-1}-style: r i r^{-1} = x with r = normalize(1 - x i)
    near = qmul(-x, I)
    near[..., 0] += 1.0
    far = qmul(x, I)
    far[..., 0] += 1.0
    far = qmul(far, J)  # r' j with r' = normalize(1 + x i) taking -i to x
    use_near = (x[..., 1] >= 0.0)[..., None]
    r = qnormalize(np.where(use_near, near, far))
    return qconj(r)


def frak_q_array(x, lam):
    """q^{-1} lam q for q with x = q^{-1} i q; lam unit complex as (..., 4)."""
    q = sigma_representative(x)
    lam = np.asarray(lam, dtype=float)
    return qmul(qmul(qconj(q), lam), q)


def decompose_array(y, x):
    """Split y into <y,x>x and (1/2) x [y, x]."""
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    par = qdot(y, x)[..., None] * x
    perp = 0.5 * qmul(x, bracket(y, x))
    return par, perp


# ---------------------------------------------------------------------------
# value classes
# ---------------------------------------------------------------------------

class _QuatBase:
    def as_array(self) -> np.ndarray:  # pragma: no cover - overridden
        raise NotImplementedError


@dataclass(frozen=True)
class Quaternion(_QuatBase):
    w: float = 0.0
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    @classmethod
    def from_array(cls, a) -> "Quaternion":
        a = np.asarray(a, dtype=float)
        return cls(float(a[0]), float(a[1]), float(a[2]), float(a[3]))

    def as_array(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z])

    def __mul__(self, other):
        if isinstance(other, _QuatBase):
            return Quaternion.from_array(qmul(self.as_array(), other.as_array()))
        return Quaternion.from_array(self.as_array() * float(other))

    __rmul__ = __mul__

    def __add__(self, other):
        return Quaternion.from_array(self.as_array() + _arr(other))

    def __sub__(self, other):
        return Quaternion.from_array(self.as_array() - _arr(other))

    def __neg__(self):
        return Quaternion.from_array(-self.as_array())

    def conj(self) -> "Quaternion":
        return Quaternion(self.w, -self.x, -self.y, -self.z)

    def norm(self) -> float:
        return float(np.sqrt(self.w**2 + self.x**2 + self.y**2 + self.z**2))

    def inverse(self) -> "Quaternion":
        return Quaternion.from_array(qinv(self.as_array()))

    def dot(self, other) -> float:
        return float(qdot(self.as_array(), _arr(other)))

    def isclose(self, other, tol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.as_array() - _arr(other))) <= tol)


class UnitQuaternion(Quaternion):
    """Element of S^3 = Sp(1); normalised on construction."""

    def __init__(self, w=1.0, x=0.0, y=0.0, z=0.0):
        a = np.array([w, x, y, z], dtype=float)
        n = np.sqrt(np.sum(a * a))
        if n == 0.0:
            raise ValueError("zero quaternion has no unit normalisation")
        a = a / n
        object.__setattr__(self, "w", float(a[0]))
        object.__setattr__(self, "x", float(a[1]))
        object.__setattr__(self, "y", float(a[2]))
        object.__setattr__(self, "z", float(a[3]))

    @classmethod
    def from_array(cls, a) -> "UnitQuaternion":
        a = np.asarray(a, dtype=float)
        return cls(*a[:4])

    def inverse(self) -> "UnitQuaternion":
        return UnitQuaternion(self.w, -self.x, -self.y, -self.z)


@dataclass(frozen=True)
class LieValue(_QuatBase):
    """Element of sp(1), the purely imaginary quaternions."""

    v1: float = 0.0
    v2: float = 0.0
    v3: float = 0.0

    @classmethod
    def from_array(cls, a) -> "LieValue":
        a = np.asarray(a, dtype=float)
        if a.shape[-1] == 4:
            a = a[1:]
        return cls(float(a[0]), float(a[1]), float(a[2]))

    def as_array(self) -> np.ndarray:
        return np.array([0.0, self.v1, self.v2, self.v3])

    def vector(self) -> np.ndarray:
        return np.array([self.v1, self.v2, self.v3])

    def norm(self) -> float:
        return float(np.sqrt(self.v1**2 + self.v2**2 + self.v3**2))

    def __add__(self, other):
        return LieValue.from_array(self.as_array() + _arr(other))

    def __sub__(self, other):
        return LieValue.from_array(self.as_array() - _arr(other))

    def __mul__(self, s):
        return LieValue(self.v1 * s, self.v2 * s, self.v3 * s)

    __rmul__ = __mul__

    def bracket(self, other: "LieValue") -> "LieValue":
        return LieValue.from_array(bracket(self.as_array(), other.as_array()))

    def dot(self, other) -> float:
        return float(qdot(self.as_array(), _arr(other)))

    def isclose(self, other, tol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.as_array() - _arr(other))) <= tol)


class ImUnit(LieValue):
    """Point of S^2, a purely imaginary unit quaternion."""

    def __init__(self, x1=1.0, x2=0.0, x3=0.0):
        a = np.array([x1, x2, x3], dtype=float)
        n = np.sqrt(np.sum(a * a))
        if n == 0.0:
            raise ValueError("zero vector is not on S^2")
        a = a / n
        object.__setattr__(self, "v1", float(a[0]))
        object.__setattr__(self, "v2", float(a[1]))
        object.__setattr__(self, "v3", float(a[2]))

    @classmethod
    def from_array(cls, a) -> "ImUnit":
        a = np.asarray(a, dtype=float)
        if a.shape[-1] == 4:
            a = a[1:]
        return cls(*a)


@dataclass(frozen=True)
class UnitComplex(_QuatBase):
    """Point of S^1 embedded as cos(angle) + sin(angle) i."""

    angle: float = 0.0

    @classmethod
    def from_parts(cls, re: float, im: float) -> "UnitComplex":
        return cls(float(np.mod(np.arctan2(im, re), 2 * np.pi)))

    @property
    def re(self) -> float:
        return float(np.cos(self.angle))

    @property
    def im(self) -> float:
        return float(np.sin(self.angle))

    def as_array(self) -> np.ndarray:
        return np.array([np.cos(self.angle), np.sin(self.angle), 0.0, 0.0])

    def __mul__(self, other: "UnitComplex") -> "UnitComplex":
        return UnitComplex(float(np.mod(self.angle + other.angle, 2 * np.pi)))


# ---------------------------------------------------------------------------
# operations on values
# ---------------------------------------------------------------------------

def qexp(v) -> UnitQuaternion:
    a = qexp_array(_arr(v))
    return UnitQuaternion.from_array(a)


def qlog(q) -> LieValue:
    return LieValue.from_array(qlog_array(_arr(q)))


def hopf_sigma(q) -> ImUnit:
    return ImUnit.from_array(hopf_sigma_array(_arr(q)))


def rotate(q, x) -> LieValue:
    return LieValue.from_array(rotate_array(_arr(q), _arr(x)))


def decompose(y, x) -> tuple[LieValue, LieValue]:
    par, perp = decompose_array(_arr(y), _arr(x))
    return LieValue.from_array(par), LieValue.from_array(perp)


def frak_q(x, lam) -> UnitQuaternion:
    return UnitQuaternion.from_array(frak_q_array(_arr(x), _arr(lam)))
