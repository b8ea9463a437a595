"""Lattices on the flat torus and on boxes, quaternion fields, and QF3 file I/O.

Values live in ``(n1, n2, n3, 4)`` arrays indexed ``[i1, i2, i3]``. On disk the
QF3 format lists vertices with the first index running fastest, which is the
Fortran ordering of the three spatial axes.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field as dc_field
from typing import Callable

import numpy as np

from .errors import BadDims, FormatError, KindViolation

FIELD_TOL = 1e-9
BOUNDARY_TOL = 1e-6
PROJECT_TOL = FIELD_TOL * 1e3

KINDS = ("S3", "S2", "S1", "H")
MAGIC = b"QF3\x00"
VERSION = 1


@dataclass(frozen=True)
class Torus:
    periods: tuple[float, float, float] = (1.0, 1.0, 1.0)

    def __post_init__(self):
        p = tuple(float(v) for v in np.broadcast_to(self.periods, (3,)))
        object.__setattr__(self, "periods", p)


@dataclass(frozen=True)
class Box:
    R: float = 6.0
    far_value: tuple[float, float, float, float] = (1.0, 0.0, 0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "R", float(self.R))
        fv = tuple(float(v) for v in np.asarray(self.far_value, dtype=float).reshape(4))
        object.__setattr__(self, "far_value", fv)


@dataclass(frozen=True)
class Lattice3:
    """Regular vertex lattice on a torus or on the box ``[-R, R]^3``."""

    dims: tuple[int, int, int]
    domain: Torus | Box
    spacing: tuple[float, float, float] = dc_field(init=False)

    def __post_init__(self):
        dims = tuple(int(n) for n in np.broadcast_to(self.dims, (3,)))
        if any(n < 8 for n in dims):
            raise BadDims(f"every dimension must be at least 8, got {dims}")
        object.__setattr__(self, "dims", dims)
        if isinstance(self.domain, Torus):
            if any(L <= 0 for L in self.domain.periods):
                raise BadDims("torus periods must be positive")
            h = tuple(L / n for L, n in zip(self.domain.periods, dims))
        elif isinstance(self.domain, Box):
            if self.domain.R <= 0:
                raise BadDims("box half extent must be positive")
            h = tuple(2.0 * self.domain.R / (n - 1) for n in dims)
        else:
            raise BadDims(f"unknown domain {self.domain!r}")
        object.__setattr__(self, "spacing", h)

    @property
    def is_torus(self) -> bool:
        return isinstance(self.domain, Torus)

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.dims

    @property
    def cell_volume(self) -> float:
        h = self.spacing
        return h[0] * h[1] * h[2]

    def axis(self, d: int) -> np.ndarray:
        """Coordinates of the vertices along axis ``d``."""
        n = self.dims[d]
        h = self.spacing[d]
        if self.is_torus:
            return np.arange(n) * h
        return -self.domain.R + np.arange(n) * h

    def coords(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Broadcastable coordinate arrays, shapes (n1,1,1), (1,n2,1), (1,1,n3)."""
        x = self.axis(0)[:, None, None]
        y = self.axis(1)[None, :, None]
        z = self.axis(2)[None, None, :]
        return x, y, z

    def positions(self) -> np.ndarray:
        """Full ``(n1, n2, n3, 3)`` array of vertex positions."""
        x, y, z = self.coords()
        return np.stack(np.broadcast_arrays(x, y, z), axis=-1)

    def neighbor(self, index, d: int, steps: int = 1):
        """Index reached by moving ``steps`` along axis ``d`` (wraps on the torus)."""
        idx = list(index)
        idx[d] += steps
        if self.is_torus:
            idx[d] %= self.dims[d]
        elif not 0 <= idx[d] < self.dims[d]:
            raise IndexError("step leaves the box")
        return tuple(idx)


def make_lattice(dims, domain) -> Lattice3:
    """Build a lattice, raising :class:`BadDims` for invalid input.

    Examples
    --------
    >>> make_lattice((16, 16, 16), Torus((1, 1, 1))).spacing
    (0.0625, 0.0625, 0.0625)
    """
    if np.isscalar(dims):
        dims = (int(dims),) * 3
    return Lattice3(tuple(dims), domain)


def torus(n, L=1.0) -> Lattice3:
    """Shortcut for a cubic torus lattice."""
    return make_lattice(n, Torus(tuple(np.broadcast_to(np.asarray(L, float), (3,)))))


def box(n, R=6.0, far_value=(1.0, 0.0, 0.0, 0.0)) -> Lattice3:
    """Shortcut for a cubic box lattice."""
    return make_lattice(n, Box(R, far_value))


# ---------------------------------------------------------------------------
# fields
# ---------------------------------------------------------------------------

def _kind_defect(values: np.ndarray, kind: str) -> float:
    if kind == "H":
        return 0.0
    norm_err = np.abs(np.sqrt(np.sum(values * values, axis=-1)) - 1.0)
    err = float(np.max(norm_err)) if norm_err.size else 0.0
    if kind == "S2":
        err = max(err, float(np.max(np.abs(values[..., 0]))))
    elif kind == "S1":
        err = max(err, float(np.max(np.abs(values[..., 2:]))))
    return err


def project_kind(values: np.ndarray, kind: str) -> np.ndarray:
    """Project values onto the target of ``kind`` (no tolerance check)."""
    v = np.array(values, dtype=float, copy=True)
    if kind == "H":
        return v
    if kind == "S2":
        v[..., 0] = 0.0
    elif kind == "S1":
        v[..., 2:] = 0.0
    n = np.sqrt(np.sum(v * v, axis=-1))
    if np.any(n == 0.0):
        raise KindViolation(f"zero value cannot be projected to {kind}")
    return v / n[..., None]


class Field:
    """Per-vertex quaternion values on a lattice together with a target kind.

    Parameters
    ----------
    lattice : Lattice3
    values : ndarray, shape (n1, n2, n3, 4)
    kind : {"S3", "S2", "S1", "H"}
    check : bool
        Validate the kind invariant and the box outer-shell constancy.
    """

    __slots__ = ("lattice", "values", "kind")

    def __init__(self, lattice: Lattice3, values, kind: str = "S3", check: bool = True):
        if kind not in KINDS:
            raise KindViolation(f"unknown kind {kind!r}")
        values = np.ascontiguousarray(values, dtype=float)
        if values.shape != lattice.dims + (4,):
            raise BadDims(f"values of shape {values.shape} do not match {lattice.dims}")
        if check:
            defect = _kind_defect(values, kind)
            if defect > FIELD_TOL:
                raise KindViolation(f"{kind} invariant violated by {defect:.3e}")
        values.setflags(write=False)
        self.lattice = lattice
        self.values = values
        self.kind = kind

    def __repr__(self):
        return f"Field(kind={self.kind}, dims={self.lattice.dims})"

    def __eq__(self, other):
        return (
            isinstance(other, Field)
            and self.kind == other.kind
            and self.lattice == other.lattice
            and np.array_equal(self.values, other.values)
        )

    def with_values(self, values, kind: str | None = None, check: bool = True) -> "Field":
        return Field(self.lattice, values, kind or self.kind, check=check)

    def boundary_defect(self) -> float:
        """Max distance of the two outer vertex shells from the far value (box only)."""
        lat = self.lattice
        if lat.is_torus:
            return 0.0
        mask = shell_mask(lat, 2)
        fv = np.asarray(lat.domain.far_value)
        return float(np.max(np.abs(self.values[mask] - fv)))


def shell_mask(lattice: Lattice3, width: int = 2) -> np.ndarray:
    """Boolean mask of the ``width`` outermost vertex shells of a box."""
    mask = np.zeros(lattice.dims, dtype=bool)
    for d in range(3):
        sl = [slice(None)] * 3
        sl[d] = slice(0, width)
        mask[tuple(sl)] = True
        sl[d] = slice(lattice.dims[d] - width, None)
        mask[tuple(sl)] = True
    return mask


def sample(lattice: Lattice3, f: Callable, kind: str = "S3") -> Field:
    """Evaluate ``f`` at every vertex and wrap the result as a :class:`Field`.

    ``f`` receives the ``(n1, n2, n3, 3)`` position array and must return an
    ``(n1, n2, n3, 4)`` array (or anything broadcastable to it). Values within
    ``1e-6`` of the target are projected onto it; anything further away is
    rejected with :class:`KindViolation`.
    """
    pos = lattice.positions()
    vals = np.broadcast_to(np.asarray(f(pos), dtype=float), lattice.dims + (4,))
    return field_from_values(lattice, vals, kind)


def field_from_values(lattice: Lattice3, values, kind: str = "S3", tol: float = PROJECT_TOL) -> Field:
    """Project ``values`` onto ``kind`` when within ``tol`` and build a field.

    The projection of a constant ``1 + i`` onto S3 is allowed (it only rescales),
    so the tolerance applies to the discarded components rather than to the norm.
    """
    values = np.asarray(values, dtype=float)
    if kind == "S2":
        off = float(np.max(np.abs(values[..., 0])))
    elif kind == "S1":
        off = float(np.max(np.abs(values[..., 2:])))
    else:
        off = 0.0
    if off > tol:
        raise KindViolation(f"values are {off:.3e} away from {kind}")
    return Field(lattice, project_kind(values, kind), kind)


def constant_field(lattice: Lattice3, value, kind: str = "S3") -> Field:
    v = np.broadcast_to(np.asarray(value, dtype=float), lattice.dims + (4,))
    return field_from_values(lattice, v, kind)


# ---------------------------------------------------------------------------
# QF3 I/O
# ---------------------------------------------------------------------------

_HEADER = struct.Struct("<4sIBBH3I3d4d")


def write_field(field: Field, path) -> None:
    """Write ``field`` in QF3 format (little-endian, first index fastest)."""
    lat = field.lattice
    if lat.is_torus:
        tag, params, fv = 0, lat.domain.periods, (1.0, 0.0, 0.0, 0.0)
    else:
        tag, params, fv = 1, (lat.domain.R, 0.0, 0.0), lat.domain.far_value
    header = _HEADER.pack(MAGIC, VERSION, tag, KINDS.index(field.kind), 0, *lat.dims, *params, *fv)
    body = np.asarray(field.values, dtype="<f8").transpose(2, 1, 0, 3)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(body).tobytes())


def read_field(path) -> Field:
    """Read a QF3 file; raises :class:`FormatError` on malformed input."""
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < _HEADER.size:
        raise FormatError("file shorter than the QF3 header")
    magic, version, tag, kind_tag, reserved, n1, n2, n3, p1, p2, p3, *fv = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatError("bad magic bytes")
    if version != VERSION:
        raise FormatError(f"unsupported version {version}")
    if tag not in (0, 1):
        raise FormatError(f"unknown domain tag {tag}")
    if kind_tag >= len(KINDS):
        raise FormatError(f"unknown kind tag {kind_tag}")
    if reserved != 0:
        raise FormatError("reserved header bytes are not zero")
    dims = (n1, n2, n3)
    expected = _HEADER.size + 8 * 4 * n1 * n2 * n3
    if len(data) != expected:
        raise FormatError(f"expected {expected} bytes, found {len(data)}")
    try:
        domain = Torus((p1, p2, p3)) if tag == 0 else Box(p1, tuple(fv))
        lat = make_lattice(dims, domain)
    except BadDims as exc:
        raise FormatError(str(exc)) from exc
    raw = np.frombuffer(data, dtype="<f8", offset=_HEADER.size).reshape(n3, n2, n1, 4)
    values = np.ascontiguousarray(raw.transpose(2, 1, 0, 3)).astype(float)
    return Field(lat, values, KINDS[kind_tag])
