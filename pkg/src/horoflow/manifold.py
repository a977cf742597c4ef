"""Hadamard model spaces with exact metric, geodesic, and isometry operations.

Two models ship: Euclidean space E^n and real hyperbolic space H^n in the
upper half-space chart ``(x_1, ..., x_{n-1}, z)`` with ``z > 0`` and metric
``(dx^2 + dz^2) / z^2``. Everything here is closed form; no ODE solves. All
operations are pure functions of immutable values, so concurrent use needs
no synchronization.

The array-level geometry lives on :class:`ModelSpace` (vectorized over a
leading batch axis); the typed layer (:class:`Point`, :class:`TangentVec`
and the module-level functions) validates inputs and is the public contract
surface.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

EUCLIDEAN = "euclidean"
HYPERBOLIC = "hyperbolic-halfspace"

# Chart points with z below this raise instead of producing infinities.
MIN_CHART_HEIGHT = 1e-300


class GeometryError(ValueError):
    """Base class for invalid geometric input."""


class ModelMismatchError(GeometryError):
    """Operands belong to different model spaces."""


class ChartDomainError(GeometryError):
    """Coordinates left the valid chart (z <= 0 in the half-space)."""


class BoundaryConfigError(GeometryError):
    """Invalid ideal-boundary configuration (e.g. coincident points)."""


def _as_coords(x) -> np.ndarray:
    a = np.asarray(x, dtype=float)
    if a.ndim == 0:
        raise GeometryError("coordinates must be a vector, got a scalar")
    return a


@dataclass(frozen=True)
class ModelSpace:
    """A Hadamard model: ``euclidean`` (curvature 0) or ``hyperbolic-halfspace``
    (curvature -1), with runtime dimension ``2 <= dim <= 8``."""

    kind: str
    dim: int

    def __post_init__(self):
        if self.kind not in (EUCLIDEAN, HYPERBOLIC):
            raise GeometryError(f"unknown model kind {self.kind!r}")
        if not (2 <= int(self.dim) <= 8):
            raise GeometryError(f"dimension must be in [2, 8], got {self.dim}")

    @property
    def is_hyperbolic(self) -> bool:
        return self.kind == HYPERBOLIC

    # -- chart validation -------------------------------------------------

    def check_coords(self, x) -> np.ndarray:
        x = _as_coords(x)
        if x.shape[-1] != self.dim:
            raise GeometryError(
                f"coordinate length {x.shape[-1]} != model dimension {self.dim}"
            )
        if not np.all(np.isfinite(x)):
            raise ChartDomainError("non-finite coordinates")
        if self.is_hyperbolic and np.any(x[..., -1] < MIN_CHART_HEIGHT):
            raise ChartDomainError(
                "half-space chart requires z >= 1e-300; point left the chart"
            )
        return x

    # -- metric ------------------------------------------------------------

    def inner(self, base, u, v):
        """Riemannian inner product of chart vectors u, v at base."""
        base = self.check_coords(base)
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        dot = np.sum(u * v, axis=-1)
        if self.is_hyperbolic:
            return dot / base[..., -1] ** 2
        return dot

    def norm(self, base, u):
        return np.sqrt(self.inner(base, u, u))

    def unit(self, base, u):
        """Rescale a chart vector to unit Riemannian length."""
        n = self.norm(base, u)
        if np.any(n == 0.0):
            raise GeometryError("cannot normalize a zero tangent vector")
        return u / np.expand_dims(np.asarray(n), -1) if np.ndim(n) else u / n

    def volume_density(self, x):
        """sqrt(det g) in chart coordinates: z^-n in H^n, 1 in E^n."""
        x = self.check_coords(x)
        if self.is_hyperbolic:
            return x[..., -1] ** (-self.dim)
        return np.ones(x.shape[:-1]) if x.ndim > 1 else 1.0

    # -- distance and geodesics --------------------------------------------

    def distance(self, p, q):
        p = self.check_coords(p)
        q = self.check_coords(q)
        if self.is_hyperbolic:
            sep = np.linalg.norm(q - p, axis=-1)
            return 2.0 * np.arcsinh(sep / (2.0 * np.sqrt(p[..., -1] * q[..., -1])))
        return np.linalg.norm(q - p, axis=-1)

    def exp(self, p, w):
        """Exponential map: endpoint of the geodesic from p with initial
        chart velocity w, run for unit time (closed form in both models)."""
        p = self.check_coords(p)
        w = np.asarray(w, dtype=float)
        if not self.is_hyperbolic:
            return p + w

        p, w = np.broadcast_arrays(p, w)
        squeeze = p.ndim == 1
        P = np.atleast_2d(p)
        W = np.atleast_2d(w)
        out = np.array(P, copy=True)

        z = P[:, -1]
        t = np.linalg.norm(W, axis=-1) / z  # Riemannian length of w
        moving = t > 0.0
        if np.any(moving):
            Pm, Wm, tm = P[moving], W[moving], t[moving]
            zm = Pm[:, -1]
            vm = Wm / tm[:, None]  # unit: |v|_chart = z
            out[moving] = self._exp_unit(Pm, vm, zm, tm)
        res = out[0] if squeeze else out
        return self.check_coords(res)

    def _exp_unit(self, P, V, z, t):
        """Geodesic endpoints for chart-unit velocities (|V| = z), t > 0."""
        hlen = np.linalg.norm(V[:, :-1], axis=-1)
        out = np.empty_like(P)
        vertical = hlen <= 1e-14 * z
        if np.any(vertical):
            sgn = np.sign(V[vertical, -1])
            out[vertical] = P[vertical]
            out[vertical, -1] = z[vertical] * np.exp(sgn * t[vertical])
        circ = ~vertical
        if np.any(circ):
            Pc, Vc = P[circ], V[circ]
            zc, tc, a = z[circ], t[circ], hlen[circ]
            u = Vc[:, :-1] / a[:, None]
            xi_c = zc * Vc[:, -1] / a  # circle center offset along u
            r = np.hypot(xi_c, zc)
            # half-angle tangent of the start angle, evaluated stably
            tan_half = np.where(xi_c <= 0.0, zc / (r - xi_c), (r + xi_c) / zc)
            th = tan_half * np.exp(-tc)
            denom = 1.0 + th * th
            sin_t = 2.0 * th / denom
            cos_t = (1.0 - th * th) / denom
            xi = xi_c + r * cos_t
            out[circ] = Pc
            out[circ, :-1] = Pc[:, :-1] + xi[:, None] * u
            out[circ, -1] = r * sin_t
        return out

    def log(self, p, q):
        """Inverse of exp: chart velocity w at p with exp(p, w) = q."""
        p = self.check_coords(p)
        q = self.check_coords(q)
        if not self.is_hyperbolic:
            return q - p

        p, q = np.broadcast_arrays(p, q)
        squeeze = p.ndim == 1
        P, Q = np.atleast_2d(p), np.atleast_2d(q)
        zp, zq = P[:, -1], Q[:, -1]
        dbar = Q[:, :-1] - P[:, :-1]
        hsep = np.linalg.norm(dbar, axis=-1)
        out = np.zeros_like(P)

        vertical = hsep <= 1e-14 * np.maximum(zp, zq)
        if np.any(vertical):
            out[vertical, -1] = zp[vertical] * np.log(zq[vertical] / zp[vertical])
        circ = ~vertical
        if np.any(circ):
            u = dbar[circ] / hsep[circ, None]
            xq, z1, z2 = hsep[circ], zp[circ], zq[circ]
            c = (xq * xq + z2 * z2 - z1 * z1) / (2.0 * xq)
            r = np.hypot(c, z1)
            th_p = np.arctan2(z1, -c)
            th_q = np.arctan2(z2, xq - c)
            t = np.log(np.tan(th_p / 2.0) / np.tan(th_q / 2.0))
            sin_p, cos_p = np.sin(th_p), np.cos(th_p)
            out[circ, :-1] = (t * r * sin_p * sin_p)[:, None] * u
            out[circ, -1] = -t * r * sin_p * cos_p
        return out[0] if squeeze else out

    def geodesic(self, p, v, t):
        """Unit-speed geodesic from p with initial unit chart velocity v."""
        w = np.asarray(t, dtype=float)[..., None] * np.asarray(v, dtype=float)
        return self.exp(p, w)

    # -- sampling helpers ----------------------------------------------------

    def random_points(self, rng: np.random.Generator, count: int, spread: float = 1.0) -> np.ndarray:
        """Random chart points in a moderate region (z in roughly [e^-spread, e^spread])."""
        pts = rng.normal(scale=spread, size=(count, self.dim))
        if self.is_hyperbolic:
            pts[:, -1] = np.exp(np.clip(pts[:, -1], -2.5 * spread, 2.5 * spread))
        return pts

    def random_unit_vectors(self, base: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        raw = rng.normal(size=base.shape)
        norms = self.norm(base, raw)
        return raw / np.expand_dims(norms, -1)


@dataclass(frozen=True)
class Point:
    """A point of a model space, held as chart coordinates."""

    model: ModelSpace
    coords: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coords", self.model.check_coords(np.array(self.coords, dtype=float)))
        if self.coords.ndim != 1:
            raise GeometryError("Point holds a single coordinate vector")

    @property
    def z(self) -> float:
        return float(self.coords[-1])

    def __repr__(self):
        return f"Point({self.model.kind}, {np.array2string(self.coords, precision=6)})"


@dataclass(frozen=True)
class TangentVec:
    """A tangent vector at a base point, in chart components."""

    base: Point
    components: np.ndarray

    def __post_init__(self):
        comp = np.array(self.components, dtype=float)
        if comp.shape != self.base.coords.shape:
            raise GeometryError("tangent components must match the base dimension")
        object.__setattr__(self, "components", comp)

    @property
    def model(self) -> ModelSpace:
        return self.base.model

    def norm(self) -> float:
        return float(self.model.norm(self.base.coords, self.components))


def _same_model(*objs) -> ModelSpace:
    models = {o.model for o in objs}
    if len(models) != 1:
        raise ModelMismatchError(f"mixed model spaces: {models}")
    return models.pop()


def metric_inner(u: TangentVec, v: TangentVec) -> float:
    """Riemannian inner product; operands must share the base point."""
    _same_model(u, v)
    if not np.array_equal(u.base.coords, v.base.coords):
        raise ModelMismatchError("tangent vectors have different base points")
    return float(u.model.inner(u.base.coords, u.components, v.components))


def distance(p: Point, q: Point) -> float:
    m = _same_model(p, q)
    return float(m.distance(p.coords, q.coords))


def volume_density(p: Point) -> float:
    return float(p.model.volume_density(p.coords))


UNIT_SPEED_TOL = 1e-12


def geodesic(p: Point, v: TangentVec, t: float) -> Point:
    """Point at arc length t along the unit-speed geodesic from p with velocity v."""
    _same_model(p, v.base)
    if abs(v.norm() - 1.0) > UNIT_SPEED_TOL:
        raise GeometryError(f"geodesic requires a unit tangent vector, |v| = {v.norm()}")
    return Point(p.model, p.model.exp(p.coords, float(t) * v.components))


def exp_map(p: Point, w: TangentVec) -> Point:
    _same_model(p, w.base)
    return Point(p.model, p.model.exp(p.coords, w.components))


def log_map(p: Point, q: Point) -> TangentVec:
    m = _same_model(p, q)
    return TangentVec(p, m.log(p.coords, q.coords))


# --------------------------------------------------------------------------
# Ideal boundary
# --------------------------------------------------------------------------

BOUNDARY_FINITE = "finite"
BOUNDARY_INFINITY = "infinity"
BOUNDARY_DIRECTION = "direction"


@dataclass(frozen=True)
class BoundaryPoint:
    """A point at infinity.

    Half-space chart: either a finite point of R^{n-1} on the z=0 boundary or
    the symbol infinity. Euclidean space: a unit direction vector.
    """

    model: ModelSpace
    kind: str
    data: np.ndarray | None = None

    def __post_init__(self):
        if self.kind == BOUNDARY_FINITE:
            if not self.model.is_hyperbolic:
                raise BoundaryConfigError("finite boundary points live on the half-space boundary")
            d = np.array(self.data, dtype=float)
            if d.shape != (self.model.dim - 1,):
                raise BoundaryConfigError("finite boundary point must have n-1 coordinates")
            object.__setattr__(self, "data", d)
        elif self.kind == BOUNDARY_INFINITY:
            if not self.model.is_hyperbolic:
                raise BoundaryConfigError("the infinity symbol belongs to the half-space chart")
            object.__setattr__(self, "data", None)
        elif self.kind == BOUNDARY_DIRECTION:
            if self.model.is_hyperbolic:
                raise BoundaryConfigError("direction boundary points belong to the Euclidean model")
            d = np.array(self.data, dtype=float)
            if d.shape != (self.model.dim,):
                raise BoundaryConfigError("direction must have n coordinates")
            nrm = np.linalg.norm(d)
            if nrm == 0.0:
                raise BoundaryConfigError("direction must be nonzero")
            object.__setattr__(self, "data", d / nrm)
        else:
            raise BoundaryConfigError(f"unknown boundary kind {self.kind!r}")

    @property
    def is_infinity(self) -> bool:
        return self.kind == BOUNDARY_INFINITY

    def same_as(self, other: "BoundaryPoint", tol: float = 1e-12) -> bool:
        if self.model != other.model or self.kind != other.kind:
            return False
        if self.kind == BOUNDARY_INFINITY:
            return True
        return bool(np.max(np.abs(self.data - other.data)) <= tol)

    def __repr__(self):
        if self.kind == BOUNDARY_INFINITY:
            return "BoundaryPoint(inf)"
        return f"BoundaryPoint({self.kind}, {np.array2string(self.data, precision=6)})"


def boundary_finite(model: ModelSpace, xbar) -> BoundaryPoint:
    return BoundaryPoint(model, BOUNDARY_FINITE, np.asarray(xbar, dtype=float))


def boundary_infinity(model: ModelSpace) -> BoundaryPoint:
    return BoundaryPoint(model, BOUNDARY_INFINITY)


def boundary_direction(model: ModelSpace, u) -> BoundaryPoint:
    return BoundaryPoint(model, BOUNDARY_DIRECTION, np.asarray(u, dtype=float))


def boundary_from_direction(v: TangentVec) -> BoundaryPoint:
    """Endpoint at infinity of the geodesic ray with initial velocity v."""
    m = v.model
    if not m.is_hyperbolic:
        return boundary_direction(m, v.components)
    p = v.base.coords
    z = p[-1]
    comp = m.unit(p, v.components)  # |comp|_chart = z
    hbar = comp[:-1]
    hlen = float(np.linalg.norm(hbar))
    if hlen <= 1e-14 * z:
        if comp[-1] > 0:
            return boundary_infinity(m)
        return boundary_finite(m, p[:-1])
    u = hbar / hlen
    xi_c = z * comp[-1] / hlen
    r = float(np.hypot(xi_c, z))
    return boundary_finite(m, p[:-1] + (xi_c + r) * u)


def direction_to_boundary(p: Point, xi: BoundaryPoint) -> TangentVec:
    """Unit tangent vector at p pointing along the geodesic ray toward xi."""
    m = _same_model(p, xi)
    x = p.coords
    if not m.is_hyperbolic:
        return TangentVec(p, xi.data.copy())
    z = x[-1]
    if xi.is_infinity:
        comp = np.zeros(m.dim)
        comp[-1] = z
        return TangentVec(p, comp)
    dbar = xi.data - x[:-1]
    sep = float(np.linalg.norm(dbar))
    comp = np.zeros(m.dim)
    if sep <= 1e-14 * z:
        comp[-1] = -z
        return TangentVec(p, comp)
    u = dbar / sep
    c = (sep * sep - z * z) / (2.0 * sep)
    scale = z / np.hypot(z, c)
    comp[:-1] = scale * z * u
    comp[-1] = scale * c
    return TangentVec(p, comp)


# --------------------------------------------------------------------------
# Isometries
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class _Translate:
    offset: np.ndarray  # first n-1 chart coordinates

    def apply(self, x: np.ndarray) -> np.ndarray:
        y = np.array(x, copy=True)
        y[..., :-1] += self.offset
        return y

    def apply_boundary(self, xi: BoundaryPoint) -> BoundaryPoint:
        if xi.is_infinity:
            return xi
        return boundary_finite(xi.model, xi.data + self.offset)

    def inverse(self):
        return _Translate(-self.offset)


@dataclass(frozen=True)
class _Dilate:
    factor: float

    def apply(self, x: np.ndarray) -> np.ndarray:
        return x * self.factor

    def apply_boundary(self, xi: BoundaryPoint) -> BoundaryPoint:
        if xi.is_infinity:
            return xi
        return boundary_finite(xi.model, xi.data * self.factor)

    def inverse(self):
        return _Dilate(1.0 / self.factor)


@dataclass(frozen=True)
class _Invert:
    """Inversion through the unit sphere about the chart origin."""

    def apply(self, x: np.ndarray) -> np.ndarray:
        r2 = np.sum(x * x, axis=-1, keepdims=True)
        return x / r2

    def apply_boundary(self, xi: BoundaryPoint) -> BoundaryPoint:
        if xi.is_infinity:
            return boundary_finite(xi.model, np.zeros(xi.model.dim - 1))
        r2 = float(np.dot(xi.data, xi.data))
        if r2 == 0.0:
            return boundary_infinity(xi.model)
        return boundary_finite(xi.model, xi.data / r2)

    def inverse(self):
        return self


@dataclass(frozen=True)
class _RigidMotion:
    rotation: np.ndarray
    offset: np.ndarray

    def apply(self, x: np.ndarray) -> np.ndarray:
        return x @ self.rotation.T + self.offset

    def apply_boundary(self, xi: BoundaryPoint) -> BoundaryPoint:
        return boundary_direction(xi.model, xi.data @ self.rotation.T)

    def inverse(self):
        rt = self.rotation.T
        return _RigidMotion(rt, -self.offset @ self.rotation)


@dataclass(frozen=True)
class Isometry:
    """A distance-preserving map, stored as a composition of primitive moves.

    Half-space: horizontal translations, dilations x -> lambda*x, and the
    inversion through the unit sphere (Moebius maps fixing the upper half
    space). Euclidean: rigid motions.
    """

    model: ModelSpace
    ops: tuple = field(default_factory=tuple)

    def apply_coords(self, x) -> np.ndarray:
        y = self.model.check_coords(np.asarray(x, dtype=float))
        for op in self.ops:
            y = op.apply(y)
        return y

    def apply_point(self, p: Point) -> Point:
        return Point(self.model, self.apply_coords(p.coords))

    def apply_boundary(self, xi: BoundaryPoint) -> BoundaryPoint:
        out = xi
        for op in self.ops:
            out = op.apply_boundary(out)
        return out

    def inverse(self) -> "Isometry":
        return Isometry(self.model, tuple(op.inverse() for op in reversed(self.ops)))

    def compose(self, other: "Isometry") -> "Isometry":
        """self after other: (self.compose(other))(x) = self(other(x))."""
        if self.model != other.model:
            raise ModelMismatchError("cannot compose isometries of different models")
        return Isometry(self.model, other.ops + self.ops)

    @staticmethod
    def identity(model: ModelSpace) -> "Isometry":
        return Isometry(model, ())

    @staticmethod
    def translation(model: ModelSpace, offset) -> "Isometry":
        off = np.asarray(offset, dtype=float)
        if model.is_hyperbolic:
            if off.shape != (model.dim - 1,):
                raise GeometryError("half-space translations move the first n-1 coordinates")
            return Isometry(model, (_Translate(off),))
        if off.shape != (model.dim,):
            raise GeometryError("Euclidean translation offset must have n coordinates")
        return Isometry(model, (_RigidMotion(np.eye(model.dim), off),))

    @staticmethod
    def dilation(model: ModelSpace, factor: float) -> "Isometry":
        if not model.is_hyperbolic:
            raise GeometryError("dilations are half-space isometries only")
        if factor <= 0:
            raise GeometryError("dilation factor must be positive")
        return Isometry(model, (_Dilate(float(factor)),))

    @staticmethod
    def inversion(model: ModelSpace) -> "Isometry":
        if not model.is_hyperbolic:
            raise GeometryError("the sphere inversion is a half-space isometry only")
        return Isometry(model, (_Invert(),))

    @staticmethod
    def rigid(model: ModelSpace, rotation, offset) -> "Isometry":
        if model.is_hyperbolic:
            raise GeometryError("rigid motions parametrize Euclidean isometries only")
        rot = np.asarray(rotation, dtype=float)
        if not np.allclose(rot @ rot.T, np.eye(model.dim), atol=1e-12):
            raise GeometryError("rotation part must be orthogonal")
        return Isometry(model, (_RigidMotion(rot, np.asarray(offset, dtype=float)),))


def normalize_pair(xi1: BoundaryPoint, xi2: BoundaryPoint) -> Isometry:
    """Half-space isometry sending xi1 to the boundary origin and xi2 to infinity."""
    m = _same_model(xi1, xi2)
    if not m.is_hyperbolic:
        raise BoundaryConfigError("pair normalization is defined in the half-space model")
    if xi1.same_as(xi2):
        raise BoundaryConfigError("boundary points must be distinct")

    if xi2.is_infinity:
        if np.allclose(xi1.data, 0.0):
            return Isometry.identity(m)
        return Isometry.translation(m, -xi1.data)
    if xi1.is_infinity:
        # send xi2 to the origin, then swap 0 and infinity
        return Isometry.inversion(m).compose(Isometry.translation(m, -xi2.data))
    d = xi2.data - xi1.data
    j = Isometry.inversion(m)
    t1 = Isometry.translation(m, -xi1.data)
    t2 = Isometry.translation(m, -d / float(np.dot(d, d)))
    return j.compose(t2).compose(j).compose(t1)
