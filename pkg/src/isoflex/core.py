"""Points, planes, congruences and the metric duality of isotropic 3-space.

Planes are kept in graph form ``z = g1*x + g2*y - h``; isotropic planes
(those containing the z-direction) cannot be represented and surface as
:class:`~isoflex.errors.IsotropicPlaneError` when one would be built.

The metric duality is the polarity in the paraboloid ``2z = x^2 + y^2``:
the point ``(p1, p2, p3)`` corresponds to the plane ``z = p1*x + p2*y - p3``.
"""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .errors import DegenerateError, IsotropicPlaneError, PreconditionError

DEFAULT_TOL = 1e-9

E1 = np.array([1.0, 0.0, 0.0])
E2 = np.array([0.0, 1.0, 0.0])
E3 = np.array([0.0, 0.0, 1.0])


def _finite(values, what):
    for v in values:
        if not math.isfinite(v):
            raise PreconditionError(f"{what} has a non-finite coordinate: {values!r}")


class _Point3(NamedTuple):
    x: float
    y: float
    z: float


class Point3(_Point3):
    """A point (or vector) of isotropic space."""

    __slots__ = ()

    def __new__(cls, x, y, z):
        x, y, z = float(x), float(y), float(z)
        _finite((x, y, z), "Point3")
        return super().__new__(cls, x, y, z)

    @classmethod
    def of(cls, p) -> "Point3":
        x, y, z = p
        return cls(x, y, z)

    def array(self) -> np.ndarray:
        return np.array(self, dtype=float)


class _TopView2(NamedTuple):
    x: float
    y: float


class TopView2(_TopView2):
    __slots__ = ()

    def __new__(cls, x, y):
        x, y = float(x), float(y)
        _finite((x, y), "TopView2")
        return super().__new__(cls, x, y)


class _Plane(NamedTuple):
    g1: float
    g2: float
    h: float


class NonIsotropicPlane(_Plane):
    """The plane ``z = g1*x + g2*y - h``.

    Its metric dual point is ``(g1, g2, h)``.
    """

    __slots__ = ()

    def __new__(cls, g1, g2, h):
        g1, g2, h = float(g1), float(g2), float(h)
        _finite((g1, g2, h), "NonIsotropicPlane")
        return super().__new__(cls, g1, g2, h)

    def z_at(self, x, y):
        return self.g1 * x + self.g2 * y - self.h

    def normal(self) -> np.ndarray:
        """Upward-pointing (non-unit) normal ``(-g1, -g2, 1)``."""
        return np.array([-self.g1, -self.g2, 1.0])

    def signed_offset(self, p) -> float:
        """``z(p) - plane(x(p), y(p))``; zero iff the point lies on the plane."""
        return p[2] - self.z_at(p[0], p[1])

    def distance(self, p) -> float:
        """Euclidean distance from ``p`` to the plane."""
        return abs(self.signed_offset(p)) / math.sqrt(1.0 + self.g1**2 + self.g2**2)


class _Congruence(NamedTuple):
    phi: float
    c1: float
    c2: float
    b: Point3


class IsotropicCongruence(_Congruence):
    """``x -> A x + b`` with ``A = [[cos, -sin, 0], [sin, cos, 0], [c1, c2, 1]]``."""

    __slots__ = ()

    def __new__(cls, phi=0.0, c1=0.0, c2=0.0, b=(0.0, 0.0, 0.0)):
        phi, c1, c2 = float(phi), float(c1), float(c2)
        _finite((phi, c1, c2), "IsotropicCongruence")
        return super().__new__(cls, phi, c1, c2, Point3.of(b))

    @classmethod
    def identity(cls) -> "IsotropicCongruence":
        return cls()

    def matrix(self) -> np.ndarray:
        c, s = math.cos(self.phi), math.sin(self.phi)
        return np.array([[c, -s, 0.0], [s, c, 0.0], [self.c1, self.c2, 1.0]])

    def __call__(self, points):
        return apply_congruence(self, points)


class InfinitesimalCongruence(_Congruence):
    """Velocity field ``x -> a x + b`` with ``a = [[0, -phi, 0], [phi, 0, 0], [c1, c2, 0]]``."""

    __slots__ = ()

    def __new__(cls, phi=0.0, c1=0.0, c2=0.0, b=(0.0, 0.0, 0.0)):
        phi, c1, c2 = float(phi), float(c1), float(c2)
        _finite((phi, c1, c2), "InfinitesimalCongruence")
        return super().__new__(cls, phi, c1, c2, Point3.of(b))

    def matrix(self) -> np.ndarray:
        return np.array([[0.0, -self.phi, 0.0], [self.phi, 0.0, 0.0], [self.c1, self.c2, 0.0]])

    def parameters(self) -> np.ndarray:
        """``(phi, c1, c2, b1, b2, b3)``."""
        return np.array([self.phi, self.c1, self.c2, *self.b])


def top_view(p) -> TopView2:
    return TopView2(p[0], p[1])


def iso_distance(p, q) -> float:
    return math.hypot(q[0] - p[0], q[1] - p[1])


def replacing_distance(p, q, tol: float = DEFAULT_TOL) -> float:
    scale = max(1.0, abs(p[0]), abs(p[1]), abs(q[0]), abs(q[1]))
    if iso_distance(p, q) > tol * scale:
        raise PreconditionError("replacing distance is only defined for parallel points")
    return abs(p[2] - q[2])


def dual_point_to_plane(p) -> NonIsotropicPlane:
    return NonIsotropicPlane(p[0], p[1], p[2])


def dual_plane_to_point(plane: NonIsotropicPlane) -> Point3:
    return Point3(plane.g1, plane.g2, plane.h)


def plane_through(a, b, c, tol: float = DEFAULT_TOL) -> NonIsotropicPlane:
    """The unique plane through three points.

    Raises DegenerateError for (nearly) collinear points and
    IsotropicPlaneError when the plane contains the z-direction.
    """
    a, b, c = (np.asarray(v, dtype=float) for v in (a, b, c))
    u, v = b - a, c - a
    n = np.cross(u, v)
    nn = np.linalg.norm(n)
    if nn <= tol * max(np.linalg.norm(u) * np.linalg.norm(v), tol):
        raise DegenerateError("points are collinear")
    return plane_from_normal(n, a, tol)


def plane_from_normal(n, point, tol: float = DEFAULT_TOL) -> NonIsotropicPlane:
    n = np.asarray(n, dtype=float)
    nn = np.linalg.norm(n)
    if nn == 0.0:
        raise DegenerateError("zero normal")
    if abs(n[2]) < tol * nn:
        raise IsotropicPlaneError("plane contains the isotropic direction")
    g1, g2 = -n[0] / n[2], -n[1] / n[2]
    h = g1 * point[0] + g2 * point[1] - point[2]
    return NonIsotropicPlane(g1, g2, h)


def iso_angle(p: NonIsotropicPlane, q: NonIsotropicPlane) -> float:
    # Distance of the dual points' top views; see the module notes in README
    # for why this form is used rather than a difference of slopes.
    return math.hypot(p.g1 - q.g1, p.g2 - q.g2)


def apply_congruence(C: IsotropicCongruence, points):
    """Apply ``C`` to one point (returns Point3) or an ``(..., 3)`` array."""
    arr = np.asarray(points, dtype=float)
    out = arr @ C.matrix().T + np.asarray(C.b)
    if arr.ndim == 1:
        return Point3.of(out)
    return out


def compose(C1: IsotropicCongruence, C2: IsotropicCongruence) -> IsotropicCongruence:
    """``C1 o C2``: apply C2 first, then C1."""
    c, s = math.cos(C2.phi), math.sin(C2.phi)
    # bottom row of A1 @ A2 is (c1, c2) of C1 times the rotation of C2, plus C2's shear
    c1 = C1.c1 * c + C1.c2 * s + C2.c1
    c2 = -C1.c1 * s + C1.c2 * c + C2.c2
    b = C1.matrix() @ np.asarray(C2.b) + np.asarray(C1.b)
    return IsotropicCongruence(C1.phi + C2.phi, c1, c2, b)


def field_at(V: InfinitesimalCongruence, points):
    """Evaluate the velocity field at one point (Point3) or an array of points."""
    arr = np.asarray(points, dtype=float)
    out = arr @ V.matrix().T + np.asarray(V.b)
    if arr.ndim == 1:
        return Point3.of(out)
    return out


def det3(a, b, c) -> float:
    return float(np.dot(a, np.cross(b, c)))
