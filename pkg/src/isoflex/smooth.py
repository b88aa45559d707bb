"""Smooth nets: scale-translational surfaces, generalized T-surfaces, their
isotropic isometric deformations and the isotropic Gaussian curvature.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .core import E1, E2, E3, Point3, det3
from .errors import (
    AdmissibilityFailure,
    DegenerateDeterminant,
    OutOfDomain,
    PreconditionError,
    QuadratureFailure,
)
from .quadnet import QuadNet, fit_plane

DEFAULT_QUAD_TOL = 1e-10


# -- curves -------------------------------------------------------------------


class Curve:
    """A parametrized curve with first and second derivatives on ``[lo, hi]``.

    Either pass analytic callables or build one from samples with
    :meth:`from_samples` (a cubic spline whose derivatives are the spline's
    own). Derivatives are checked against central differences at a few
    probe points on construction.
    """

    scalar = False

    def __init__(self, value, d1, d2, interval, check: bool = True, meta=None):
        lo, hi = float(interval[0]), float(interval[1])
        if not hi > lo:
            raise PreconditionError("curve interval must have positive length")
        self._f, self._d1, self._d2 = value, d1, d2
        self.interval = (lo, hi)
        self.meta = dict(meta or {})
        self.derivative_check = self._check_derivatives() if check else None

    @classmethod
    def from_samples(cls, params, values, bc_type="not-a-knot"):
        params = np.asarray(params, dtype=float)
        values = np.asarray(values, dtype=float)
        if cls.scalar:
            values = values.reshape(-1)
        spline = CubicSpline(params, values, axis=0, bc_type=bc_type)
        meta = {"spline": "cubic", "bc_type": bc_type, "knots": len(params)}
        return cls(spline, lambda u: spline(u, 1), lambda u: spline(u, 2), (params[0], params[-1]), meta=meta)

    def _check_derivatives(self, probes: int = 7, h: float = 1e-5) -> float:
        lo, hi = self.interval
        span = hi - lo
        worst = 0.0
        for u in lo + span * (np.arange(probes) + 0.5) / probes:
            step = h * span
            fd1 = (np.asarray(self._f(u + step)) - np.asarray(self._f(u - step))) / (2 * step)
            fd2 = (np.asarray(self._d1(u + step)) - np.asarray(self._d1(u - step))) / (2 * step)
            for fd, an in ((fd1, self._d1(u)), (fd2, self._d2(u))):
                an = np.asarray(an, dtype=float)
                err = float(np.max(np.abs(fd - an)) / max(1.0, float(np.max(np.abs(an)))))
                worst = max(worst, err)
        if worst > 1e-5:
            raise PreconditionError(f"curve derivatives disagree with finite differences (rel. error {worst:.2e})")
        return worst

    def _in(self, u):
        lo, hi = self.interval
        slack = 1e-12 * max(1.0, abs(lo), abs(hi))
        if u < lo - slack or u > hi + slack:
            raise OutOfDomain(f"parameter {u} outside [{lo}, {hi}]")

    def _cast(self, x):
        return float(x) if self.scalar else np.asarray(x, dtype=float).reshape(3)

    def __call__(self, u):
        self._in(u)
        return self._cast(self._f(u))

    def d1(self, u):
        self._in(u)
        return self._cast(self._d1(u))

    def d2(self, u):
        self._in(u)
        return self._cast(self._d2(u))

    # unchecked access used for finite differences near the domain edge
    def raw(self, u, order=0):
        fn = (self._f, self._d1, self._d2)[order]
        return self._cast(fn(u))


class ScalarCurve(Curve):
    scalar = True


# -- quadrature ---------------------------------------------------------------


def adaptive_simpson(f, a: float, b: float, tol: float = DEFAULT_QUAD_TOL, max_depth: int = 50):
    """Integrate a (vector-valued) function to absolute tolerance ``tol``.

    Interval bisection with the usual ``|S2 - S1| <= 15 tol`` acceptance
    test and Richardson correction.
    """
    if a == b:
        return np.zeros_like(np.asarray(f(a), dtype=float))
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0

    def simpson(fa, fm, fb, lo, hi):
        return (hi - lo) / 6.0 * (fa + 4.0 * fm + fb)

    fa, fb = np.asarray(f(a), float), np.asarray(f(b), float)
    m = 0.5 * (a + b)
    fm = np.asarray(f(m), float)
    stack = [(a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, 0)]
    total = np.zeros_like(fa)
    while stack:
        lo, hi, flo, fmid, fhi, whole, eps, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = np.asarray(f(lm), float), np.asarray(f(rm), float)
        left = simpson(flo, flm, fmid, lo, mid)
        right = simpson(fmid, frm, fhi, mid, hi)
        err = np.max(np.abs(left + right - whole))
        if err <= 15.0 * eps:
            total = total + left + right + (left + right - whole) / 15.0
        elif depth >= max_depth:
            raise QuadratureFailure(f"no convergence on [{lo}, {hi}] after {max_depth} bisections")
        else:
            stack.append((lo, mid, flo, flm, fmid, left, 0.5 * eps, depth + 1))
            stack.append((mid, hi, fmid, frm, fhi, right, 0.5 * eps, depth + 1))
    return sign * total


# -- surfaces -----------------------------------------------------------------


def fd_jet(func, u: float, v: float, h: float = 1e-3):
    """Value and derivatives up to order two by fourth-order central differences."""
    def f(x, y):
        return np.asarray(func(x, y), dtype=float)

    w1 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
    w2 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0
    offs = np.arange(-2, 3)
    fu_line = [f(u + o * h, v) for o in offs]
    fv_line = [f(u, v + o * h) for o in offs]
    f0 = fu_line[2]
    fu = sum(w * p for w, p in zip(w1, fu_line)) / h
    fv = sum(w * p for w, p in zip(w1, fv_line)) / h
    fuu = sum(w * p for w, p in zip(w2, fu_line)) / h**2
    fvv = sum(w * p for w, p in zip(w2, fv_line)) / h**2
    fuv = sum(
        w1[a] * w1[b] * f(u + offs[a] * h, v + offs[b] * h)
        for a in range(5)
        for b in range(5)
        if w1[a] != 0 and w1[b] != 0
    ) / h**2
    return f0, fu, fv, fuu, fuv, fvv


class Surface:
    """A parametrized surface ``(u, v) -> R^3`` with second-order jet access.

    ``jet`` may supply analytic derivatives; otherwise they come from
    :func:`fd_jet` with step ``h``.
    """

    def __init__(self, func, jet=None, domain=None, h: float = 1e-3):
        self.func = func
        self._jet = jet
        self.domain = domain
        self.h = h

    def __call__(self, u, v):
        return np.asarray(self.func(u, v), dtype=float)

    def jet(self, u, v):
        if self._jet is not None:
            return tuple(np.asarray(x, dtype=float) for x in self._jet(u, v))
        return fd_jet(self.func, u, v, self.h)


def graph_surface(z, zx, zy, zxx, zxy, zyy) -> Surface:
    """The graph of ``z(x, y)`` parametrized by ``(x, y)``, with analytic jet."""
    def jet(x, y):
        return (
            np.array([x, y, z(x, y)]),
            np.array([1.0, 0.0, zx(x, y)]),
            np.array([0.0, 1.0, zy(x, y)]),
            np.array([0.0, 0.0, zxx(x, y)]),
            np.array([0.0, 0.0, zxy(x, y)]),
            np.array([0.0, 0.0, zyy(x, y)]),
        )

    return Surface(lambda x, y: jet(x, y)[0], jet)


def _jet_of(f, u, v):
    if isinstance(f, (Surface, _PatchSurface)):
        return f.jet(u, v)
    if hasattr(f, "jet"):
        return tuple(np.asarray(x, dtype=float) for x in f.jet(u, v))
    return fd_jet(f, u, v)


def iso_gauss_curvature(f, u: float, v: float) -> float:
    """Isotropic Gaussian curvature of a parametrized surface.

    ``K = [det(fu,fv,fuu) det(fu,fv,fvv) - det(fu,fv,fuv)^2] / G^2`` with G
    the Gram determinant of the top views of fu and fv. For a graph
    parametrized by (x, y) this is ``z_xx z_yy - z_xy^2``.
    """
    _, fu, fv, fuu, fuv, fvv = _jet_of(f, u, v)
    a, b = fu[:2], fv[:2]
    gram = float(np.dot(a, a) * np.dot(b, b) - np.dot(a, b) ** 2)
    scale = float(np.dot(a, a) * np.dot(b, b))
    if scale == 0.0 or gram <= 1e-14 * scale:
        raise AdmissibilityFailure("tangent plane is isotropic or the parametrization is singular")
    num = det3(fu, fv, fuu) * det3(fu, fv, fvv) - det3(fu, fv, fuv) ** 2
    return num / gram**2


def _dual_formula(p, fu, fv, tol=1e-12):
    den = det3(E3, fu, fv)
    if abs(den) <= tol * np.linalg.norm(fu) * np.linalg.norm(fv):
        raise DegenerateDeterminant("det(e3, f_u, f_v) vanishes: vertical tangent plane")
    return -np.array([det3(E1, fu, fv), det3(E2, fu, fv), det3(p, fu, fv)]) / den


def dual_of_surface_point(f, u: float, v: float) -> Point3:
    """The point dual to the tangent plane at ``f(u, v)``."""
    p, fu, fv, *_ = _jet_of(f, u, v)
    return Point3.of(_dual_formula(p, fu, fv))


# -- scale-translational surfaces and T-surfaces ------------------------------


@dataclass
class SurfacePatch:
    """``f*(u, v) = a(u) + sigma(u) b(v)`` on ``[alpha, beta] x [gamma, delta]``."""

    a: Curve
    b: Curve
    sigma: ScalarCurve
    domain: tuple

    def __init__(self, a: Curve, b: Curve, sigma: ScalarCurve, domain=None, grid: int = 33):
        self.a, self.b, self.sigma = a, b, sigma
        if domain is None:
            domain = (*a.interval, *b.interval)
        al, be, ga, de = (float(x) for x in domain)
        if not (be > al and de > ga):
            raise PreconditionError("domain must be a non-empty rectangle")
        self.domain = (al, be, ga, de)
        us = np.linspace(al, be, grid)
        vs = np.linspace(ga, de, grid)
        sig = np.array([sigma(u) for u in us])
        if np.any(sig <= 0):
            raise PreconditionError("sigma must be positive on the domain")
        worst = np.inf
        for u in us:
            for v in vs:
                fu = a.d1(u) + sigma.d1(u) * b(v)
                fv = sigma(u) * b.d1(v)
                sine = np.linalg.norm(np.cross(fu, fv)) / (np.linalg.norm(fu) * np.linalg.norm(fv) + 1e-300)
                worst = min(worst, sine)
        if worst <= 1e-9:
            raise PreconditionError("f*_u and f*_v are parallel somewhere on the domain")
        self.regularity = float(worst)

    def contains(self, u, v) -> bool:
        al, be, ga, de = self.domain
        eps = 1e-12 * max(1.0, *(abs(x) for x in self.domain))
        return al - eps <= u <= be + eps and ga - eps <= v <= de + eps

    def _check(self, u, v):
        if not self.contains(u, v):
            raise OutOfDomain(f"({u}, {v}) outside the patch domain {self.domain}")

    def jet(self, u, v, t: float = 0.0, quad_tol: float = DEFAULT_QUAD_TOL):
        """Value and analytic derivatives of ``f*(u, v, t)``."""
        a, b, s = self.a, self.b, self.sigma
        A0, A1, A2 = a.raw(u), a.raw(u, 1), a.raw(u, 2)
        B0, B1, B2 = b.raw(v), b.raw(v, 1), b.raw(v, 2)
        S0, S1, S2 = s.raw(u), s.raw(u, 1), s.raw(u, 2)
        if t == 0.0:
            f = A0 + S0 * B0
            return f, A1 + S1 * B0, S0 * B1, A2 + S2 * B0, S1 * B1, S0 * B2
        r = np.sqrt(t + S0 * S0)
        r1 = S0 * S1 / r
        r2 = (S1 * S1 + S0 * S2) / r - (S0 * S1) ** 2 / r**3
        f = self._base(u, t, quad_tol) + r * B0
        fu = A1 * S0 / r + r1 * B0
        fuu = (A2 * S0 + A1 * S1) / r - A1 * S0 * S0 * S1 / r**3 + r2 * B0
        return f, fu, r * B1, fuu, r1 * B1, r * B2

    def _base(self, u, t, quad_tol):
        al = self.domain[0]
        a, s = self.a, self.sigma

        def integrand(w):
            sw = s.raw(w)
            return a.raw(w, 1) * sw / np.sqrt(t + sw * sw)

        return a.raw(al) + adaptive_simpson(integrand, al, u, quad_tol)


class _PatchSurface:
    """A SurfacePatch-derived surface at a fixed deformation parameter."""

    def __init__(self, patch: SurfacePatch, t: float, kind: str, quad_tol: float):
        self.patch, self.t, self.kind, self.quad_tol = patch, t, kind, quad_tol
        self.domain = patch.domain

    def __call__(self, u, v):
        if self.kind == "st":
            return self.patch.jet(u, v, self.t, self.quad_tol)[0]
        return _t_point(self.patch, u, v, self.t, self.quad_tol)

    def jet(self, u, v):
        if self.kind == "st":
            return self.patch.jet(u, v, self.t, self.quad_tol)
        return fd_jet(self.__call__, u, v)


def eval_scale_translational(s: SurfacePatch, u: float, v: float) -> Point3:
    s._check(u, v)
    return Point3.of(s.a(u) + s.sigma(u) * s.b(v))


def deform_scale_translational(s: SurfacePatch, u, v, t: float, quad_tol: float = DEFAULT_QUAD_TOL) -> Point3:
    """``a(alpha) + int_alpha^u a' sigma / sqrt(t + sigma^2) + sqrt(t + sigma(u)^2) b(v)``."""
    if t < 0:
        raise PreconditionError("t must be non-negative")
    s._check(u, v)
    r = np.sqrt(t + s.sigma(u) ** 2)
    return Point3.of(s._base(u, t, quad_tol) + r * s.b(v))


def _t_point(s: SurfacePatch, u, v, t, quad_tol):
    a, b, sig = s.a, s.b, s.sigma
    A = a.raw(u, 1) + sig.raw(u, 1) * b.raw(v)
    B = b.raw(v, 1)
    den = det3(E3, A, B)
    if abs(den) <= 1e-12 * np.linalg.norm(A) * np.linalg.norm(B):
        raise DegenerateDeterminant(f"det(e3, a' + sigma' b, b') vanishes at ({u}, {v})")
    if t == 0.0:
        p = a.raw(u) + sig.raw(u) * b.raw(v)
    else:
        p = s.jet(u, v, t, quad_tol)[0]
    return -np.array([det3(E1, A, B), det3(E2, A, B), det3(p, A, B)]) / den


def eval_T_surface(s: SurfacePatch, u, v) -> Point3:
    """The generalized T-surface dual to the scale-translational patch."""
    s._check(u, v)
    return Point3.of(_t_point(s, u, v, 0.0, DEFAULT_QUAD_TOL))


def deform_T_surface(s: SurfacePatch, u, v, t: float, quad_tol: float = DEFAULT_QUAD_TOL) -> Point3:
    if t < 0:
        raise PreconditionError("t must be non-negative")
    s._check(u, v)
    return Point3.of(_t_point(s, u, v, t, quad_tol))


def scale_translational_surface(s: SurfacePatch, t: float = 0.0, quad_tol: float = DEFAULT_QUAD_TOL):
    """``f*(., ., t)`` as an evaluator with analytic jet."""
    return _PatchSurface(s, t, "st", quad_tol)


def t_surface(s: SurfacePatch, t: float = 0.0, quad_tol: float = DEFAULT_QUAD_TOL):
    """The T-surface ``f(., ., t)`` as an evaluator (finite-difference jet)."""
    return _PatchSurface(s, t, "t", quad_tol)


# -- sampling -----------------------------------------------------------------


@dataclass
class SampledNet:
    net: QuadNet
    displacement: float
    face_displacement: np.ndarray
    params: tuple


def sample_to_quadnet(f, grid, domain=None) -> SampledNet:
    """Sample a surface on a regular (mu+1) x (nv+1) node grid.

    The faces of a sampled conjugate net are planar only approximately;
    downstream operations use each face's least-squares plane, and the
    largest vertex-to-plane distance is reported as the planarization
    displacement.
    """
    mu, nv = (int(x) for x in grid)
    if mu < 2 or nv < 2:
        raise PreconditionError("grid must be at least 2 x 2")
    if domain is None:
        domain = getattr(f, "domain", None)
    if domain is None:
        raise PreconditionError("a domain is required")
    al, be, ga, de = domain
    us = np.linspace(al, be, mu + 1)
    vs = np.linspace(ga, de, nv + 1)
    pts = np.array([[np.asarray(f(u, v), dtype=float) for v in vs] for u in us])
    net = QuadNet(pts)
    disp = np.zeros((mu, nv))
    for k, l in net.faces():
        disp[k, l] = fit_plane(net.face(k, l), tol=0.0)[1]
    return SampledNet(net, float(disp.max()), disp, (us, vs))
