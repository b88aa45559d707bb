"""Closed-form nets: cone-cylinder nets, generalized T-nets and a few
standard examples, together with their explicit deformations."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import E1, E2, E3, det3
from ..errors import DegenerateDeterminant, NonConvexFace, PreconditionError
from ..quadnet import QuadNet, is_strictly_convex


@dataclass(frozen=True)
class ConeCylinderData:
    """Curves ``a`` (m+2 points), ``b`` (n+2 points) and positive scalings ``sigma``.

    The cone-cylinder net ``a_i + sigma_i b_j`` built from it has
    (m+1) x (n+1) faces; the generalized T-net dual to it has m x n faces.
    """

    a: np.ndarray
    b: np.ndarray
    sigma: np.ndarray

    def __init__(self, a, b, sigma):
        a = np.array(a, dtype=float)
        b = np.array(b, dtype=float)
        sigma = np.array(sigma, dtype=float).reshape(-1)
        if a.ndim != 2 or a.shape[1] != 3 or b.ndim != 2 or b.shape[1] != 3:
            raise PreconditionError("a and b must be lists of 3-vectors")
        if len(a) < 2 or len(b) < 2:
            raise PreconditionError("a and b need at least two points each")
        if sigma.shape != (len(a),):
            raise PreconditionError("sigma needs one value per point of a")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b)) and np.all(np.isfinite(sigma))):
            raise PreconditionError("generator data must be finite")
        if np.any(sigma <= 0):
            raise PreconditionError("sigma must be positive")
        for name, arr in (("a", a), ("b", b), ("sigma", sigma)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def m(self) -> int:
        """Face count of the T-net in the i-direction."""
        return len(self.a) - 2

    @property
    def n(self) -> int:
        return len(self.b) - 2

    def to_dict(self) -> dict:
        return {"a": self.a.tolist(), "b": self.b.tolist(), "sigma": self.sigma.tolist()}

    @classmethod
    def from_dict(cls, d) -> "ConeCylinderData":
        return cls(d["a"], d["b"], d["sigma"])


def _check_convex(P: np.ndarray, t, tol=1e-12):
    for k in range(P.shape[0] - 1):
        for l in range(P.shape[1] - 1):
            q = [P[k, l], P[k + 1, l], P[k + 1, l + 1], P[k, l + 1]]
            if not is_strictly_convex(q, tol):
                raise NonConvexFace(f"face ({k}, {l}) is not convex at t={t}", face=(k, l), t=t)


def cone_cylinder_points(d: ConeCylinderData, t: float = 0.0) -> np.ndarray:
    """Vertices ``P_ij(t)`` of the deformed cone-cylinder net, shape (m+2, n+2, 3)."""
    if t < 0:
        raise PreconditionError("the deformation parameter must be non-negative")
    a, b, s = d.a, d.b, d.sigma
    if t == 0:
        base = a.copy()
        scale = s.copy()
    else:
        root = np.sqrt(t + s * s)
        steps = (a[1:] - a[:-1]) * ((s[1:] + s[:-1]) / (root[1:] + root[:-1]))[:, None]
        base = a[0] + np.concatenate([np.zeros((1, 3)), np.cumsum(steps, axis=0)])
        scale = root
    return base[:, None, :] + scale[:, None, None] * b[None, :, :]


def gen_cone_cylinder(d: ConeCylinderData) -> QuadNet:
    P = cone_cylinder_points(d)
    _check_convex(P, 0.0)
    return QuadNet(P)


def deform_cone_cylinder(d: ConeCylinderData, t: float) -> QuadNet:
    """The area-preserving Combescure transform of the cone-cylinder net at ``t``."""
    P = cone_cylinder_points(d, t)
    _check_convex(P, t)
    return QuadNet(P)


def _t_net(d: ConeCylinderData, P: np.ndarray, tol=1e-12) -> QuadNet:
    a, b, s = d.a, d.b, d.sigma
    m, n = d.m, d.n
    F = np.empty((m + 1, n + 1, 3))
    scale = max(1.0, float(np.abs(a).max()), float(np.abs(b).max()))
    for i in range(m + 1):
        for j in range(n + 1):
            beta = b[j + 1] - b[j]
            delta = a[i + 1] - a[i] + b[j] * (s[i + 1] - s[i])
            den = det3(E3, beta, delta)
            if abs(den) <= tol * scale * scale:
                raise DegenerateDeterminant(f"det(e3, b_(j+1) - b_j, Delta_ij) vanishes at ({i}, {j})")
            F[i, j] = (det3(E1, beta, delta), det3(E2, beta, delta), det3(P[i, j], beta, delta))
            F[i, j] /= -den
    return QuadNet(F)


def gen_generalized_T(d: ConeCylinderData) -> QuadNet:
    """The generalized T-net dual to the faces of ``a_i + sigma_i b_j``."""
    if d.m < 1 or d.n < 1:
        raise PreconditionError("a generalized T-net needs at least three points in a and b")
    return _t_net(d, cone_cylinder_points(d))


def deform_generalized_T(d: ConeCylinderData, t: float) -> QuadNet:
    """Isotropic isometric deformation of the T-net; top views do not depend on ``t``."""
    if d.m < 1 or d.n < 1:
        raise PreconditionError("a generalized T-net needs at least three points in a and b")
    return _t_net(d, cone_cylinder_points(d, t))


def gen_example_2x2(t: float = 0.0) -> QuadNet:
    """The 2x2 net ``(i, j, (i mod 2)/(t+1) + (j mod 2)(t+1))``."""
    if not 0.0 <= t <= 1.0:
        raise PreconditionError("t must lie in [0, 1]")
    return QuadNet.from_function(2, 2, lambda i, j: (i, j, (i % 2) / (t + 1) + (j % 2) * (t + 1)))


def paraboloid_net(m: int, n: int) -> QuadNet:
    return QuadNet.from_function(m, n, lambda i, j: (i, j, i * i + j * j))


def egg_crate_net(m: int, n: int) -> QuadNet:
    return QuadNet.from_function(m, n, lambda i, j: (i, j, i % 2 + j % 2))


def lift_top_view(top, z_row0, z_col0) -> QuadNet:
    """Planar-faced net over a given top view with prescribed heights on
    the parameter lines ``i = 0`` and ``j = 0``.

    Each remaining vertex lies in the plane through its three already-known
    face neighbours.
    """
    top = np.asarray(top, dtype=float)
    m, n = top.shape[0] - 1, top.shape[1] - 1
    z = np.full((m + 1, n + 1), np.nan)
    z[0, :] = z_row0
    z[:, 0] = z_col0
    for i in range(m):
        for j in range(n):
            A = np.array([*top[i, j], z[i, j]])
            B = np.array([*top[i + 1, j], z[i + 1, j]])
            D = np.array([*top[i, j + 1], z[i, j + 1]])
            nrm = np.cross(B - A, D - A)
            if abs(nrm[2]) < 1e-14:
                raise PreconditionError(f"top view of face ({i}, {j}) is degenerate")
            x, y = top[i + 1, j + 1]
            z[i + 1, j + 1] = A[2] - (nrm[0] * (x - A[0]) + nrm[1] * (y - A[1])) / nrm[2]
    return QuadNet(np.dstack([top, z]))


def random_planar_net(m: int, n: int, rng, noise: float = 0.15) -> QuadNet:
    """A random planar-faced perturbation of the paraboloid net."""
    i, j = np.meshgrid(np.arange(m + 1), np.arange(n + 1), indexing="ij")
    top = np.dstack([i, j]).astype(float) + noise * rng.uniform(-1, 1, size=(m + 1, n + 1, 2))
    zz = (top ** 2).sum(axis=-1) + noise * rng.uniform(-1, 1, size=(m + 1, n + 1))
    return lift_top_view(top, zz[0, :], zz[:, 0])
