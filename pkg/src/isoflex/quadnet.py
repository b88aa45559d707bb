"""The m x n quad net, its face planes, metric dual and discrete curvature."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import DEFAULT_TOL, NonIsotropicPlane, Point3, plane_from_normal
from .errors import (
    DegenerateError,
    DimensionMismatch,
    IsotropicPlaneError,
    NotDualConvex,
    NotParallelSides,
    NotVParallel,
    PreconditionError,
)


class QuadNet:
    """An (m+1) x (n+1) grid of points ``v[i][j]``.

    Face ``(k, l)`` is the cycle ``v[k][l], v[k+1][l], v[k+1][l+1], v[k][l+1]``.
    The vertex array is stored i-major and is read-only; the geometric
    invariants (planar, convex, non-isotropic faces) are checked by
    :func:`validate` rather than on construction, so that defective input
    can still be loaded and reported on.
    """

    __slots__ = ("_v",)

    def __init__(self, vertices):
        v = np.array(vertices, dtype=float)
        if v.ndim != 3 or v.shape[2] != 3:
            raise PreconditionError(f"expected an (m+1, n+1, 3) array, got shape {v.shape}")
        if v.shape[0] < 2 or v.shape[1] < 2:
            raise PreconditionError("a net needs m, n >= 1")
        if not np.all(np.isfinite(v)):
            raise PreconditionError("vertex coordinates must be finite")
        v.setflags(write=False)
        self._v = v

    @classmethod
    def from_flat(cls, m: int, n: int, vertices) -> "QuadNet":
        flat = np.asarray(vertices, dtype=float)
        if flat.shape != ((m + 1) * (n + 1), 3):
            raise PreconditionError(
                f"expected {(m + 1) * (n + 1)} vertices for a {m}x{n} net, got {flat.shape[0]}"
            )
        return cls(flat.reshape(m + 1, n + 1, 3))

    @classmethod
    def from_function(cls, m: int, n: int, f) -> "QuadNet":
        return cls([[f(i, j) for j in range(n + 1)] for i in range(m + 1)])

    @property
    def m(self) -> int:
        return self._v.shape[0] - 1

    @property
    def n(self) -> int:
        return self._v.shape[1] - 1

    @property
    def shape(self) -> tuple[int, int]:
        return self.m, self.n

    @property
    def array(self) -> np.ndarray:
        return self._v

    def flat(self) -> np.ndarray:
        return self._v.reshape(-1, 3)

    def v(self, i: int, j: int) -> Point3:
        if not (0 <= i <= self.m and 0 <= j <= self.n):
            raise IndexError(f"vertex ({i}, {j}) outside a {self.m}x{self.n} net")
        return Point3.of(self._v[i, j])

    def face(self, k: int, l: int) -> np.ndarray:
        """The four corners of face (k, l) in cyclic order, shape (4, 3)."""
        if not (0 <= k < self.m and 0 <= l < self.n):
            raise IndexError(f"face ({k}, {l}) outside a {self.m}x{self.n} net")
        v = self._v
        return np.array([v[k, l], v[k + 1, l], v[k + 1, l + 1], v[k, l + 1]])

    def faces(self):
        for k in range(self.m):
            for l in range(self.n):
                yield k, l

    def interior_vertices(self):
        for i in range(1, self.m):
            for j in range(1, self.n):
                yield i, j

    def top_views(self) -> np.ndarray:
        return self._v[..., :2]

    def diameter(self) -> float:
        pts = self.flat()
        lo, hi = pts.min(axis=0), pts.max(axis=0)
        return float(np.linalg.norm(hi - lo))

    def transformed(self, fn) -> "QuadNet":
        """Apply ``fn`` to the (N, 3) vertex array and rebuild."""
        out = np.asarray(fn(self.flat()), dtype=float)
        return QuadNet(out.reshape(self._v.shape))

    def allclose(self, other: "QuadNet", atol: float = 1e-12, rtol: float = 0.0) -> bool:
        return self.shape == other.shape and np.allclose(self._v, other._v, atol=atol, rtol=rtol)

    def __eq__(self, other):
        if not isinstance(other, QuadNet):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self._v, other._v))

    def __hash__(self):
        return hash((self.shape, self._v.tobytes()))

    def __repr__(self):
        return f"QuadNet(m={self.m}, n={self.n})"


# -- planes -------------------------------------------------------------------


def fit_plane(points, tol: float = DEFAULT_TOL) -> tuple[NonIsotropicPlane, float]:
    """Plane of a (nearly) planar quadrilateral and its max vertex deviation.

    The normal is the cross product of the diagonals, which is exact for a
    planar quad and treats the four vertices symmetrically. If the deviation
    exceeds ``tol * diameter`` a total-least-squares plane is used instead.
    """
    q = np.asarray(points, dtype=float)
    centroid = q.mean(axis=0)
    diam = max(np.linalg.norm(a - b) for a in q for b in q)
    if diam == 0.0:
        raise DegenerateError("face collapses to a point")
    n = np.cross(q[2] - q[0], q[3] - q[1])
    if np.linalg.norm(n) <= tol * diam * diam:
        raise DegenerateError("face diagonals are parallel")
    plane = plane_from_normal(n, centroid, tol)
    res = _max_deviation(plane, q)
    if res > tol * diam:
        _, s, vt = np.linalg.svd(q - centroid)
        if s[1] <= tol * diam:
            raise DegenerateError("face vertices are collinear")
        plane = plane_from_normal(vt[2], centroid, tol)
        res = _max_deviation(plane, q)
    return plane, res


def _max_deviation(plane: NonIsotropicPlane, q) -> float:
    return max(plane.distance(p) for p in q)


def face_plane(net: QuadNet, k: int, l: int, tol: float = DEFAULT_TOL) -> NonIsotropicPlane:
    return fit_plane(net.face(k, l), tol)[0]


def face_duals(net: QuadNet, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Dual points ``(g1, g2, h)`` of all face planes, shape (m, n, 3)."""
    out = np.empty((net.m, net.n, 3))
    for k, l in net.faces():
        out[k, l] = face_plane(net, k, l, tol)
    return out


# -- areas --------------------------------------------------------------------


def oriented_area_top(q) -> float:
    """Shoelace area of a closed polygon given by its (top-view) vertices."""
    p = np.asarray(q, dtype=float)[:, :2]
    x, y = p[:, 0], p[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _sides(p):
    return np.roll(p, -1, axis=0) - p


def sides_parallel(P, Q, tol: float = DEFAULT_TOL) -> bool:
    P = np.asarray(P, dtype=float)[:, :2]
    Q = np.asarray(Q, dtype=float)[:, :2]
    if P.shape != Q.shape:
        return False
    for u, v in zip(_sides(P), _sides(Q)):
        cross = u[0] * v[1] - u[1] * v[0]
        if abs(cross) > tol * max(np.linalg.norm(u) * np.linalg.norm(v), tol):
            return False
    return True


def mixed_area(P, Q, tol: float = DEFAULT_TOL) -> float:
    """Linear coefficient of ``Area(P + tQ)`` for polygons with parallel sides."""
    P = np.asarray(P, dtype=float)[:, :2]
    Q = np.asarray(Q, dtype=float)[:, :2]
    if P.shape != Q.shape:
        raise DimensionMismatch("polygons have different vertex counts")
    if not sides_parallel(P, Q, tol):
        raise NotParallelSides("corresponding sides are not parallel")
    Pn, Qn = np.roll(P, -1, axis=0), np.roll(Q, -1, axis=0)
    det_pq = P[:, 0] * Qn[:, 1] - P[:, 1] * Qn[:, 0]
    det_qp = Q[:, 0] * Pn[:, 1] - Q[:, 1] * Pn[:, 0]
    return 0.5 * float(det_pq.sum() + det_qp.sum())


# -- convexity ----------------------------------------------------------------


def _turns(q) -> np.ndarray:
    p = np.asarray(q, dtype=float)[:, :2]
    e = _sides(p)
    en = np.roll(e, -1, axis=0)
    return e[:, 0] * en[:, 1] - e[:, 1] * en[:, 0]


def is_strictly_convex(q, tol: float = DEFAULT_TOL) -> bool:
    """All consecutive turns of the top view share a sign and exceed ``tol * scale^2``."""
    p = np.asarray(q, dtype=float)[:, :2]
    scale = max(np.linalg.norm(a - b) for a in p for b in p)
    if scale == 0.0:
        return False
    t = _turns(p)
    thresh = tol * scale * scale
    return bool(np.all(t > thresh) or np.all(t < -thresh))


def vertex_dual_quad(duals: np.ndarray, i: int, j: int) -> np.ndarray:
    """Dual points of the faces around interior vertex (i, j) in traversal order."""
    return np.array([duals[i - 1, j - 1], duals[i, j - 1], duals[i, j], duals[i - 1, j]])


def bounds_admissible_angle(duals4, tol: float = DEFAULT_TOL) -> bool:
    """Do the four planes carry consecutive flat angles of an admissible
    4-hedral angle?

    Works with the intersection lines of consecutive planes rather than the
    dual quad: with the planes translated through a common point, the line
    of planes A and B has top-view direction ``(B2 - A2, A1 - B1)``. The
    angle is admissible when these rays wind exactly once around the
    isotropic line, each turning strictly less than a half-turn.
    """
    g = np.asarray(duals4, dtype=float)[:, :2]
    top = np.array([[g[(a + 1) % 4, 1] - g[a, 1], g[a, 0] - g[(a + 1) % 4, 0]] for a in range(4)])
    lengths = np.linalg.norm(top, axis=1)
    scale = float(lengths.max())
    if scale == 0.0 or lengths.min() <= tol * scale:
        return False
    nxt = np.roll(top, -1, axis=0)
    cross = top[:, 0] * nxt[:, 1] - top[:, 1] * nxt[:, 0]
    if not (np.all(cross > tol * scale**2) or np.all(cross < -tol * scale**2)):
        return False
    turn = np.arctan2(cross, np.einsum("ij,ij->i", top, nxt)).sum()
    return bool(abs(abs(turn) - 2 * np.pi) < 1e-6)


# -- validation ---------------------------------------------------------------


@dataclass
class ValidationReport:
    planarity: np.ndarray
    convex: np.ndarray
    non_isotropic: np.ndarray
    dual_convex: np.ndarray
    tol: float
    diameter: float = 1.0
    notes: list[str] = field(default_factory=list)

    @property
    def planar_ok(self) -> bool:
        return bool(np.all(self.non_isotropic) and np.all(self.planarity <= self.tol * self.diameter))

    @property
    def convex_ok(self) -> bool:
        return bool(np.all(self.convex))

    @property
    def dual_convex_ok(self) -> bool:
        return self.dual_convex.size > 0 and bool(np.all(self.dual_convex))

    @property
    def ok(self) -> bool:
        """Planar, non-isotropic, convex faces (the QuadNet invariants)."""
        return self.planar_ok and self.convex_ok

    def failing_faces(self) -> list[tuple[int, int]]:
        bad = (self.planarity > self.tol * self.diameter) | ~self.convex | ~self.non_isotropic
        return [tuple(int(x) for x in ij) for ij in np.argwhere(bad)]

    def as_dict(self) -> dict:
        return {
            "ok": self.ok,
            "planar": self.planar_ok,
            "convex": self.convex_ok,
            "dual_convex": self.dual_convex_ok,
            "max_planarity_residual": float(self.planarity.max()) if self.planarity.size else 0.0,
            "failing_faces": self.failing_faces(),
            "non_dual_convex_vertices": [
                (int(i) + 1, int(j) + 1) for i, j in np.argwhere(~self.dual_convex)
            ],
            "notes": list(self.notes),
        }


def validate(net: QuadNet, tol: float = DEFAULT_TOL) -> ValidationReport:
    m, n = net.shape
    diam = net.diameter()
    planarity = np.zeros((m, n))
    convex = np.zeros((m, n), dtype=bool)
    noniso = np.ones((m, n), dtype=bool)
    duals = np.full((m, n, 3), np.nan)
    notes = []
    for k, l in net.faces():
        q = net.face(k, l)
        convex[k, l] = is_strictly_convex(q, tol)
        try:
            plane, res = fit_plane(q, tol)
        except IsotropicPlaneError:
            noniso[k, l] = False
            planarity[k, l] = np.inf
            continue
        except DegenerateError as exc:
            planarity[k, l] = np.inf
            notes.append(f"face ({k}, {l}): {exc}")
            continue
        planarity[k, l] = res
        duals[k, l] = plane
    if m >= 2 and n >= 2:
        dual_convex = np.zeros((m - 1, n - 1), dtype=bool)
        for i, j in net.interior_vertices():
            dq = vertex_dual_quad(duals, i, j)
            dual_convex[i - 1, j - 1] = bool(np.all(np.isfinite(dq)) and is_strictly_convex(dq, tol))
    else:
        dual_convex = np.zeros((0, 0), dtype=bool)
        notes.append("dual-convexity needs m, n >= 2")
    return ValidationReport(planarity, convex, noniso, dual_convex, tol, diam, notes)


def is_dual_convex(net: QuadNet, tol: float = DEFAULT_TOL) -> bool:
    return validate(net, tol).dual_convex_ok


# -- duality and curvature ----------------------------------------------------


def _require_dual_convex_at(duals, i, j, tol):
    dq = vertex_dual_quad(duals, i, j)
    if not is_strictly_convex(dq, tol):
        raise NotDualConvex(f"vertex ({i}, {j}) is not dual-convex")
    return dq


def metric_dual_net(net: QuadNet, tol: float = DEFAULT_TOL) -> QuadNet:
    """The (m-1) x (n-1) net of points dual to the face planes."""
    if net.m < 2 or net.n < 2:
        raise NotDualConvex("the metric dual needs m, n >= 2")
    duals = face_duals(net, tol)
    for i, j in net.interior_vertices():
        _require_dual_convex_at(duals, i, j, tol)
    return QuadNet(duals)


def curvature(net: QuadNet, i: int, j: int, tol: float = DEFAULT_TOL, duals=None) -> float:
    """Oriented top-view area of the dual quad at interior vertex (i, j)."""
    if not (0 < i < net.m and 0 < j < net.n):
        raise PreconditionError(f"({i}, {j}) is not an interior vertex")
    if duals is None:
        duals = np.array(
            [[face_plane(net, k, l, tol) for l in (j - 1, j)] for k in (i - 1, i)]
        )
        dq = np.array([duals[0, 0], duals[1, 0], duals[1, 1], duals[0, 1]])
        if not is_strictly_convex(dq, tol):
            raise NotDualConvex(f"vertex ({i}, {j}) is not dual-convex")
    else:
        dq = _require_dual_convex_at(duals, i, j, tol)
    return oriented_area_top(dq)


@dataclass(frozen=True)
class CurvatureGrid:
    """Curvatures at interior vertices; ``grid[i, j]`` uses net indices."""

    values: np.ndarray

    def __getitem__(self, ij):
        i, j = ij
        if i < 1 or j < 1:
            raise IndexError("only interior vertices carry curvature")
        return float(self.values[i - 1, j - 1])

    def total(self) -> float:
        return float(self.values.sum())

    def tolist(self):
        return self.values.tolist()


def curvature_grid(net: QuadNet, tol: float = DEFAULT_TOL) -> CurvatureGrid:
    duals = face_duals(net, tol)
    vals = np.zeros((max(net.m - 1, 0), max(net.n - 1, 0)))
    for i, j in net.interior_vertices():
        vals[i - 1, j - 1] = curvature(net, i, j, tol, duals=duals)
    return CurvatureGrid(vals)


def mixed_curvature(netA: QuadNet, netB: QuadNet, i: int, j: int, tol: float = DEFAULT_TOL) -> float:
    """Mixed area of the dual quads of two v-parallel nets at vertex (i, j)."""
    if not are_v_parallel(netA, netB, tol):
        raise NotVParallel("nets do not share top views")
    if not (0 < i < netA.m and 0 < j < netA.n):
        return 0.0
    qa = [face_plane(netA, k, l, tol) for k, l in _vertex_faces(i, j)]
    qb = [face_plane(netB, k, l, tol) for k, l in _vertex_faces(i, j)]
    return mixed_area(qa, qb, tol)


def _vertex_faces(i, j):
    return ((i - 1, j - 1), (i, j - 1), (i, j), (i - 1, j))


# -- parallelism predicates ---------------------------------------------------


def _check_dims(a: QuadNet, b: QuadNet):
    if a.shape != b.shape:
        raise DimensionMismatch(f"nets have shapes {a.shape} and {b.shape}")


def _edges(net: QuadNet):
    v = net.array
    return np.concatenate([(v[1:, :] - v[:-1, :]).reshape(-1, 3), (v[:, 1:] - v[:, :-1]).reshape(-1, 3)])


def are_combescure(netA: QuadNet, netB: QuadNet, tol: float = DEFAULT_TOL) -> bool:
    _check_dims(netA, netB)
    ea, eb = _edges(netA), _edges(netB)
    cross = np.linalg.norm(np.cross(ea, eb), axis=1)
    bound = tol * np.linalg.norm(ea, axis=1) * np.linalg.norm(eb, axis=1)
    return bool(np.all(cross <= bound + tol * tol))


def are_v_parallel(netA: QuadNet, netB: QuadNet, tol: float = DEFAULT_TOL) -> bool:
    _check_dims(netA, netB)
    scale = max(1.0, np.abs(netA.top_views()).max())
    return bool(np.max(np.abs(netA.top_views() - netB.top_views())) <= tol * scale)


# -- reconstruction from the dual ---------------------------------------------


def net_from_dual(dual: QuadNet, boundary_top_views=None, tol: float = DEFAULT_TOL) -> QuadNet:
    """Rebuild an m x n net from its (m-1) x (n-1) metric dual.

    Interior vertices are dual to the dual's face planes. A boundary vertex
    of the primal net must lie on the one or two face planes it touches,
    which leaves it free along a line or in a plane; its top view is taken
    from ``boundary_top_views`` (an (m+1, n+1, 2) array, NaN where unknown)
    and snapped onto that line, or else extrapolated linearly from its
    neighbours.
    """
    P = dual.array
    m, n = P.shape[0], P.shape[1]
    out = np.full((m + 1, n + 1, 3), np.nan)
    inner = metric_dual_net(dual, tol) if m >= 2 and n >= 2 else None
    if inner is not None:
        out[1:m, 1:n] = inner.array
    hints = None if boundary_top_views is None else np.asarray(boundary_top_views, dtype=float)

    def hint(i, j):
        if hints is not None and np.all(np.isfinite(hints[i, j])):
            return hints[i, j]
        return None

    def extrapolate(i, j, di, dj):
        a, b = out[i + di, j + dj], out[i + 2 * di, j + 2 * dj]
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise PreconditionError(f"no top view available for boundary vertex ({i}, {j})")
        return 2 * a[:2] - b[:2]

    def place(i, j, guess):
        planes = [P[k, l] for k in (i - 1, i) for l in (j - 1, j) if 0 <= k < m and 0 <= l < n]
        xy = np.asarray(guess, dtype=float)
        if len(planes) == 2:
            g = planes[0][:2] - planes[1][:2]
            dh = planes[0][2] - planes[1][2]
            gg = float(np.dot(g, g))
            if gg <= tol * tol:
                raise DegenerateError(f"parallel face planes at boundary vertex ({i}, {j})")
            xy = xy - (np.dot(g, xy) - dh) / gg * g
        g1, g2, h = planes[0]
        out[i, j] = (xy[0], xy[1], g1 * xy[0] + g2 * xy[1] - h)

    edge_sites = (
        [(0, j, 1, 0) for j in range(1, n)]
        + [(m, j, -1, 0) for j in range(1, n)]
        + [(i, 0, 0, 1) for i in range(1, m)]
        + [(i, n, 0, -1) for i in range(1, m)]
    )
    for i, j, di, dj in edge_sites:
        h = hint(i, j)
        place(i, j, h if h is not None else extrapolate(i, j, di, dj))
    for i, j in ((0, 0), (0, n), (m, 0), (m, n)):
        h = hint(i, j)
        if h is None:
            di = 1 if i == 0 else -1
            dj = 1 if j == 0 else -1
            a = extrapolate(i, j, 0, dj)
            b = extrapolate(i, j, di, 0)
            h = 0.5 * (a + b)
        place(i, j, h)
    return QuadNet(out)
