"""Infinitesimal flexibility: Christoffel duals, height functions,
reciprocal-parallel nets, velocity diagrams and a direct motion-space oracle.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import DEFAULT_TOL
from .errors import DegenerateError, NotInfinitesimallyFlexible, NotParallelError
from .quadnet import QuadNet, are_combescure, face_duals, metric_dual_net, vertex_dual_quad


@dataclass
class ChristoffelResult:
    dual: QuadNet
    residual: float
    scalars_i: np.ndarray
    scalars_j: np.ndarray
    normalization: dict = field(default_factory=dict)


def _check_faces(net: QuadNet, tol: float):
    for k, l in net.faces():
        q = net.face(k, l)
        for a in range(4):
            u = q[(a + 1) % 4] - q[a]
            w = q[(a + 2) % 4] - q[a]
            if np.linalg.norm(np.cross(u, w)) <= tol * max(np.linalg.norm(u) * np.linalg.norm(w), tol):
                raise DegenerateError(f"face ({k}, {l}) has three collinear vertices")


def _cross_matrix(d):
    """``M`` with ``M @ x == np.cross(x, d)``."""
    return np.array([[0.0, d[2], -d[1]], [-d[2], 0.0, d[0]], [d[1], -d[0], 0.0]])


def _christoffel_system(net: QuadNet):
    """Linear system in the edge factors of a Christoffel dual.

    Every dual edge is a multiple of the primal edge. Per face the dual
    must close up, and each dual diagonal must be parallel to the other
    primal diagonal.
    """
    v = net.array
    m, n = net.shape
    ei = v[1:, :] - v[:-1, :]  # (m, n+1, 3)
    ej = v[:, 1:] - v[:, :-1]  # (m+1, n, 3)
    ni = m * (n + 1)

    def ii(k, l):
        return k * (n + 1) + l

    def jj(k, l):
        return ni + k * n + l

    rows = []
    for k in range(m):
        for l in range(n):
            A, B, C, D = v[k, l], v[k + 1, l], v[k + 1, l + 1], v[k, l + 1]
            closure = np.zeros((3, ni + (m + 1) * n))
            closure[:, ii(k, l)] += ei[k, l]
            closure[:, jj(k + 1, l)] += ej[k + 1, l]
            closure[:, ii(k, l + 1)] -= ei[k, l + 1]
            closure[:, jj(k, l)] -= ej[k, l]
            rows.append(closure)
            bd = D - B
            diag1 = np.zeros_like(closure)  # dual A'C' parallel to BD
            Xb = _cross_matrix(bd) / np.linalg.norm(bd)
            diag1[:, ii(k, l)] += Xb @ ei[k, l]
            diag1[:, jj(k + 1, l)] += Xb @ ej[k + 1, l]
            rows.append(diag1)
            ac = C - A
            diag2 = np.zeros_like(closure)  # dual B'D' parallel to AC
            Xa = _cross_matrix(ac) / np.linalg.norm(ac)
            diag2[:, jj(k, l)] += Xa @ ej[k, l]
            diag2[:, ii(k, l)] -= Xa @ ei[k, l]
            rows.append(diag2)
    return np.vstack(rows), ei, ej


def christoffel_dual_net(net: QuadNet, tol: float = DEFAULT_TOL) -> ChristoffelResult:
    """Best Christoffel dual of a planar-faced net and its defect.

    The edge factors are the least-singular vector of the global
    consistency system, so the result is exact for a Koenigs net and the
    least-squares compromise otherwise. The dual is anchored at the origin
    with its first i-edge equal to the primal one.
    """
    _check_faces(net, tol)
    M, ei, ej = _christoffel_system(net)
    _, _, vt = np.linalg.svd(M)
    s = vt[-1]
    s = s / np.max(np.abs(s))
    residual = float(np.max(np.abs(M @ s)) / net.diameter())
    m, n = net.shape
    ni = m * (n + 1)
    if abs(s[0]) > 1e-6:
        s = s / s[0]
        convention = "first i-edge equals the primal edge"
    else:
        k = int(np.argmax(np.abs(s)))
        s = s / s[k]
        convention = f"edge factor {k} set to 1 (first i-edge collapses)"
    si = s[:ni].reshape(m, n + 1)
    sj = s[ni:].reshape(m + 1, n)
    c = np.zeros((m + 1, n + 1, 3))
    for l in range(n):
        c[0, l + 1] = c[0, l] + sj[0, l] * ej[0, l]
    for k in range(m):
        c[k + 1] = c[k] + si[k][:, None] * ei[k]
    norm = {"anchor": (0, 0), "anchor_position": (0.0, 0.0, 0.0), "scale": convention}
    return ChristoffelResult(QuadNet(c), residual, si, sj, norm)


def is_koenigs(net: QuadNet, tol: float = DEFAULT_TOL) -> bool:
    return christoffel_dual_net(net, tol).residual <= tol


def dual_quad(q, tol: float = DEFAULT_TOL):
    """Christoffel dual of one planar quadrilateral: (4 points, residual)."""
    q = np.asarray(q, dtype=float)
    net = QuadNet([[q[0], q[3]], [q[1], q[2]]])
    res = christoffel_dual_net(net, tol)
    d = res.dual.array
    return np.array([d[0, 0], d[1, 0], d[1, 1], d[0, 1]]), res.residual


# -- height function and reciprocal-parallel nets ------------------------------


@dataclass
class HeightGrid:
    h: np.ndarray
    loop_defect: float
    face_defects: np.ndarray

    def __getitem__(self, kl):
        return float(self.h[kl])


def _dh(p_to, c_to, c_from):
    return (c_to[0] - c_from[0]) * p_to[1] - (c_to[1] - c_from[1]) * p_to[0]


def height_grid(pstar: QuadNet, cstar: QuadNet, tol: float = DEFAULT_TOL) -> HeightGrid:
    """Integrate the height relation of two parallel nets over the grid.

    Integration runs down column 0 and then along each row, starting from
    ``h = 0`` at (0, 0); each face contributes its circulation to the
    reported loop defect.
    """
    if not are_combescure(pstar, cstar, max(tol, 1e-7)):
        raise NotParallelError("the two nets are not parallel")
    p, c = pstar.array, cstar.array
    m, n = pstar.shape
    h = np.zeros((m + 1, n + 1))
    for l in range(n):
        h[0, l + 1] = h[0, l] + _dh(p[0, l + 1], c[0, l + 1], c[0, l])
    for k in range(m):
        for l in range(n + 1):
            h[k + 1, l] = h[k, l] + _dh(p[k + 1, l], c[k + 1, l], c[k, l])
    defects = np.zeros((m, n))
    for k in range(m):
        for l in range(n):
            loop = [(k, l), (k + 1, l), (k + 1, l + 1), (k, l + 1), (k, l)]
            defects[k, l] = sum(_dh(p[b], c[b], c[a]) for a, b in zip(loop, loop[1:]))
    return HeightGrid(h, float(np.max(np.abs(defects))) if defects.size else 0.0, defects)


def _sine(a, b):
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.linalg.norm(np.cross(a, b)) / (na * nb))


def reciprocal_defects(net: QuadNet, C: np.ndarray) -> np.ndarray:
    """Sines of the angles between reciprocal edges and primal transversals."""
    F = net.array
    m, n = net.shape
    out = []
    for i in range(m):
        for j in range(1, n):
            out.append(_sine(C[i, j - 1] - C[i, j], F[i + 1, j] - F[i, j]))
    for i in range(1, m):
        for j in range(n):
            out.append(_sine(C[i - 1, j] - C[i, j], F[i, j + 1] - F[i, j]))
    return np.array(out)


@dataclass
class ReciprocalResult:
    C: np.ndarray
    residual: float
    christoffel: ChristoffelResult
    heights: HeightGrid


def _flexible_dual(net: QuadNet, tol: float):
    pstar = metric_dual_net(net, tol)
    chris = christoffel_dual_net(pstar, tol)
    if chris.residual > tol:
        raise NotInfinitesimallyFlexible(
            f"metric dual is not a Koenigs net (defect {chris.residual:.3e})"
        )
    return pstar, chris


def reciprocal_parallel(net: QuadNet, tol: float = DEFAULT_TOL) -> ReciprocalResult:
    """The net ``C_kl = (-c2, c1, h)`` on the faces of an infinitesimally flexible net."""
    pstar, chris = _flexible_dual(net, tol)
    c = chris.dual.array
    hg = height_grid(pstar, chris.dual, tol)
    C = np.stack([-c[..., 1], c[..., 0], hg.h], axis=-1)
    defects = reciprocal_defects(net, C)
    return ReciprocalResult(C, float(defects.max()) if defects.size else 0.0, chris, hg)


@dataclass
class VelocityDiagram:
    net: QuadNet
    residual: float
    cstar: np.ndarray


def velocity_diagram(net: QuadNet, tol: float = DEFAULT_TOL) -> VelocityDiagram:
    """The v-parallel net whose faces lie in the planes dual to the Christoffel dual."""
    _, chris = _flexible_dual(net, tol)
    c = chris.dual.array
    if np.ptp(c.reshape(-1, 3), axis=0).max() <= tol * max(1.0, np.abs(c).max()):
        raise NotInfinitesimallyFlexible("Christoffel dual is trivial")
    F = net.array
    m, n = net.shape
    out = np.array(F, copy=True)
    spread = 0.0
    for i in range(m + 1):
        for j in range(n + 1):
            zs = [
                c[k, l, 0] * F[i, j, 0] + c[k, l, 1] * F[i, j, 1] - c[k, l, 2]
                for k in (i - 1, i)
                for l in (j - 1, j)
                if 0 <= k < m and 0 <= l < n
            ]
            out[i, j, 2] = np.mean(zs)
            spread = max(spread, float(np.ptp(zs)))
    return VelocityDiagram(QuadNet(out), spread, c)


# -- motion-space oracle ------------------------------------------------------


@dataclass
class MotionSpace:
    dimension: int
    trivial_dimension: int
    basis: np.ndarray
    singular_values: np.ndarray
    gap: float
    threshold: float

    @property
    def is_flexible(self) -> bool:
        return self.dimension > self.trivial_dimension


def _congruence_block(points) -> np.ndarray:
    """Velocities at ``points`` as a linear map of ``(phi, c1, c2, b1, b2, b3)``."""
    rows = []
    for x, y, _ in points:
        rows.append([-y, 0, 0, 1, 0, 0])
        rows.append([x, 0, 0, 0, 1, 0])
        rows.append([0, x, y, 0, 0, 1])
    return np.array(rows, dtype=float)


def motion_space(net: QuadNet, tol: float = DEFAULT_TOL) -> MotionSpace:
    """Infinitesimal isotropic isometric deformations, straight from the definition.

    Each face moves by an infinitesimal congruence fitted to its four vertex
    velocities; the fit is exact iff the velocities lie in the congruences'
    range, and with the congruence eliminated the vertex condition (first
    variation of the curvature) becomes linear in the velocities too.
    """
    m, n = net.shape
    F = net.array
    nv = (m + 1) * (n + 1)

    def vidx(i, j):
        return 3 * (i * (n + 1) + j)

    face_rows = []
    recover = {}
    for k, l in net.faces():
        corners = [(k, l), (k + 1, l), (k + 1, l + 1), (k, l + 1)]
        A = _congruence_block([F[i, j] for i, j in corners])
        U, _, _ = np.linalg.svd(A)
        cols = [vidx(i, j) + c for i, j in corners for c in range(3)]
        for r in U[:, 6:].T:
            row = np.zeros(3 * nv)
            row[cols] = r
            face_rows.append(row)
        recover[k, l] = (np.linalg.pinv(A), cols)

    vertex_rows = []
    if m >= 2 and n >= 2:
        duals = face_duals(net, tol)
        for i, j in net.interior_vertices():
            g = vertex_dual_quad(duals, i, j)[:, :2]
            row = np.zeros(3 * nv)
            for q, (k, l) in enumerate(((i - 1, j - 1), (i, j - 1), (i, j), (i - 1, j))):
                gp, gn = g[(q - 1) % 4], g[(q + 1) % 4]
                w = 0.5 * np.array([gn[1] - gp[1], gp[0] - gn[0]])
                L = np.array([[-g[q, 1], 1, 0, 0, 0, 0], [g[q, 0], 0, 1, 0, 0, 0]])
                pinv, cols = recover[k, l]
                row[cols] += w @ L @ pinv
            nr = np.linalg.norm(row)
            if nr > 0:
                vertex_rows.append(row / nr)

    M = np.array(face_rows + vertex_rows)
    _, s, vt = np.linalg.svd(M, full_matrices=True)
    N = 3 * nv
    spectrum = np.zeros(N)
    spectrum[: len(s)] = s
    threshold = tol * spectrum[0]
    rank = int(np.sum(spectrum > threshold))
    dim = N - rank
    basis = vt[rank:].reshape(dim, m + 1, n + 1, 3)
    if 0 < rank < N:
        gap = float(spectrum[rank - 1] / spectrum[rank]) if spectrum[rank] > 0 else np.inf
    else:
        gap = np.inf
    G = _congruence_block(net.flat())
    trivial = int(np.linalg.matrix_rank(G, tol=1e-10 * np.linalg.norm(G)))
    return MotionSpace(dim, trivial, basis, spectrum, gap, threshold)
