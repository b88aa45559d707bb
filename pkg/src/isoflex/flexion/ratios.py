"""Opposite ratios of quadrilaterals and of net vertices, and affine symmetry
of face pairs."""
from __future__ import annotations

import numpy as np

from ..core import DEFAULT_TOL, iso_angle, plane_from_normal
from ..errors import BoundaryVertexError, CoplanarPair, DegenerateDiagonals, NotDualConvex
from ..quadnet import QuadNet, face_duals, face_plane, is_strictly_convex

# direction of an edge emanating from a vertex -> index a such that the edge
# is shared by faces q_a and q_(a+1) in the traversal order (i-1,j-1), (i,j-1), (i,j), (i-1,j)
EDGE_SLOT = {"-j": 0, "+i": 1, "+j": 2, "-i": 3}


def _tri_area(p, q, r):
    return 0.5 * abs((q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]))


def diagonal_point(A, B, C, D, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Top-view intersection of the diagonals AC and BD."""
    A, B, C, D = (np.asarray(x, dtype=float)[:2] for x in (A, B, C, D))
    u, w = C - A, D - B
    det = u[0] * (-w[1]) - u[1] * (-w[0])
    if abs(det) <= tol * np.linalg.norm(u) * np.linalg.norm(w):
        raise DegenerateDiagonals("diagonals are parallel")
    rhs = B - A
    s = (rhs[0] * (-w[1]) - rhs[1] * (-w[0])) / det
    return A + s * u


def quad_opposite_ratio(A, B, C, D, tol: float = DEFAULT_TOL) -> float:
    """Opposite ratio of quadrilateral ABCD with respect to side AB.

    ``Area(AQB) / Area(CQD)`` with Q the intersection of the diagonals,
    measured in the top view.
    """
    Q = diagonal_point(A, B, C, D, tol)
    num = _tri_area(Q, A[:2], B[:2])
    den = _tri_area(Q, C[:2], D[:2])
    if den == 0.0 or num == 0.0:
        raise DegenerateDiagonals("diagonals meet at a vertex")
    return num / den


def _vertex_quad(net, i, j, tol, duals=None):
    if not (0 < i < net.m and 0 < j < net.n):
        raise BoundaryVertexError(f"({i}, {j}) is a boundary vertex")
    if duals is None:
        g = [face_plane(net, k, l, tol) for k, l in ((i - 1, j - 1), (i, j - 1), (i, j), (i - 1, j))]
        q = np.array(g, dtype=float)
    else:
        q = np.array([duals[i - 1, j - 1], duals[i, j - 1], duals[i, j], duals[i - 1, j]])
    if not is_strictly_convex(q, tol):
        raise NotDualConvex(f"vertex ({i}, {j}) is not dual-convex")
    return q


def _ordered(q, edge):
    a = EDGE_SLOT[edge]
    # p1 = q_(a+1), p2 = q_(a+2), p3 = q_(a+3), p4 = q_a so that p1 and p4 share the edge
    return q[(a + 1) % 4], q[(a + 2) % 4], q[(a + 3) % 4], q[a]


def opposite_ratio(net: QuadNet, i: int, j: int, edge: str, tol: float = DEFAULT_TOL, duals=None) -> float:
    """Opposite ratio of vertex (i, j) with respect to an emanating edge.

    ``edge`` is one of ``"+i", "-i", "+j", "-j"``. Computed in the dual
    quadrilateral ``p1* p2* p3* p4*`` as ``Area(Q p1* p4*) / Area(Q p2* p3*)``.
    """
    if edge not in EDGE_SLOT:
        raise ValueError(f"edge must be one of {sorted(EDGE_SLOT)}")
    p1, p2, p3, p4 = _ordered(_vertex_quad(net, i, j, tol, duals), edge)
    return quad_opposite_ratio(p4, p1, p2, p3, tol)


def opposite_ratio_by_angles(net: QuadNet, i: int, j: int, edge: str, tol: float = DEFAULT_TOL) -> float:
    """The same ratio from isotropic angles between face planes and the plane
    spanned by the lines p1 ∩ p3 and p2 ∩ p4 through the vertex."""
    if edge not in EDGE_SLOT:
        raise ValueError(f"edge must be one of {sorted(EDGE_SLOT)}")
    q = _vertex_quad(net, i, j, tol)
    p1, p2, p3, p4 = _ordered(q, edge)
    normal = [np.array([-g[0], -g[1], 1.0]) for g in (p1, p2, p3, p4)]
    l13 = np.cross(normal[0], normal[2])
    l24 = np.cross(normal[1], normal[3])
    p = plane_from_normal(np.cross(l13, l24), net.array[i, j], tol)
    planes = [plane_from_normal(nv, net.array[i, j], tol) for nv in normal]
    a1, a2, a3, a4 = (iso_angle(pl, p) for pl in planes)
    return (a1 / a3) * (a4 / a2)


def vertex_ratio_grid(net: QuadNet, tol: float = DEFAULT_TOL):
    """Opposite ratios at every interior vertex for each edge direction."""
    duals = face_duals(net, tol)
    out = {}
    for i in range(1, net.m):
        for j in range(1, net.n):
            out[i, j] = {e: opposite_ratio(net, i, j, e, tol, duals) for e in EDGE_SLOT}
    return out


def _shared(q1, q2, tol):
    shared = [(a, b) for a in range(4) for b in range(4) if np.allclose(q1[a], q2[b], atol=tol, rtol=0)]
    return shared


def is_affine_symmetric_pair(q1, q2, tol: float = DEFAULT_TOL):
    """Whether two quads sharing a side are affine images of each other fixing it.

    Equivalent to the segments joining corresponding free vertices being
    parallel. Returns ``(flag, residual)`` with the residual the sine of the
    angle between those segments.
    """
    q1 = np.asarray(q1, dtype=float)
    q2 = np.asarray(q2, dtype=float)
    scale = max(1.0, np.abs(q1).max(), np.abs(q2).max())
    shared = _shared(q1, q2, tol * scale)
    if len(shared) != 2:
        raise ValueError("the quads must share exactly one side")
    (a1, b1), (a2, b2) = shared
    if (a2 - a1) % 4 not in (1, 3):
        raise ValueError("the shared vertices are not a side")
    pts = np.vstack([q1, q2])
    centered = pts - pts.mean(axis=0)
    sv = np.linalg.svd(centered, compute_uv=False)
    if sv[2] <= tol * sv[0]:
        raise CoplanarPair("the quads lie in one plane")
    # C is the free neighbour of shared vertex a1 in q1, C' that of b1 in q2
    def free_neighbour(q, x, other):
        for y in ((x + 1) % 4, (x - 1) % 4):
            if y != other:
                return q[y]
    C, Cp = free_neighbour(q1, a1, a2), free_neighbour(q2, b1, b2)
    D, Dp = free_neighbour(q1, a2, a1), free_neighbour(q2, b2, b1)
    u, w = Cp - C, Dp - D
    res = float(np.linalg.norm(np.cross(u, w)) / (np.linalg.norm(u) * np.linalg.norm(w)))
    return res <= tol, res
