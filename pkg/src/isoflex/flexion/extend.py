"""Completing a wide L-shaped net to a flexible net.

The work happens in the metric dual, where the L becomes the dual faces in
the first two rows and columns. Missing dual vertices are added one at a
time in row-major order, each closing a face whose other three vertices
are known; the completed dual is then turned back into a net.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core import DEFAULT_TOL
from ..errors import IsoflexError, PreconditionError, PropagationFailed
from ..quadnet import QuadNet, fit_plane, is_strictly_convex, net_from_dual
from .ratios import quad_opposite_ratio

CLASS_I = "ClassI"
CLASS_II = "ClassII"


class WideLShapedNet:
    """Vertices ``F_ij`` with ``min(i, j) <= 2`` of an m x n net (m, n >= 2)."""

    def __init__(self, m: int, n: int, vertices, tol: float = DEFAULT_TOL):
        if m < 2 or n < 2:
            raise PreconditionError("a wide L-shaped net needs m, n >= 2")
        v = np.array(vertices, dtype=float)
        if v.shape != (m + 1, n + 1, 3):
            raise PreconditionError(f"expected an array of shape {(m + 1, n + 1, 3)}")
        mask = self.mask(m, n)
        if not np.all(np.isfinite(v[mask])):
            raise PreconditionError("every vertex with min(i, j) <= 2 must be given")
        v[~mask] = np.nan
        v.setflags(write=False)
        self.m, self.n, self.vertices = m, n, v
        self.convex = {}
        for k, l in self.faces():
            q = self.face(k, l)
            self.convex[k, l] = is_strictly_convex(q, tol)

    @staticmethod
    def mask(m: int, n: int) -> np.ndarray:
        i, j = np.meshgrid(np.arange(m + 1), np.arange(n + 1), indexing="ij")
        return np.minimum(i, j) <= 2

    def faces(self):
        for k in range(self.m):
            for l in range(self.n):
                if min(k, l) <= 1:
                    yield k, l

    def face(self, k, l):
        v = self.vertices
        return np.array([v[k, l], v[k + 1, l], v[k + 1, l + 1], v[k, l + 1]])

    @classmethod
    def from_net(cls, net: QuadNet, tol: float = DEFAULT_TOL) -> "WideLShapedNet":
        return cls(net.m, net.n, net.array, tol)

    def dual(self, tol: float = DEFAULT_TOL) -> np.ndarray:
        """Dual points of the covered faces, NaN elsewhere; shape (m, n, 3)."""
        out = np.full((self.m, self.n, 3), np.nan)
        for k, l in self.faces():
            out[k, l] = fit_plane(self.face(k, l), tol)[0]
        return out


@dataclass
class ExtensionResult:
    net: QuadNet
    dual: QuadNet
    which: str
    mode: str | None
    step_residuals: list = field(default_factory=list)
    newton_iterations: list = field(default_factory=list)
    hypothesis_residual: float = 0.0
    consistency: float = 0.0


def _sine(u, w):
    nu, nw = np.linalg.norm(u), np.linalg.norm(w)
    if nu == 0.0 or nw == 0.0:
        return np.inf
    return float(np.linalg.norm(np.cross(u, w)) / (nu * nw))


def face_ratio(D: np.ndarray, k: int, l: int, side: str, C=None) -> float:
    """Opposite ratio of dual face (k, l) with respect to one of its sides.

    ``side`` names the side by the index that is constant along it:
    ``"-l"`` is ``p*_(k,l) p*_(k+1,l)``, ``"+k"`` is ``p*_(k+1,l) p*_(k+1,l+1)``,
    and so on. ``C`` optionally replaces the vertex ``p*_(k+1,l+1)``.
    """
    V = [D[k, l], D[k + 1, l], D[k + 1, l + 1] if C is None else C, D[k, l + 1]]
    start = {"-l": 0, "+k": 1, "+l": 2, "-k": 3}[side]
    return quad_opposite_ratio(*(V[(start + a) % 4] for a in range(4)))


def _rows_hypothesis(D, m):
    return [_sine(D[k + 2, 0] - D[k, 0], D[k + 2, 1] - D[k, 1]) for k in range(m - 2)]


def _cols_hypothesis(D, n):
    return [_sine(D[0, l + 2] - D[0, l], D[1, l + 2] - D[1, l]) for l in range(n - 2)]


def _class_ii_hypothesis(D, m, n):
    out = []
    for l in range(n - 2):
        out.append(abs(np.log(face_ratio(D, 0, l, "+l")) - np.log(face_ratio(D, 0, l + 1, "-l"))))
    for k in range(m - 2):
        out.append(abs(np.log(face_ratio(D, k, 0, "+k")) - np.log(face_ratio(D, k + 1, 0, "-k"))))
    return out


def _plane_point(A, B, D, xy):
    nrm = np.cross(B - A, D - A)
    z = A[2] - (nrm[0] * (xy[0] - A[0]) + nrm[1] * (xy[1] - A[1])) / nrm[2]
    return np.array([xy[0], xy[1], z])


def _newton_step(D, k, l, step, max_iter=50):
    A, B, Dd = D[k - 1, l - 1], D[k, l - 1], D[k - 1, l]
    target1 = np.log(face_ratio(D, k - 1, l - 2, "+l"))
    target2 = np.log(face_ratio(D, k - 2, l - 1, "+k"))
    scale = np.linalg.norm(B - A) + np.linalg.norm(Dd - A)

    def residual(xy):
        C = _plane_point(A, B, Dd, xy)
        r1 = np.log(face_ratio(D, k - 1, l - 1, "-l", C)) - target1
        r2 = np.log(face_ratio(D, k - 1, l - 1, "-k", C)) - target2
        return np.array([r1, r2])

    x = (B + Dd - A)[:2]
    try:
        r = residual(x)
        h = 1e-7 * scale
        for it in range(1, max_iter + 1):
            J = np.column_stack([(residual(x + h * e) - residual(x - h * e)) / (2 * h) for e in np.eye(2)])
            dx = np.linalg.solve(J, -r)
            lam = 1.0
            while True:
                x_new = x + lam * dx
                try:
                    r_new = residual(x_new)
                    good = np.linalg.norm(r_new) <= np.linalg.norm(r)
                except IsoflexError:
                    good = False
                if good:
                    break
                lam *= 0.5
                if lam < 1e-6:
                    if np.linalg.norm(r) <= 1e-12:
                        return _plane_point(A, B, Dd, x), float(np.linalg.norm(r)), it
                    raise PropagationFailed("damped Newton stalled", step)
            x, r = x_new, r_new
            if np.linalg.norm(lam * dx) <= 1e-12 * scale or np.linalg.norm(r) <= 1e-15:
                return _plane_point(A, B, Dd, x), float(np.linalg.norm(r)), it
        raise PropagationFailed("damped Newton did not converge in 50 iterations", step)
    except np.linalg.LinAlgError as exc:
        raise PropagationFailed(f"singular Newton system: {exc}", step) from exc
    except IsoflexError as exc:
        if isinstance(exc, PropagationFailed):
            raise
        raise PropagationFailed(f"opposite ratio undefined: {exc}", step) from exc


def _intersection_step(D, k, l, mode, step, tol):
    A, B, Dd = D[k - 1, l - 1], D[k, l - 1], D[k - 1, l]
    if mode == "rows":
        p0, direction = D[k - 2, l], D[k, l - 1] - D[k - 2, l - 1]
    else:
        p0, direction = D[k, l - 2], D[k - 1, l] - D[k - 1, l - 2]
    nrm = np.cross(B - A, Dd - A)
    den = float(np.dot(nrm, direction))
    if abs(den) <= tol * np.linalg.norm(nrm) * np.linalg.norm(direction):
        raise PropagationFailed("forced line is parallel to the face plane", step)
    s = float(np.dot(nrm, A - p0)) / den
    return p0 + s * direction


def extend_L_shaped(
    L: WideLShapedNet,
    which: str = CLASS_I,
    tol: float = DEFAULT_TOL,
    boundary_top_views=None,
    mode: str | None = None,
) -> ExtensionResult:
    """Complete a wide L-shaped net to the flexible net of the chosen class.

    ``which`` is ``"ClassI"`` (parameter lines in isotropic planes; ``mode``
    picks ``"rows"`` or ``"cols"`` and is detected from the L when omitted)
    or ``"ClassII"`` (equal opposite ratios). Boundary vertices of the
    result that the face planes leave free get their top views from the L,
    from ``boundary_top_views`` or by linear extrapolation.
    """
    if which not in (CLASS_I, CLASS_II):
        raise PreconditionError("which must be 'ClassI' or 'ClassII'")
    m, n = L.m, L.n
    for kl, ok in L.convex.items():
        if not ok:
            raise PropagationFailed(f"face {kl} of the L is not convex", 0)
    try:
        D = L.dual(tol)
    except IsoflexError as exc:
        raise PropagationFailed(f"L has an unusable face: {exc}", 0) from exc
    for k in range(m - 1):
        for l in range(n - 1):
            if min(k, l) == 0:
                q = [D[k, l], D[k + 1, l], D[k + 1, l + 1], D[k, l + 1]]
                if not is_strictly_convex(q, tol):
                    raise PropagationFailed(f"L is not dual-convex at vertex ({k + 1}, {l + 1})", 0)

    if which == CLASS_I:
        rows, cols = _rows_hypothesis(D, m), _cols_hypothesis(D, n)
        rows_ok = bool(rows) and max(rows) <= tol
        cols_ok = bool(cols) and max(cols) <= tol
        if mode is None:
            mode = "rows" if rows_ok else "cols" if cols_ok else None
        if mode not in ("rows", "cols") or not (rows_ok if mode == "rows" else cols_ok):
            raise PropagationFailed("L does not satisfy the isotropic-plane condition", 0)
        hyp = max(rows if mode == "rows" else cols)
    else:
        mode = None
        ratios = _class_ii_hypothesis(D, m, n)
        hyp = max(ratios) if ratios else 0.0
        if hyp > tol:
            raise PropagationFailed("L does not have equal opposite ratios", 0)

    residuals, iterations = [], []
    step = 0
    for k in range(2, m):
        for l in range(2, n):
            step += 1
            if which == CLASS_I:
                C = _intersection_step(D, k, l, mode, step, tol)
                residuals.append(0.0)
            else:
                C, res, it = _newton_step(D, k, l, step)
                residuals.append(res)
                iterations.append(it)
            q = [D[k - 1, l - 1], D[k, l - 1], C, D[k - 1, l]]
            if not is_strictly_convex(q, tol):
                raise PropagationFailed("completed dual face lost convexity", step)
            D[k, l] = C

    dual = QuadNet(D)
    hints = np.array(L.vertices[..., :2], copy=True)
    if boundary_top_views is not None:
        given = np.asarray(boundary_top_views, dtype=float)
        known = np.all(np.isfinite(given), axis=-1)
        hints[known] = given[known]
    try:
        net = net_from_dual(dual, hints, tol)
    except IsoflexError as exc:
        raise PropagationFailed(f"could not rebuild the net: {exc}", step) from exc
    mask = WideLShapedNet.mask(m, n)
    diff = np.abs(net.array[mask] - L.vertices[mask]).max()
    consistency = float(diff / max(net.diameter(), 1e-300))
    return ExtensionResult(net, dual, which, mode, residuals, iterations, hyp, consistency)
