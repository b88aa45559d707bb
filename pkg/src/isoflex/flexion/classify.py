"""Which of the two flexible classes a dual-convex net belongs to."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core import DEFAULT_TOL
from ..errors import NotDualConvex
from ..quadnet import QuadNet, face_duals, is_strictly_convex, vertex_dual_quad
from .ratios import opposite_ratio


@dataclass
class Classification:
    class_i_rows: bool
    class_i_cols: bool
    class_ii: bool
    diagnostics: dict = field(default_factory=dict)

    @property
    def class_i(self) -> bool:
        return self.class_i_rows or self.class_i_cols

    def as_dict(self) -> dict:
        d = {
            "class_i_rows": self.class_i_rows,
            "class_i_cols": self.class_i_cols,
            "class_i": self.class_i,
            "class_ii": self.class_ii,
        }
        diag = {}
        for key, val in self.diagnostics.items():
            diag[key] = val.tolist() if isinstance(val, np.ndarray) else val
        d["diagnostics"] = diag
        return d


def _sine(u, w):
    return float(np.linalg.norm(np.cross(u, w)) / (np.linalg.norm(u) * np.linalg.norm(w)))


def segment_parallelism(duals: np.ndarray, axis: int, tol: float, notes: list):
    """Residuals of the affine-symmetry condition along one direction of the dual.

    For ``axis=0`` the segments ``p*_(k,l) p*_(k+2,l)`` must be parallel for
    all l, for each k; ``axis=1`` is the transposed condition. Returns an
    array of sines between consecutive segments, NaN-free; zero-length
    segments are reported and count as a failure.
    """
    d = duals if axis == 0 else np.transpose(duals, (1, 0, 2))
    K, L = d.shape[0], d.shape[1]
    res = np.zeros((max(K - 2, 0), max(L - 1, 0)))
    failed = False
    for k in range(K - 2):
        seg = d[k + 2] - d[k]
        lengths = np.linalg.norm(seg, axis=1)
        for l in range(L - 1):
            if min(lengths[l], lengths[l + 1]) <= tol * max(lengths.max(), 1.0):
                notes.append(f"zero-length dual segment at k={k}, l={l} (axis {axis})")
                res[k, l] = np.inf
                failed = True
                continue
            res[k, l] = _sine(seg[l], seg[l + 1])
    return res, failed


def classify(net: QuadNet, tol: float = DEFAULT_TOL) -> Classification:
    """Test both flexibility conditions through the metric dual.

    Class (i) in the rows (columns) sense is tested as parallelism of dual
    segments two steps apart in the i (j) direction; class (ii) compares the
    opposite ratios of neighbouring interior vertices with respect to their
    common edge, in log space.
    """
    m, n = net.shape
    if m < 2 or n < 2:
        raise NotDualConvex("classification needs m, n >= 2")
    duals = face_duals(net, tol)
    for i, j in net.interior_vertices():
        if not is_strictly_convex(vertex_dual_quad(duals, i, j), tol):
            raise NotDualConvex(f"vertex ({i}, {j}) is not dual-convex")
    notes: list[str] = []

    g = duals[..., :2].reshape(-1, 2)
    for a in range(len(g)):
        for b in range(a + 1, len(g)):
            if np.linalg.norm(g[a] - g[b]) <= tol * max(1.0, np.abs(g).max()):
                ka, la = divmod(a, n)
                kb, lb = divmod(b, n)
                notes.append(f"faces ({ka}, {la}) and ({kb}, {lb}) are parallel")

    rows_res, rows_fail = segment_parallelism(duals, 0, tol, notes)
    cols_res, cols_fail = segment_parallelism(duals, 1, tol, notes)
    rows_vacuous = rows_res.size == 0
    cols_vacuous = cols_res.size == 0
    if rows_vacuous:
        notes.append("class (i) rows condition is vacuous for these dimensions")
    if cols_vacuous:
        notes.append("class (i) columns condition is vacuous for these dimensions")
    class_rows = not rows_fail and bool(np.all(rows_res <= tol))
    class_cols = not cols_fail and bool(np.all(cols_res <= tol))

    ratio_res = []
    for i, j in net.interior_vertices():
        if i + 1 < m:
            r1 = opposite_ratio(net, i, j, "+i", tol, duals)
            r2 = opposite_ratio(net, i + 1, j, "-i", tol, duals)
            ratio_res.append(abs(np.log(r1) - np.log(r2)))
        if j + 1 < n:
            r1 = opposite_ratio(net, i, j, "+j", tol, duals)
            r2 = opposite_ratio(net, i, j + 1, "-j", tol, duals)
            ratio_res.append(abs(np.log(r1) - np.log(r2)))
    ratio_res = np.array(ratio_res)
    if ratio_res.size == 0:
        notes.append("class (ii) condition is vacuous: no adjacent interior vertices")
    class_ii = bool(np.all(ratio_res <= tol))

    diagnostics = {
        "rows_residuals": rows_res,
        "cols_residuals": cols_res,
        "ratio_residuals": ratio_res,
        "rows_vacuous": rows_vacuous,
        "cols_vacuous": cols_vacuous,
        "ii_vacuous": ratio_res.size == 0,
        "notes": notes,
    }
    return Classification(class_rows, class_cols, class_ii, diagnostics)
