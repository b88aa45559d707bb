"""Deformation families and the isometric-deformation checker."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..core import DEFAULT_TOL
from ..errors import IsoflexError, PreconditionError
from ..quadnet import QuadNet, curvature_grid, validate
from .generators import (
    ConeCylinderData,
    deform_cone_cylinder,
    deform_generalized_T,
    gen_example_2x2,
)

KINDS = ("cone-cylinder", "generalized-t", "example2x2")


@dataclass(frozen=True)
class DeformationFamily:
    """A closed-form ``t -> QuadNet`` deformation with a nominal parameter range."""

    kind: str
    payload: ConeCylinderData | None = None
    t_range: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self):
        kind = self.kind.lower().replace("_", "-")
        aliases = {"conecylinder": "cone-cylinder", "generalizedt": "generalized-t", "example2x2": "example2x2"}
        kind = aliases.get(kind.replace("-", ""), kind)
        if kind not in KINDS:
            raise PreconditionError(f"unknown family kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        t0, t1 = (float(x) for x in self.t_range)
        if t1 < t0:
            raise PreconditionError("t_range must be increasing")
        object.__setattr__(self, "t_range", (t0, t1))
        if kind != "example2x2" and self.payload is None:
            raise PreconditionError(f"{kind} family needs generator data")

    def frame(self, t: float) -> QuadNet:
        if self.kind == "example2x2":
            return gen_example_2x2(t)
        if self.kind == "cone-cylinder":
            return deform_cone_cylinder(self.payload, t)
        return deform_generalized_T(self.payload, t)

    def __call__(self, t: float) -> QuadNet:
        return self.frame(t)

    def frames(self, ts, tol: float = DEFAULT_TOL, parallel: bool = False):
        """Evaluate and re-validate frames in order of ``ts``.

        Stops at the first frame that fails to evaluate or is not a valid
        dual-convex net and returns ``(frames, truncated_at)``.
        """
        ts = [float(t) for t in ts]

        def build(t):
            try:
                net = self.frame(t)
            except IsoflexError as exc:
                return None, str(exc)
            rep = validate(net, tol)
            if not rep.ok or (self.kind != "cone-cylinder" and not rep.dual_convex_ok):
                return None, f"frame at t={t} is not a valid dual-convex net"
            return net, None

        if parallel:
            with ThreadPoolExecutor() as pool:
                results = list(pool.map(build, ts))
        else:
            results = []
            for t in ts:
                results.append(build(t))
                if results[-1][0] is None:
                    break
        out = []
        for t, (net, err) in zip(ts, results):
            if net is None:
                return out, {"t": t, "reason": err}
            out.append((t, net))
        return out, None

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "t_range": list(self.t_range)}
        if self.payload is not None:
            d.update(self.payload.to_dict())
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "DeformationFamily":
        kind = d["kind"]
        payload = None
        if "a" in d:
            payload = ConeCylinderData(d["a"], d["b"], d["sigma"])
        return cls(kind, payload, tuple(d.get("t_range", (0.0, 1.0))))


def congruence_fit(A: QuadNet, B: QuadNet) -> float:
    """Residual of the best isotropic congruence taking A to B.

    The top views are matched by an orientation-preserving planar rigid
    motion (Procrustes), after which the z-coordinates are matched by the
    remaining affine part ``z + c1 x + c2 y + b3``. Returns the max vertex
    residual relative to the net diameter.
    """
    P, Q = A.flat(), B.flat()
    pc, qc = P[:, :2].mean(axis=0), Q[:, :2].mean(axis=0)
    H = (P[:, :2] - pc).T @ (Q[:, :2] - qc)
    U, _, Vt = np.linalg.svd(H)
    R = Vt.T @ U.T
    if np.linalg.det(R) < 0:
        Vt[-1] *= -1
        R = Vt.T @ U.T
    top = (P[:, :2] - pc) @ R.T + qc
    X = np.column_stack([P[:, 0], P[:, 1], np.ones(len(P))])
    coef, *_ = np.linalg.lstsq(X, Q[:, 2] - P[:, 2], rcond=None)
    z = P[:, 2] + X @ coef
    res = max(np.abs(top - Q[:, :2]).max(), np.abs(z - Q[:, 2]).max())
    return float(res / max(A.diameter(), 1e-300))


@dataclass
class DeformationReport:
    t_samples: list
    top_view_deviation: float
    curvature_deviation: float
    max_congruence_residual: float
    curvatures: list = field(default_factory=list)
    tol: float = DEFAULT_TOL
    curvature_tol: float = 1e-8

    @property
    def top_views_fixed(self) -> bool:
        return self.top_view_deviation <= self.tol

    @property
    def curvature_constant(self) -> bool:
        return self.curvature_deviation <= self.curvature_tol

    @property
    def nontrivial(self) -> bool:
        return self.max_congruence_residual > self.tol

    @property
    def passed(self) -> bool:
        return self.top_views_fixed and self.curvature_constant and self.nontrivial

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "top_views_fixed": self.top_views_fixed,
            "curvature_constant": self.curvature_constant,
            "nontrivial": self.nontrivial,
            "top_view_deviation": self.top_view_deviation,
            "curvature_deviation": self.curvature_deviation,
            "max_congruence_residual": self.max_congruence_residual,
            "t_samples": list(self.t_samples),
        }


def check_isometric_deformation(family, t_samples, tol: float = DEFAULT_TOL, curvature_tol: float = 1e-8):
    """Check fixed top views, constant curvature and nontriviality over samples.

    ``family`` may be a :class:`DeformationFamily` or any callable
    ``t -> QuadNet``.
    """
    ts = [float(t) for t in t_samples]
    if not ts:
        raise PreconditionError("need at least one sample")
    nets = [family(t) for t in ts]
    base = nets[0]
    scale = max(1.0, float(np.abs(base.top_views()).max()))
    top_dev = max(float(np.abs(n.top_views() - base.top_views()).max()) for n in nets) / scale
    grids = [curvature_grid(n, tol).values for n in nets]
    k_scale = max(1.0, float(np.abs(grids[0]).max())) if grids[0].size else 1.0
    k_dev = max(float(np.abs(g - grids[0]).max()) if g.size else 0.0 for g in grids) / k_scale
    cong = max((congruence_fit(base, n) for n in nets[1:]), default=0.0)
    return DeformationReport(ts, top_dev, k_dev, cong, [g.tolist() for g in grids], tol, curvature_tol)
