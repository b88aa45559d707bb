"""Random generators for tests. Kept independent of the code under test
where it serves as an oracle (the class (ii) generator solves the ratio
conditions globally with scipy instead of propagating them)."""
from __future__ import annotations

import numpy as np
from scipy.optimize import least_squares

from isoflex.errors import IsoflexError
from isoflex.flexion import ConeCylinderData, gen_cone_cylinder, gen_generalized_T, lift_top_view
from isoflex.quadnet import QuadNet, net_from_dual, validate


def random_cone_cylinder_data(rng, m=None, n=None, max_tries=200) -> ConeCylinderData:
    """Small perturbation of the paraboloid data with convex, dual-convex nets."""
    for _ in range(max_tries):
        mm = int(rng.integers(1, 7)) if m is None else m
        nn = int(rng.integers(1, 7)) if n is None else n
        i = np.arange(mm + 2, dtype=float)
        j = np.arange(nn + 2, dtype=float)
        u = lambda *s: rng.uniform(-1, 1, size=s)
        a = np.stack([i + 0.02 * u(mm + 2), 0.02 * u(mm + 2), i * i + 0.2 * u(mm + 2)], axis=1)
        b = np.stack([0.02 * u(nn + 2), j + 0.02 * u(nn + 2), j * j + 0.2 * u(nn + 2)], axis=1)
        sigma = 1.0 + 0.01 * u(mm + 2)
        d = ConeCylinderData(a, b, sigma)
        try:
            rp, rt = validate(gen_cone_cylinder(d)), validate(gen_generalized_T(d))
            if rp.ok and rp.dual_convex_ok and rt.ok and rt.dual_convex_ok:
                return d
        except IsoflexError:
            pass
    raise RuntimeError("no admissible cone-cylinder data found")


def _tri(p, q, r):
    return 0.5 * abs((q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]))


def _ratio(A, B, C, D):
    # Area(Q A B) / Area(Q C D), Q = AC ∩ BD, by plain 2x2 solve
    M = np.array([C - A, B - D]).T
    s = np.linalg.solve(M, B - A)[0]
    Q = A + s * (C - A)
    return _tri(Q, A, B) / _tri(Q, C, D)


def class_ii_residuals(top: np.ndarray) -> np.ndarray:
    """log-ratio mismatches between adjacent interior vertices."""
    m, n = top.shape[0], top.shape[1]  # face counts of the primal

    def quad(i, j):
        return top[i - 1, j - 1], top[i, j - 1], top[i, j], top[i - 1, j]

    res = []
    for i in range(1, m):
        for j in range(1, n):
            q0, q1, q2, q3 = quad(i, j)
            if i + 1 < m:
                # edge +i of (i, j) is shared by faces q1, q2; seen from (i+1, j) it is -i (faces q0, q3)
                r0, _, _, r3 = quad(i + 1, j)
                res.append(np.log(_ratio(q1, q2, q3, q0)) - np.log(_ratio(r3, r0, *quad(i + 1, j)[1:3])))
            if j + 1 < n:
                s0, s1, _, _ = quad(i, j + 1)
                res.append(np.log(_ratio(q2, q3, q0, q1)) - np.log(_ratio(s0, s1, *quad(i, j + 1)[2:4])))
    return np.array(res)


def random_class_ii_net(rng, m, n, noise=0.04, max_tries=50) -> QuadNet:
    """A random dual-convex net with equal opposite ratios across every interior edge."""
    k, l = np.meshgrid(np.arange(m), np.arange(n), indexing="ij")
    base = np.dstack([np.where(k % 2, -1.0, 1.0), np.where(l % 2, -1.0, 1.0)])
    for _ in range(max_tries):
        x0 = (base + noise * rng.uniform(-1, 1, size=base.shape)).ravel()
        try:
            sol = least_squares(lambda x: class_ii_residuals(x.reshape(m, n, 2)), x0, xtol=1e-15, ftol=1e-15, gtol=1e-15)
        except np.linalg.LinAlgError:
            continue
        if not np.all(np.isfinite(sol.x)) or np.max(np.abs(sol.fun), initial=0.0) > 1e-13:
            continue
        top = sol.x.reshape(m, n, 2)
        zr = 0.5 * rng.uniform(-1, 1, size=n)
        zc = np.concatenate([[zr[0]], 0.5 * rng.uniform(-1, 1, size=m - 1)])
        try:
            dual = lift_top_view(top, zr, zc)
            hint = np.dstack(np.meshgrid(np.arange(m + 1), np.arange(n + 1), indexing="ij")).astype(float)
            hint = hint + noise * rng.uniform(-1, 1, size=hint.shape)
            net = net_from_dual(dual, boundary_top_views=hint)
            rep = validate(net)
        except IsoflexError:
            continue
        if rep.ok and rep.dual_convex_ok:
            return net
    raise RuntimeError("no class (ii) net found")
