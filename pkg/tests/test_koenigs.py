import numpy as np
import pytest

from helpers import random_cone_cylinder_data
from isoflex.errors import DegenerateError, NotInfinitesimallyFlexible, NotParallelError
from isoflex.flexion import egg_crate_net, gen_generalized_T, paraboloid_net, random_planar_net
from isoflex.koenigs import (
    christoffel_dual_net,
    dual_quad,
    height_grid,
    is_koenigs,
    motion_space,
    reciprocal_parallel,
    velocity_diagram,
)
from isoflex.quadnet import QuadNet, are_v_parallel, curvature, metric_dual_net, mixed_curvature, validate


def _sine(a, b):
    return np.linalg.norm(np.cross(a, b)) / (np.linalg.norm(a) * np.linalg.norm(b))


def test_dual_of_unit_square():
    q = np.array([[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]], float)
    d, res = dual_quad(q)
    assert res < 1e-14
    assert np.allclose(d[:, :2], [[0, 0], [1, 0], [1, -1], [0, -1]])


def test_dual_quad_parallelism_on_random_quad(rng):
    q = np.array([[0, 0, 0], [2, 0.1, 0], [1.7, 1.4, 0], [0.2, 1.1, 0]]) + 0.1 * rng.uniform(-1, 1, (4, 3)) * [1, 1, 0]
    d, res = dual_quad(q)
    assert res < 1e-12
    for a in range(4):
        assert _sine(q[(a + 1) % 4] - q[a], d[(a + 1) % 4] - d[a]) < 1e-10
    assert _sine(q[2] - q[0], d[3] - d[1]) < 1e-10
    assert _sine(q[3] - q[1], d[2] - d[0]) < 1e-10


def test_paraboloid_dual_is_koenigs():
    pstar = metric_dual_net(paraboloid_net(4, 4))
    assert is_koenigs(pstar)
    assert not is_koenigs(metric_dual_net(random_planar_net(3, 3, np.random.default_rng(3))))


def test_collinear_face_rejected():
    net = QuadNet([[[0, 0, 0], [0, 1, 0]], [[1, 0, 0], [0.5, 0.5, 0]]])
    with pytest.raises(DegenerateError):
        christoffel_dual_net(net)


def test_height_grid_on_parallel_nets():
    pstar = metric_dual_net(paraboloid_net(3, 3))
    chris = christoffel_dual_net(pstar)
    hg = height_grid(pstar, chris.dual)
    assert hg.loop_defect < 1e-12
    with pytest.raises(NotParallelError):
        height_grid(pstar, QuadNet(np.random.default_rng(0).normal(size=(3, 3, 3))))


def test_reciprocal_paraboloid_up_to_translation():
    res = reciprocal_parallel(paraboloid_net(3, 3))
    k, l = np.meshgrid(np.arange(3), np.arange(3), indexing="ij")
    want = np.dstack([2 * l + 1, 2 * k + 1, 2 * k + 2 * l + 4 * k * l])
    shift = res.C - want
    assert np.allclose(shift, shift[0, 0], atol=1e-10)


def test_reciprocal_edges_parallel_to_transversals(rng):
    net = gen_generalized_T(random_cone_cylinder_data(rng, 4, 3))
    res = reciprocal_parallel(net)
    F, C = net.array, res.C
    m, n = net.shape
    worst = 0.0
    for i in range(m):
        for j in range(1, n):
            worst = max(worst, _sine(C[i, j] - C[i, j - 1], F[i + 1, j] - F[i, j]))
    for i in range(1, m):
        for j in range(n):
            worst = max(worst, _sine(C[i, j] - C[i - 1, j], F[i, j + 1] - F[i, j]))
    assert worst < 1e-9
    assert res.residual < 1e-9


def test_reciprocal_requires_flexibility(rng):
    with pytest.raises(NotInfinitesimallyFlexible):
        reciprocal_parallel(random_planar_net(3, 3, rng))


def test_velocity_diagram_paraboloid():
    net = paraboloid_net(3, 3)
    vd = velocity_diagram(net)
    assert are_v_parallel(net, vd.net, 0.0)
    assert vd.residual < 1e-10
    for i, j in net.interior_vertices():
        assert abs(mixed_curvature(net, vd.net, i, j)) < 1e-9


def test_sum_with_v_parallel_net_is_quadratic_in_curvature(rng):
    # z-sum of v-parallel nets: Omega_t = Omega_A + t mixed + t^2 Omega_B
    A = random_planar_net(3, 3, rng)
    B = QuadNet(np.dstack([A.array[..., :2], paraboloid_net(3, 3).array[..., 2] * 0.3]))
    for t in (-0.5, 0.5, 2.0):
        S = QuadNet(np.dstack([A.array[..., :2], A.array[..., 2] + t * B.array[..., 2]]))
        if not validate(S).ok:
            continue
        for i, j in A.interior_vertices():
            lhs = curvature(S, i, j)
            rhs = curvature(A, i, j) + t * mixed_curvature(A, B, i, j) + t * t * curvature(B, i, j)
            assert lhs == pytest.approx(rhs, abs=1e-9)


@pytest.mark.parametrize("net", [paraboloid_net(3, 3), egg_crate_net(4, 4), paraboloid_net(1, 1)], ids=["paraboloid", "egg", "single"])
def test_motion_space_flexible_examples(net):
    ms = motion_space(net)
    assert ms.trivial_dimension == 6
    if net.m == 1:
        assert ms.dimension == 6
    else:
        assert ms.dimension == 7 and ms.is_flexible and ms.gap > 1e3


def test_motion_space_rigid_random(rng):
    ms = motion_space(random_planar_net(4, 4, rng))
    assert not ms.is_flexible
    assert ms.basis.shape[1:] == (5, 5, 3)
