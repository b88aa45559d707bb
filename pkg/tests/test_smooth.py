import numpy as np
import pytest

from isoflex.errors import DegenerateDeterminant, OutOfDomain, PreconditionError, QuadratureFailure, AdmissibilityFailure
from isoflex.flexion import ConeCylinderData, classify, gen_generalized_T
from isoflex.smooth import (
    Curve,
    ScalarCurve,
    Surface,
    SurfacePatch,
    adaptive_simpson,
    deform_scale_translational,
    deform_T_surface,
    dual_of_surface_point,
    eval_scale_translational,
    eval_T_surface,
    fd_jet,
    graph_surface,
    iso_gauss_curvature,
    sample_to_quadnet,
    scale_translational_surface,
    t_surface,
)


def poly_curve(c0, c1, c2, c3=(0, 0, 0), interval=(0.0, 1.0)):
    c0, c1, c2, c3 = (np.asarray(c, float) for c in (c0, c1, c2, c3))
    return Curve(
        lambda u: c0 + c1 * u + c2 * u * u + c3 * u**3,
        lambda u: c1 + 2 * c2 * u + 3 * c3 * u * u,
        lambda u: 2 * c2 + 6 * c3 * u,
        interval,
    )


def scalar(c0, c1=0.0, c2=0.0, interval=(0.0, 1.0)):
    return ScalarCurve(lambda u: c0 + c1 * u + c2 * u * u, lambda u: c1 + 2 * c2 * u, lambda u: 2 * c2, interval)


@pytest.fixture
def patch():
    a = poly_curve((0, 0, 0), (1, 0, 0), (0, 0, 1), (0, 0.1, 0))
    b = poly_curve((0, 0, 0), (0, 1, 0), (0.1, 0, 1))
    return SurfacePatch(a, b, scalar(1.0, 0.2, 0.3))


def test_curve_checks_derivatives():
    with pytest.raises(PreconditionError):
        Curve(lambda u: np.array([u, u * u, 0]), lambda u: np.array([1, u, 0]), lambda u: np.array([0, 2, 0]), (0, 1))
    c = poly_curve((0, 0, 0), (1, 2, 3), (0, 0, 0))
    with pytest.raises(OutOfDomain):
        c(1.5)


def test_spline_curve_uses_spline_derivatives():
    u = np.linspace(0, 2, 21)
    c = Curve.from_samples(u, np.stack([u, np.sin(u), u**2], axis=1))
    assert c.d1(1.0) == pytest.approx([1, np.cos(1.0), 2], abs=1e-3)
    assert c.d2(1.0) == pytest.approx([0, -np.sin(1.0), 2], abs=1e-2)
    s = ScalarCurve.from_samples(u, 1 + u**2)
    assert s(0.5) == pytest.approx(1.25, abs=1e-12)
    assert s.meta["knots"] == 21


def test_adaptive_simpson():
    assert adaptive_simpson(np.exp, 0, 1) == pytest.approx(np.e - 1, abs=1e-10)
    assert adaptive_simpson(np.sin, np.pi, 0) == pytest.approx(-2, abs=1e-10)
    v = adaptive_simpson(lambda x: np.array([x, x * x]), 0, 3)
    assert np.allclose(v, [4.5, 9], atol=1e-10)
    with pytest.raises(QuadratureFailure):
        adaptive_simpson(lambda x: 1 / np.sqrt(abs(x - 0.3)) if x != 0.3 else 0.0, 0, 1, tol=1e-14, max_depth=8)


def test_patch_preconditions():
    a = poly_curve((0, 0, 0), (1, 0, 0), (0, 0, 1))
    b = poly_curve((0, 0, 0), (0, 1, 0), (0, 0, 1))
    with pytest.raises(PreconditionError):
        SurfacePatch(a, b, scalar(-0.5, 1.0))
    with pytest.raises(PreconditionError):
        SurfacePatch(a, a, scalar(1.0))


def test_deform_closed_form():
    # sigma = 1, a = (u, 0, 0): the integrand is a' / 2 at t = 3
    a = poly_curve((0, 0, 0), (1, 0, 0), (0, 0, 0))
    b = poly_curve((0, 0, 0), (0, 1, 0), (0, 0, 1))
    s = SurfacePatch(a, b, scalar(1.0))
    for u, v in ((0.3, 0.8), (1.0, 0.1)):
        assert np.allclose(deform_scale_translational(s, u, v, 3.0), (u / 2, 2 * v, 2 * v * v), atol=1e-12)
    with pytest.raises(OutOfDomain):
        deform_scale_translational(s, -0.1, 0.5, 1.0)


def test_deform_at_zero_is_eval(patch):
    for u, v in ((0.0, 0.0), (0.4, 0.9), (1.0, 1.0)):
        d = deform_scale_translational(patch, u, v, 0.0).array()
        assert np.abs(d - eval_scale_translational(patch, u, v).array()).max() <= 1e-10


def test_paraboloid_T_surface():
    a = poly_curve((0, 0, 0), (1, 0, 0), (0, 0, 1), interval=(-1, 1))
    b = poly_curve((0, 0, 0), (0, 1, 0), (0, 0, 1), interval=(-1, 1))
    s = SurfacePatch(a, b, scalar(1.0, interval=(-1, 1)))
    for u, v in ((0.3, -0.4), (0.9, 0.2)):
        assert np.allclose(eval_T_surface(s, u, v), (2 * u, 2 * v, u * u + v * v), atol=1e-14)
        assert np.allclose(dual_of_surface_point(scale_translational_surface(s), u, v), (2 * u, 2 * v, u * u + v * v), atol=1e-14)


def test_T_surface_top_view_independent_of_t(patch):
    for u, v in ((0.2, 0.7), (0.9, 0.1)):
        tv = eval_T_surface(patch, u, v)[:2]
        for t in (0.5, 1.0, 4.0):
            assert deform_T_surface(patch, u, v, t)[:2] == pytest.approx(tv, abs=1e-12)


def test_duality_recovers_patch(patch):
    f = t_surface(patch)
    for u, v in ((0.3, 0.3), (0.6, 0.8)):
        assert np.allclose(dual_of_surface_point(f, u, v), eval_scale_translational(patch, u, v), atol=1e-8)


def test_degenerate_T_surface():
    # at v = 0 the tangent plane contains e3
    a = poly_curve((0, 0, 0), (1, 0, 0), (0, 0, 0))
    b = poly_curve((0, 0, 0), (0, 0, 1), (0, 1, 0))
    s = SurfacePatch(a, b, scalar(1.0))
    with pytest.raises(DegenerateDeterminant):
        eval_T_surface(s, 0.5, 0.0)


def test_curvature_graphs():
    par = graph_surface(lambda x, y: x * x + y * y, lambda x, y: 2 * x, lambda x, y: 2 * y,
                        lambda x, y: 2.0, lambda x, y: 0.0, lambda x, y: 2.0)
    sad = graph_surface(lambda x, y: x * y, lambda x, y: y, lambda x, y: x,
                        lambda x, y: 0.0, lambda x, y: 1.0, lambda x, y: 0.0)
    for x, y in ((0.1, 0.2), (-3.0, 5.0)):
        assert iso_gauss_curvature(par, x, y) == pytest.approx(4.0, abs=1e-10)
        assert iso_gauss_curvature(sad, x, y) == pytest.approx(-1.0, abs=1e-10)


def test_curvature_parametrization_invariant():
    # same paraboloid via a non-orthogonal reparametrization, finite-difference jet
    s = Surface(lambda u, v: np.array([2 * u + v, v, (2 * u + v) ** 2 + v * v]))
    assert iso_gauss_curvature(s, 0.3, -0.2) == pytest.approx(4.0, abs=1e-6)


def test_curvature_vertical_tangent():
    s = Surface(lambda u, v: np.array([u, 0.0 * v, v]), jet=lambda u, v: (np.array([u, 0, v]), np.array([1, 0, 0]), np.array([0, 0, 1]), np.zeros(3), np.zeros(3), np.zeros(3)))
    with pytest.raises(AdmissibilityFailure):
        iso_gauss_curvature(s, 0, 0)
    with pytest.raises(DegenerateDeterminant):
        dual_of_surface_point(s, 0, 0)


def test_dual_of_plane():
    s = Surface(lambda u, v: np.array([u, v, 2 * u - 3 * v - 0.5]))
    assert np.allclose(dual_of_surface_point(s, 0.4, 1.1), (2, -3, 0.5), atol=1e-9)


@pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
def test_deformation_preserves_curvature(patch, t):
    f0, ft = scale_translational_surface(patch), scale_translational_surface(patch, t)
    for u in np.linspace(0, 1, 9):
        for v in np.linspace(0, 1, 9):
            assert abs(iso_gauss_curvature(ft, u, v) - iso_gauss_curvature(f0, u, v)) <= 1e-6


def test_fd_jet_accuracy():
    f = lambda u, v: np.array([u * v, np.sin(u), np.exp(v)])
    _, fu, fv, fuu, fuv, fvv = fd_jet(f, 0.3, 0.2)
    assert np.allclose(fu, [0.2, np.cos(0.3), 0], atol=1e-9)
    assert np.allclose(fuv, [1, 0, 0], atol=1e-7)
    assert np.allclose(fvv, [0, 0, np.exp(0.2)], atol=1e-6)


def test_sample_plane_exact():
    s = Surface(lambda u, v: np.array([u, v, 0.5 * u - v]), domain=(0, 1, 0, 1))
    assert sample_to_quadnet(s, (4, 4)).displacement < 1e-15


def test_sample_displacement_refinement(patch):
    # the sheared paraboloid is not sampled along conjugate lines, so faces bend at second order
    sheared = Surface(lambda u, v: np.array([u + 0.5 * v, v, (u + 0.5 * v) ** 2 + v * v]), domain=(0, 1, 0, 1))
    d = [sample_to_quadnet(sheared, (N, N)).displacement for N in (8, 16, 32)]
    assert d[0] / d[1] >= 3.5 and d[1] / d[2] >= 3.5
    dt = [sample_to_quadnet(t_surface(patch), (N, N)).displacement for N in (8, 16)]
    assert dt[0] / dt[1] >= 3.5


def test_T_surface_sample_near_class_i(patch):
    res = []
    for N in (4, 8, 16):
        c = classify(sample_to_quadnet(t_surface(patch), (N, N)).net)
        res.append(np.max(c.diagnostics["cols_residuals"]))
    assert res[0] > res[1] > res[2]


def test_continuous_limit_of_T_net(patch):
    errs = []
    for N in (8, 16, 32):
        us = np.linspace(0, 1, N + 2)
        d = ConeCylinderData([patch.a(u) for u in us], [patch.b(v) for v in us], [patch.sigma(u) for u in us])
        F = gen_generalized_T(d).array
        S = np.array([[eval_T_surface(patch, u, v) for v in us[:-1]] for u in us[:-1]])
        errs.append(np.abs(F - S).max())
    assert errs[0] / errs[1] > 1.6 and errs[1] / errs[2] > 1.6
