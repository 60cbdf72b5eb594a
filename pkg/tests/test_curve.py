import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from flatflow2d.anisotropy import Anisotropy, builtin_anisotropies
from flatflow2d.curve import (
    ClosedCurve,
    GraphBreakdown,
    HeightField,
    aniso_curvature,
    aniso_perimeter,
    curvature_expansion,
    direct_aniso_curvature,
    extract_graph,
    frame_of_samples,
    gauss_bonnet,
    graph_aniso_curvature,
    graph_frame,
    hausdorff,
    is_simple,
    lift,
    project,
    pushforward_gradient_check,
    remainder_linear_part,
    tangential_derivative,
    ubc_radius,
)
from flatflow2d.errors import DomainError, OutOfTubeError, ValidationError

from conftest import theta

ALL = builtin_anisotropies()


def ellipse_curvature(a, b, pts):
    t = np.arctan2(pts[:, 1] / b, pts[:, 0] / a)
    return a * b / (a**2 * np.sin(t) ** 2 + b**2 * np.cos(t) ** 2) ** 1.5


def smooth_field(rng, n, amp, modes=5):
    th = theta(n)
    f = sum(rng.normal() * np.cos(k * th) + rng.normal() * np.sin(k * th) for k in range(1, modes + 1))
    return amp * f / np.max(np.abs(f))


# -- construction -----------------------------------------------------------


def test_from_points_circle():
    C = ClosedCurve.from_points(np.stack([np.cos(theta(64)), np.sin(theta(64))], axis=1), 128)
    assert C.length == pytest.approx(2 * np.pi, abs=1e-8)
    assert C.area == pytest.approx(np.pi, abs=1e-8)


def test_from_points_ellipse_tip_curvature():
    t = theta(256)
    C = ClosedCurve.from_points(np.stack([2 * np.cos(t), np.sin(t)], axis=1), 256)
    np.testing.assert_allclose(C.nodes[0], [2.0, 0.0], atol=1e-14)
    assert C.curvature[0] == pytest.approx(2.0, abs=1e-6)


def test_from_points_irregular_input_uses_spline():
    t = np.sort(np.random.default_rng(0).uniform(0, 2 * np.pi, 200))
    C = ClosedCurve.from_points(np.stack([np.cos(t), np.sin(t)], axis=1), 128)
    assert C.area == pytest.approx(np.pi, rel=1e-4)


def test_figure_eight_rejected():
    t = theta(100)
    with pytest.raises(ValidationError):
        ClosedCurve.from_points(np.stack([np.sin(t), np.sin(t) * np.cos(t)], axis=1), 64)


def test_too_few_points_rejected():
    with pytest.raises(DomainError):
        ClosedCurve.from_points(np.eye(2).repeat(2, axis=0)[:5], 64)
    with pytest.raises(DomainError):
        ClosedCurve(np.zeros((8, 2)))


def test_clockwise_input_is_reoriented():
    t = theta(128)[::-1]
    C = ClosedCurve.from_parametric(np.stack([np.cos(t), np.sin(t)], axis=1), 64)
    assert C.area > 0


def test_orientation_conventions():
    C = ClosedCurve.circle(1.0, 64)
    np.testing.assert_allclose(C.normal, C.nodes, atol=1e-13)  # outward
    # tau is the counterclockwise tangent; nu = (tau_y, -tau_x)
    np.testing.assert_allclose(C.normal[:, 0], C.tangent[:, 1], atol=1e-13)
    np.testing.assert_allclose(C.normal[:, 1], -C.tangent[:, 0], atol=1e-13)
    np.testing.assert_allclose(C.curvature, 1.0, atol=1e-12)


def test_uniform_spacing():
    E = ClosedCurve.ellipse(2.0, 1.0, 256)
    gaps = np.hypot(*(np.roll(E.nodes, -1, axis=0) - E.nodes).T)
    # chords differ from arcs by the local sagitta only
    assert np.ptp(gaps) / np.mean(gaps) < 1e-3
    assert E.spacing_defect < 1e-6


def test_spectral_accuracy_of_curvature():
    errs = []
    for n in (64, 128):
        E = ClosedCurve.ellipse(2.0, 1.0, n)
        errs.append(np.max(np.abs(E.curvature - ellipse_curvature(2.0, 1.0, E.nodes))))
    assert errs[0] / errs[1] > 50


def test_json_round_trip(tmp_path):
    E = ClosedCurve.ellipse(1.3, 0.7, 64)
    path = tmp_path / "c.json"
    E.save(path)
    F = ClosedCurve.load(path)
    np.testing.assert_array_equal(E.nodes, F.nodes)


# -- fields -------------------------------------------------------------------


def test_aniso_curvature_examples():
    np.testing.assert_allclose(aniso_curvature(ClosedCurve.circle(2.0, 64), Anisotropy.euclidean()), 0.5, atol=1e-12)
    C = ClosedCurve.circle(1.0, 64)
    assert aniso_curvature(C, ALL["elliptic"])[0] == pytest.approx(0.5, abs=1e-12)


def test_aniso_perimeter_examples():
    C = ClosedCurve.circle(1.0, 256)
    assert aniso_perimeter(C, Anisotropy.euclidean()) == pytest.approx(2 * np.pi, abs=1e-12)
    assert aniso_perimeter(C, ALL["fourier"]) == pytest.approx(2 * np.pi, abs=1e-12)
    t = np.linspace(0, 2 * np.pi, 200001)
    ref = np.trapezoid(np.sqrt(4 * np.cos(t) ** 2 + np.sin(t) ** 2), t)
    assert aniso_perimeter(C, ALL["elliptic"]) == pytest.approx(ref, abs=1e-9)


# golden values: integral of g(nu) phi(nu) over the unit circle, by hand
GAUSS_BONNET = {
    "euclidean": 2 * np.pi,
    "fourier": 2 * np.pi - 15 * np.pi * 0.05**2,
    "elliptic": 4 * np.pi,
}


@pytest.mark.parametrize("kind", sorted(ALL))
def test_gauss_bonnet_constant(kind, rng):
    a = ALL[kind]
    curves = [
        ClosedCurve.circle(1.0, 512),
        ClosedCurve.ellipse(2.0, 1.0, 512),
        ClosedCurve.polar(lambda t: 1 + 0.1 * np.cos(3 * t) + 0.05 * np.sin(5 * t), 512),
    ]
    vals = [gauss_bonnet(c, a) for c in curves]
    assert np.ptp(vals) < 1e-6
    assert vals[0] == pytest.approx(GAUSS_BONNET[kind], abs=1e-9)


def test_tangential_derivative_examples():
    E = ClosedCurve.ellipse(1.5, 0.8, 128)
    s, L = E.arclength, E.length
    f = np.sin(2 * np.pi * s / L)
    np.testing.assert_allclose(tangential_derivative(E, f, 1), (2 * np.pi / L) * np.cos(2 * np.pi * s / L), atol=1e-12)
    for k in range(1, 5):
        np.testing.assert_allclose(tangential_derivative(E, np.full(E.n, 3.0), k), 0.0, atol=1e-12)
    C = ClosedCurve.circle(1.0, 64)
    np.testing.assert_allclose(tangential_derivative(C, C.curvature, 2), 0.0, atol=1e-9)
    with pytest.raises(DomainError):
        tangential_derivative(E, f, 5)


# -- lift, frames, expansion --------------------------------------------------


def test_lift_examples():
    C = ClosedCurve.circle(1.0, 128)
    np.testing.assert_allclose(lift(HeightField(C, np.zeros(128))).nodes, C.nodes, atol=1e-14)
    F = lift(HeightField(C, np.full(128, 0.1)))
    np.testing.assert_allclose(np.hypot(*F.nodes.T), 1.1, atol=1e-13)
    assert F.area - C.area == pytest.approx(2 * np.pi * 0.105, abs=1e-12)


def test_lift_rejects_heights_outside_tube():
    C = ClosedCurve.circle(1.0, 64)
    with pytest.raises(DomainError):
        HeightField(C, np.full(64, 0.5))


@given(st.integers(0, 10**6))
def test_lift_area_identity(seed):
    rng = np.random.default_rng(seed)
    E = ClosedCurve.ellipse(1.2, 1 / 1.2, 256)
    psi = smooth_field(rng, 256, 0.05)
    F = lift(HeightField(E, psi))
    assert abs((F.area - E.area) - E.integrate(psi + 0.5 * E.curvature * psi**2)) < 1e-10


def test_graph_frame_examples():
    C = ClosedCurve.circle(2.0, 128)
    tau, nu, J = graph_frame(HeightField(C, np.zeros(128)))
    np.testing.assert_allclose(tau, C.tangent, atol=1e-14)
    np.testing.assert_allclose(nu, C.normal, atol=1e-14)
    np.testing.assert_allclose(J, 1.0, atol=1e-14)
    tau, nu, J = graph_frame(HeightField(C, np.full(128, 0.3)))
    np.testing.assert_allclose(nu, C.normal, atol=1e-13)
    np.testing.assert_allclose(J, 1.15, atol=1e-13)


def test_graph_frame_matches_direct_frames():
    C = ClosedCurve.circle(1.0, 256)
    hf = HeightField(C, 0.05 * np.cos(3 * C.arclength))
    tau, nu, _ = graph_frame(hf)
    tau_d, nu_d, _, _ = frame_of_samples(hf.points())
    np.testing.assert_allclose(tau, tau_d, atol=1e-8)
    np.testing.assert_allclose(nu, nu_d, atol=1e-8)


def test_curvature_expansion_trivial_cases():
    E = ClosedCurve.ellipse(1.2, 0.8, 128)
    for a in ALL.values():
        k, R = curvature_expansion(HeightField(E, np.zeros(128)), a)
        np.testing.assert_allclose(k, aniso_curvature(E, a), atol=1e-12)
        np.testing.assert_allclose(R, 0.0, atol=1e-10)
    C = ClosedCurve.circle(1.0, 128)
    k, _ = curvature_expansion(HeightField(C, np.full(128, 0.2)), Anisotropy.euclidean())
    np.testing.assert_allclose(k, 1 / 1.2, atol=1e-10)


@pytest.mark.parametrize("kind", sorted(ALL))
def test_curvature_formula_matches_direct_differentiation(kind, rng):
    a = ALL[kind]
    E = ClosedCurve.ellipse(1.2, 1 / 1.2, 256)
    hf = HeightField(E, smooth_field(rng, 256, 0.03))
    np.testing.assert_allclose(graph_aniso_curvature(hf, a), direct_aniso_curvature(hf, a), atol=1e-8)


@pytest.mark.parametrize("kind", sorted(ALL))
def test_remainder_is_linear_part_plus_quadratic(kind, rng):
    # the expansion remainder is first order in psi; removing its exact
    # linearization leaves a quadratic term
    a = ALL[kind]
    E = ClosedCurve.ellipse(1.2, 1 / 1.2, 256)
    psi = smooth_field(rng, 256, 0.02, modes=4)
    R = [curvature_expansion(HeightField(E, psi / 2**j), a)[1] for j in range(2)]
    Q = [r - remainder_linear_part(E, a, psi / 2**j) for j, r in enumerate(R)]
    ratio_R = np.max(np.abs(R[0])) / np.max(np.abs(R[1]))
    ratio_Q = np.max(np.abs(Q[0])) / np.max(np.abs(Q[1]))
    assert 1.8 < ratio_R < 2.3
    assert ratio_Q > 3.5


# -- projection, graphs, tube ---------------------------------------------------


def test_project_examples():
    C = ClosedCurve.circle(1.0, 128)
    foot, d = project(C, [1.2, 0.0])
    np.testing.assert_allclose(foot, [1.0, 0.0], atol=1e-12)
    assert d == pytest.approx(0.2, abs=1e-12)
    assert project(C, [0.9, 0.0])[1] == pytest.approx(-0.1, abs=1e-12)
    with pytest.raises(OutOfTubeError):
        project(C, [1.5, 0.0])


@given(st.floats(0, 2 * np.pi), st.floats(-0.2, 0.2))
def test_projection_identity(t, r):
    E = ClosedCurve.ellipse(1.2, 1 / 1.2, 256)
    x = np.array([1.2 * np.cos(t), np.sin(t) / 1.2])
    nrm = np.array([np.cos(t) / 1.2, 1.2 * np.sin(t)])
    x = x + r * E.sigma * nrm / np.linalg.norm(nrm)
    foot, d = project(E, x)
    # the outward normal at the foot is the gradient of the implicit equation
    nu = np.array([foot[0] / 1.2**2, foot[1] * 1.2**2])
    nu = nu / np.linalg.norm(nu)
    np.testing.assert_allclose(x, foot + d * nu, atol=1e-9)
    assert d == pytest.approx(r * E.sigma, abs=1e-9)


@given(st.integers(0, 10**6))
def test_extract_graph_inverts_lift(seed):
    rng = np.random.default_rng(seed)
    E = ClosedCurve.ellipse(1.2, 1 / 1.2, 256)
    psi = smooth_field(rng, 256, 0.4 * E.sigma)
    hf = extract_graph(E, lift(HeightField(E, psi)))
    assert hf
    np.testing.assert_allclose(hf.values, psi, atol=1e-8)


def test_extract_graph_examples():
    C = ClosedCurve.circle(1.0, 128)
    hf = extract_graph(C, ClosedCurve.circle(1.1, 128))
    np.testing.assert_allclose(hf.values, 0.1, atol=1e-12)
    far = ClosedCurve(C.nodes + np.array([3 * C.sigma, 0.0]))
    out = extract_graph(C, far)
    assert isinstance(out, GraphBreakdown) and not out


def test_pushforward_gradient_identity(rng):
    C = ClosedCurve.circle(1.0, 256)
    g = lambda p: p[:, 0] / np.hypot(p[:, 0], p[:, 1])  # noqa: E731
    lhs, rhs = pushforward_gradient_check(HeightField(C, np.zeros(256)), g)
    assert lhs == pytest.approx(rhs, rel=1e-12)
    c = 0.2
    lhs, rhs = pushforward_gradient_check(HeightField(C, np.full(256, c)), g)
    assert lhs == pytest.approx(np.pi / (1 + c), rel=1e-10)
    assert rhs == pytest.approx(np.pi / (1 + c), rel=1e-10)
    E = ClosedCurve.ellipse(1.2, 1 / 1.2, 256)
    hf = HeightField(E, smooth_field(rng, 256, 0.05))
    g = lambda p: np.sin(p[:, 0]) + p[:, 1] ** 2  # noqa: E731
    lhs, rhs = pushforward_gradient_check(hf, g)
    assert abs(lhs - rhs) < 1e-8 * lhs


def test_ubc_radius_examples():
    assert ubc_radius(ClosedCurve.circle(0.7, 128)) == pytest.approx(0.7, rel=1e-9)
    assert ubc_radius(ClosedCurve.ellipse(2.0, 1.0, 256)) <= 0.5 + 1e-9
    t = theta(4096)
    dumbbell = np.stack([2 * np.cos(t), np.sin(t) * (0.05 + 0.95 * np.cos(t) ** 2)], axis=1)
    D = ClosedCurve.from_parametric(dumbbell, 512)
    assert ubc_radius(D) <= 0.05 + 1e-9


def test_self_intersection_detection():
    t = theta(200)
    assert not is_simple(np.stack([np.sin(t), np.sin(t) * np.cos(t)], axis=1))
    assert is_simple(ClosedCurve.circle(1.0, 64).nodes)


def test_hausdorff_of_concentric_circles():
    assert hausdorff(ClosedCurve.circle(1.0, 64), ClosedCurve.circle(1.01, 96)) == pytest.approx(0.01, abs=1e-12)
    C = ClosedCurve.circle(1.0, 64)
    assert hausdorff(C, C) == 0.0
