import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flatflow2d.curve import ClosedCurve, HeightField, lift
from flatflow2d.errors import DomainError, InfiniteDistanceError
from flatflow2d.hminus import (
    dist,
    distance_between,
    first_variation_check,
    solve_mean_zero_poisson,
    xi_graph,
    xi_scan,
)
from flatflow2d.step import area_shift
from flatflow2d.verify import random_solenoidal_field

from conftest import theta


def smooth_graph(rng, E, amp, modes=5):
    th = theta(E.n)
    f = sum(rng.normal() * np.cos(k * th) + rng.normal() * np.sin(k * th) for k in range(1, modes + 1))
    return HeightField(E, amp * f / np.max(np.abs(f)))


def smooth_field(rng, E, modes=5):
    th = theta(E.n)
    xi = sum(rng.normal() * np.cos(k * th) + rng.normal() * np.sin(k * th) for k in range(1, modes + 1))
    return xi - E.integrate(xi) / E.length


def test_xi_graph_examples():
    C = ClosedCurve.circle(1.0, 64)
    np.testing.assert_array_equal(xi_graph(HeightField(C, np.zeros(64))).xi, 0.0)
    np.testing.assert_allclose(xi_graph(HeightField(C, np.full(64, 0.1))).xi, 0.105, atol=1e-15)


def test_xi_total_is_area_difference(rng):
    E = ClosedCurve.ellipse(1.2, 0.8, 256)
    hf = smooth_graph(rng, E, 0.05)
    assert xi_graph(hf).total == pytest.approx(lift(hf).area - E.area, abs=1e-10)


def test_xi_scan_examples():
    C = ClosedCurve.circle(1.0, 128)
    np.testing.assert_allclose(xi_scan(C, C, 0.3).xi, 0.0, atol=1e-14)
    np.testing.assert_allclose(xi_scan(C, ClosedCurve.circle(1.1, 128), 0.3).xi, 0.105, atol=1e-12)


def test_xi_scan_tube_violation():
    C = ClosedCurve.circle(1.0, 64)
    with pytest.raises(DomainError):
        xi_scan(C, ClosedCurve.circle(1.4, 64), 0.3)
    with pytest.raises(DomainError):
        xi_scan(C, C, 2.0)


@settings(max_examples=100)
@given(st.integers(0, 10**6))
def test_xi_scan_matches_graph_formula(seed):
    rng = np.random.default_rng(seed)
    E = ClosedCurve.ellipse(1.2, 1 / 1.2, 128)
    hf = smooth_graph(rng, E, 0.3 * E.sigma)
    F = lift(hf)
    assert np.max(np.abs(xi_scan(E, F, E.sigma).xi - xi_graph(hf).xi)) < 1e-6


def test_poisson_examples():
    C = ClosedCurve.circle(1.0, 128)
    th = theta(128)
    for k in (1, 3, 7):
        np.testing.assert_allclose(solve_mean_zero_poisson(C, np.cos(k * th)), np.cos(k * th) / k**2, atol=1e-13)
    np.testing.assert_array_equal(solve_mean_zero_poisson(C, np.zeros(128)), 0.0)
    with pytest.raises(InfiniteDistanceError):
        solve_mean_zero_poisson(C, np.ones(128))


def test_poisson_residual(rng):
    E = ClosedCurve.ellipse(1.5, 0.7, 256)
    xi = smooth_field(rng, E)
    v = solve_mean_zero_poisson(E, xi)
    assert np.max(np.abs(E.d_ds(v, 2) + xi)) < 1e-9 * np.max(np.abs(xi))
    assert abs(E.integrate(v)) < 1e-12


def test_dist_examples():
    C = ClosedCurve.circle(1.0, 256)
    th = theta(256)
    for k in range(1, 9):
        res = dist(C, np.cos(k * th))
        assert res.d == pytest.approx(np.sqrt(np.pi) / k, rel=1e-12)
        assert C.integrate(C.d_ds(res.f, 1) ** 2) == pytest.approx(1.0, rel=1e-12)
        assert not res.degenerate
    res = dist(C, np.zeros(256))
    assert res.d == 0.0 and res.degenerate
    np.testing.assert_array_equal(res.f, 0.0)
    d, f = dist(C, np.cos(th))
    assert d == pytest.approx(np.sqrt(np.pi))


@given(st.floats(1e-3, 1e3), st.integers(0, 10**6))
def test_dist_scales_linearly(lam, seed):
    rng = np.random.default_rng(seed)
    E = ClosedCurve.ellipse(1.3, 0.9, 128)
    xi = smooth_field(rng, E)
    assert dist(E, lam * xi).d == pytest.approx(lam * dist(E, xi).d, rel=1e-12)


@given(st.integers(0, 10**6))
def test_dist_spectral_decomposition(seed):
    rng = np.random.default_rng(seed)
    C = ClosedCurve.circle(1.0, 256)
    th = theta(256)
    c, s = rng.normal(size=(2, 20))
    k = np.arange(1, 21)
    xi = sum(c[j] * np.cos(k[j] * th) + s[j] * np.sin(k[j] * th) for j in range(20))
    assert dist(C, xi).d ** 2 == pytest.approx(np.pi * np.sum((c**2 + s**2) / k**2), rel=1e-10)


def test_distance_between_graph_and_scan_paths(rng):
    E = ClosedCurve.circle(1.0, 128)
    psi = 0.05 * np.cos(2 * theta(128))
    F = lift(HeightField(E, psi + area_shift(E, psi)))
    d_graph = distance_between(E, F).d
    d_scan = dist(E, xi_scan(E, F, E.sigma)).d
    assert d_graph == pytest.approx(d_scan, rel=1e-6)


def _matched_graph(E, shape):
    return lift(HeightField(E, shape + area_shift(E, shape)))


def test_first_variation_trivial_field():
    E = ClosedCurve.circle(1.0, 128)
    F = _matched_graph(E, 0.05 * np.cos(2 * theta(128)))
    an, fd = first_variation_check(E, F, lambda p: np.zeros_like(p))
    assert an == pytest.approx(0.0, abs=1e-14)
    assert fd == pytest.approx(0.0, abs=1e-10)


@pytest.mark.parametrize(
    "field",
    [
        lambda p: np.stack([-p[:, 1], p[:, 0]], axis=1),  # rotation
        lambda p: np.stack([p[:, 0], -p[:, 1]], axis=1),  # (d_y H, -d_x H) for H = xy
    ],
    ids=["rotation", "hyperbolic"],
)
def test_first_variation_examples(field):
    E = ClosedCurve.circle(1.0, 128)
    F = _matched_graph(E, 0.05 * np.cos(2 * theta(128)))
    an, fd = first_variation_check(E, F, field)
    # rotation moves F along a symmetry of the circle, so both values vanish
    assert abs(an - fd) < 1e-3 * max(abs(an), abs(fd)) + 1e-9


@pytest.mark.slow
def test_first_variation_random_fields(rng):
    E = ClosedCurve.circle(1.0, 128)
    th = theta(128)
    F = _matched_graph(E, 0.05 * np.cos(2 * th) + 0.03 * np.sin(3 * th))
    for _ in range(10):
        an, fd = first_variation_check(E, F, random_solenoidal_field(rng))
        assert abs(an - fd) < 1e-3 * max(abs(an), abs(fd))


def test_first_variation_rejects_compressible_field():
    E = ClosedCurve.circle(1.0, 64)
    F = _matched_graph(E, 0.05 * np.cos(2 * theta(64)))
    with pytest.raises(DomainError):
        first_variation_check(E, F, lambda p: p)


def test_first_variation_degenerate():
    E = ClosedCurve.circle(1.0, 64)
    with pytest.raises(DomainError):
        first_variation_check(E, E, lambda p: np.stack([-p[:, 1], p[:, 0]], axis=1))
