"""Negative-Sobolev distance between nearby shapes.

For a curve ``F`` in the tube of ``E`` the mass discrepancy ``xi`` is the signed
area between the two boundaries along each normal fibre of ``E``.  When the
areas agree, ``xi`` has zero mean and the distance is ``|d v/ds|_{L^2}`` where
``-v'' = xi`` on ``E``.
"""

from dataclasses import dataclass

import numpy as np

from . import spectral
from .curve import ClosedCurve, _project_many, extract_graph
from .errors import DomainError, InfiniteDistanceError

MEAN_ZERO_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class MassDiscrepancy:
    reference: ClosedCurve
    xi: np.ndarray

    @property
    def total(self):
        """Integral of xi, equal to the area difference |F| - |E|."""
        return self.reference.integrate(self.xi)


def xi_graph(hf):
    """xi = psi + kappa psi^2 / 2 for a normal graph."""
    E = hf.reference
    return MassDiscrepancy(E, hf.values + 0.5 * E.curvature * hf.values**2)


def _inside_polygon(points, poly):
    """Even-odd rule, vectorized over points."""
    x, y = points[:, 0:1], points[:, 1:2]
    px, py = poly[:, 0][None, :], poly[:, 1][None, :]
    qx, qy = np.roll(poly[:, 0], -1)[None, :], np.roll(poly[:, 1], -1)[None, :]
    straddle = (py > y) != (qy > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        x_cross = px + (y - py) * (qx - px) / (qy - py)
    return np.sum(straddle & (x < x_cross), axis=1) % 2 == 1


def xi_scan(E, F, sigma, upsample=8):
    """Mass discrepancy by scanning each normal fibre of E through F.

    The crossings of the fibre ``x + t nu`` (``|t| <= sigma``) with the boundary
    of F are located on a refined polygon and polished by Newton's method on
    F's interpolant; the weight ``1 + t kappa`` is then integrated exactly
    between consecutive crossings.
    """
    if sigma <= 0 or sigma >= E.sigma * (1 + 1e-12):
        raise DomainError(f"scan half-width must lie in (0, {E.sigma:.4g}]")
    _, d = _project_many(E, F.nodes)
    if np.max(np.abs(d)) >= sigma:
        raise DomainError("F leaves the scanned tube around E")
    x0, nu, kappa = E.nodes, E.normal, E.curvature
    poly = F.upsample(upsample)
    m = len(poly)
    u_grid = 2 * np.pi * np.arange(m) / m
    # fibre endpoints must agree with E: inside at -sigma, outside at +sigma
    if not np.all(_inside_polygon(x0 - sigma * nu, poly)):
        raise DomainError("F does not contain the inner edge of the tube")
    if np.any(_inside_polygon(x0 + sigma * nu, poly)):
        raise DomainError("F reaches the outer edge of the tube")

    rel = poly[None, :, :] - x0[:, None, :]
    side = rel[..., 0] * nu[:, None, 1] - rel[..., 1] * nu[:, None, 0]
    along = rel[..., 0] * nu[:, None, 0] + rel[..., 1] * nu[:, None, 1]
    side_next = np.roll(side, -1, axis=1)
    along_next = np.roll(along, -1, axis=1)
    # half-open rule so a vertex lying on the fibre is counted once
    crosses = (side > 0) != (side_next > 0)
    frac = np.where(crosses, side / np.where(crosses, side - side_next, 1.0), 0.0)
    t_cross = along + frac * (along_next - along)
    crosses &= np.abs(t_cross) < sigma

    xi = np.zeros(E.n)
    rows, cols = np.nonzero(crosses)
    u = u_grid[cols] + frac[rows, cols] * (2 * np.pi / m)
    xr, nr = x0[rows], nu[rows]
    for _ in range(30):
        y, y1 = F.evaluate(u, orders=(0, 1))
        r = y - xr
        f = r[:, 0] * nr[:, 1] - r[:, 1] * nr[:, 0]
        fp = y1[:, 0] * nr[:, 1] - y1[:, 1] * nr[:, 0]
        step = f / fp
        u = u - step
        if len(step) == 0 or np.max(np.abs(step)) < 1e-15:
            break
    t_exact = np.einsum("ij,ij->i", F.evaluate(u)[0] - xr, nr)

    def weight(a, b, k):
        return (b - a) + 0.5 * k * (b * b - a * a)

    for i in range(E.n):
        ts = np.sort(t_exact[rows == i])
        if len(ts) % 2 == 0:
            raise DomainError(f"fibre {i} crosses F an even number of times")
        # chi_F = 1 on [-sigma, ts[0]], then alternates; chi_E = 1 on [-sigma, 0]
        k = kappa[i]
        edges = np.concatenate([[-sigma], ts])
        inside_F = sum(weight(edges[j], edges[j + 1], k) for j in range(0, len(edges) - 1, 2))
        xi[i] = inside_F - weight(-sigma, 0.0, k)
    return MassDiscrepancy(E, xi)


def _check_mean_zero(E, xi):
    total = E.integrate(xi)
    scale = MEAN_ZERO_TOL * E.length * max(float(np.max(np.abs(xi))), np.finfo(float).tiny)
    if abs(total) >= scale and np.any(xi != 0):
        raise InfiniteDistanceError(
            f"enclosed areas differ (integral of xi = {total:.3e}); the distance is infinite"
        )


def solve_mean_zero_poisson(E, xi):
    """Mean-zero v with -v'' = xi on E."""
    xi = np.asarray(xi, dtype=float)
    _check_mean_zero(E, xi)
    return spectral.inverse_laplacian(xi, E.length)


@dataclass(frozen=True, eq=False)
class HminusDistance:
    """Distance ``d``, potential ``v`` and unit maximizer ``f = v/d``.

    Unpacks as ``(d, f)``.
    """

    d: float
    f: np.ndarray
    v: np.ndarray
    degenerate: bool

    def __iter__(self):
        return iter((self.d, self.f))


def dist(E, xi):
    if isinstance(xi, MassDiscrepancy):
        xi = xi.xi
    v = solve_mean_zero_poisson(E, xi)
    d = float(np.sqrt(E.integrate(E.d_ds(v, 1) ** 2)))
    if d == 0.0 or not np.any(xi):
        return HminusDistance(0.0, np.zeros(E.n), v, True)
    return HminusDistance(d, v / d, v, False)


def distance_between(E, F):
    """Distance of F from E, reading F as a graph over E when possible."""
    hf = extract_graph(E, F)
    if hf:
        return dist(E, xi_graph(hf))
    return dist(E, xi_scan(E, F, E.sigma))


def flow_points(points, X, t, substeps=4):
    """Integrate dx/dt = X(x) for time ``t`` with classical Runge-Kutta."""
    x = np.asarray(points, dtype=float)
    dt = t / substeps
    for _ in range(substeps):
        k1 = X(x)
        k2 = X(x + 0.5 * dt * k1)
        k3 = X(x + 0.5 * dt * k2)
        k4 = X(x + dt * k3)
        x = x + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return x


def _check_divergence_free(X, points, eps=1e-5):
    """Reject fields whose central-difference divergence is visibly nonzero."""
    ex, ey = np.array([eps, 0.0]), np.array([0.0, eps])
    div = (X(points + ex)[:, 0] - X(points - ex)[:, 0] + X(points + ey)[:, 1] - X(points - ey)[:, 1]) / (2 * eps)
    scale = max(float(np.max(np.abs(X(points)))), 1.0)
    if np.max(np.abs(div)) > 1e-6 * scale:
        raise DomainError("the first-variation formula holds for divergence-free fields only")


def first_variation_check(E, F, X, t=1e-4):
    """Analytic and finite-difference derivative of d(Phi_t(F), E) at t = 0.

    ``X`` is a divergence-free vector field given as a callable on ``(m, 2)``
    arrays.  The analytic value is the boundary integral over F of the
    maximizer (pulled back by projection onto E) against ``X . nu_F``.
    """
    _check_divergence_free(X, F.nodes)
    res = distance_between(E, F)
    if res.degenerate:
        raise DomainError("F coincides with E; the distance has no derivative")
    t_foot, _ = _project_many(E, F.nodes)
    f_on_F = spectral.evaluate(res.f, t_foot)
    analytic = F.integrate(f_on_F * np.einsum("ij,ij->i", X(F.nodes), F.normal))

    def d_at(s):
        moved = ClosedCurve.from_parametric(flow_points(F.nodes, X, s), F.n)
        return distance_between(E, moved).d

    numeric = (d_at(t) - d_at(-t)) / (2 * t)
    return float(analytic), float(numeric)
