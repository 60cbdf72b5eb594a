"""One step of the constrained minimizing-movement scheme.

Given the current curve ``E`` the next curve is the normal graph ``x + psi nu``
over ``E`` minimizing

    Phi(psi) = P_phi(F) + bulk(F) + d(F, E)^2 / (2 h),   |psi| <= beta,

among graphs enclosing the same area.  Two backends are provided: direct
minimization (``minimize``) and a fixed-point iteration on the
Euler-Lagrange equation (``el-fixed-point``).

Area is kept exactly by writing ``psi = eta + c(eta)`` with ``eta`` of zero
mean and ``c`` the root of the quadratic that makes ``int xi = 0``.
"""

from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg

from . import spectral
from .anisotropy import Anisotropy
from .curve import ClosedCurve, HeightField, aniso_curvature, aniso_perimeter, curvature_expansion, graph_aniso_curvature, graph_frame, is_simple, lift
from .elasticity import BulkEnergyModel, analytic_energy_of_points, energy as bulk_energy, region_integral_gradient
from .errors import BackendFailure, DomainError, GraphBreakdownError, NonConvergenceError, StepFailure, ValidationError
from .optim import lbfgs


@dataclass(frozen=True)
class StepConfig:
    """Parameters of a single step.

    ``tol`` is the stopping tolerance on the reduced gradient density (the
    Euler-Lagrange defect per unit length); ``fp_tol`` the sup-norm increment
    tolerance of the fixed-point backend.
    """

    h: float
    beta: float
    anisotropy: Anisotropy = field(default_factory=Anisotropy.euclidean)
    bulk: BulkEnergyModel = field(default_factory=BulkEnergyModel.none)
    backend: str = "minimize"
    tol: float = 1e-9
    max_iter: int = 500
    fp_tol: float = 1e-11
    fp_max_iter: int = 200
    outer_tol: float = 1e-7
    max_outer: int = 12

    def __post_init__(self):
        if not self.h > 0:
            raise ValidationError("h must be positive")
        if not self.beta > 0:
            raise ValidationError("beta must be positive")
        if self.backend not in ("minimize", "el-fixed-point"):
            raise ValidationError(f"unknown backend {self.backend!r}")
        if self.tol <= 0 or self.max_iter < 1:
            raise ValidationError("optimizer tolerances must be positive")


@dataclass(frozen=True, eq=False)
class StepResult:
    F: ClosedCurve
    psi: HeightField
    d: float
    lagrange_L: float
    el_residual_norm: float
    energies: tuple
    constraint_margin: float
    iteration_quantity: float
    iterations: int
    converged: bool
    box_active: bool
    backend: str
    xi: np.ndarray
    v: np.ndarray
    area_drift: float

    @property
    def F_total(self):
        return float(sum(self.energies))


# ---------------------------------------------------------------------------
# area constraint


def area_shift(E, eta):
    """Constant c such that psi = eta + c has int xi = 0 exactly.

    Solves ``A c^2 + B c + C = 0`` for the root continuous at eta = 0.
    """
    k = E.curvature
    A = 0.5 * np.sum(k)
    B = E.n + np.sum(k * eta)
    C = np.sum(eta) + 0.5 * np.sum(k * eta**2)
    disc = B * B - 4 * A * C
    if disc < 0:
        raise StepFailure("no height shift restores the enclosed area")
    return float(-2 * C / (B + np.copysign(np.sqrt(disc), B)))


def constant_offset_for_area(F, target_area):
    """Normal offset delta with area(F + delta nu) = target (uses int kappa = 2 pi)."""
    a, b, c = np.pi, F.length, F.area - target_area
    disc = b * b - 4 * a * c
    return float(-2 * c / (b + np.sqrt(disc)))


def _restore_area(F, target_area, n):
    for _ in range(3):
        delta = constant_offset_for_area(F, target_area)
        if abs(delta) < 1e-15 * F.length:
            break
        F = ClosedCurve.from_parametric(F.nodes + delta * F.normal, n)
    return F


def band_limit(v):
    """Remove the Nyquist mode.

    Odd spectral derivatives vanish on it, so the perimeter is linear in its
    amplitude and the step objective would have no stiffness there.
    """
    n = len(v)
    if n % 2:
        return v
    alt = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    return v - alt * (v @ alt) / n


# ---------------------------------------------------------------------------
# the objective


class StepObjective:
    """Phi and its gradient with respect to the nodal heights."""

    def __init__(self, E, cfg, frozen_bulk=None):
        self.E = E
        self.cfg = cfg
        self.a = cfg.anisotropy
        self.ds = E.ds
        self.k = E.curvature
        self.frozen_bulk = frozen_bulk
        self._precond = self._second_variation_solver(E, cfg)

    def _second_variation_solver(self, E, cfg):
        """Cholesky factor of the second variation of Phi at psi = 0.

        ``ds (D^T g D + L^+ / h)`` with ``L^+`` the mean-zero inverse of ``-d^2/ds^2``;
        the mean and Nyquist directions (not searched) are filled by the identity.
        """
        n, ds = E.n, E.ds
        D = spectral.derivative_matrix(n, 1, E.length)
        g = self.a.mobility_g(E.normal)
        Linv = np.ascontiguousarray(spectral.inverse_laplacian(np.eye(n), E.length))
        H = ds * (D.T @ (g[:, None] * D) + Linv / cfg.h)
        H = 0.5 * (H + H.T)
        null = [np.full(n, 1.0 / np.sqrt(n))]
        if n % 2 == 0:
            null.append(np.where(np.arange(n) % 2 == 0, 1.0, -1.0) / np.sqrt(n))
        for z in null:
            H += ds * np.outer(z, z) * float(np.max(np.diag(H)))
        return scipy.linalg.cho_factor(H)

    # psi from the free variable
    def psi_of(self, eta):
        return eta + area_shift(self.E, eta)

    def precondition(self, r):
        return self.project(scipy.linalg.cho_solve(self._precond, self.project(r)))

    @staticmethod
    def project(v):
        return band_limit(v - np.mean(v))

    def parts(self, psi):
        """Energy terms and the full gradient dPhi/dpsi."""
        E, a, ds, k, h = self.E, self.a, self.ds, self.k, self.cfg.h
        w = 1.0 + k * psi
        dpsi = E.d_ds(psi, 1)
        N = w[:, None] * E.normal - dpsi[:, None] * E.tangent
        grad_phi = a.gradient(N)
        P = ds * float(np.sum(a.eval(N)))
        A = np.einsum("ij,ij->i", grad_phi, E.normal)
        Bt = np.einsum("ij,ij->i", grad_phi, E.tangent)
        gP = ds * (k * A + E.d_ds(Bt, 1))
        xi = psi + 0.5 * k * psi**2
        v = spectral.inverse_laplacian(xi, E.length)
        D = ds * float(np.sum(xi * v))
        gD = ds * v * w / h
        Eb, gB, q = self._bulk(psi, w)
        return {
            "P": P,
            "bulk": Eb,
            "D": D,
            "value": P + Eb + D / (2 * h),
            "grad": gP + gB + gD,
            "w": w,
            "xi": xi,
            "v": v,
            "q": q,
        }

    def _bulk(self, psi, w):
        model = self.cfg.bulk
        if model.kind == "none":
            return 0.0, np.zeros_like(psi), np.zeros_like(psi)
        pts = self.E.nodes + psi[:, None] * self.E.normal
        if model.kind == "analytic":
            q = model.q(pts[:, 0], pts[:, 1])
            grad = -np.einsum("ij,ij->i", region_integral_gradient(model.q, pts), self.E.normal)
            return analytic_energy_of_points(model, pts), grad, q
        # fem: linear model frozen at the last outer iterate
        e0, q0, psi0, w0 = self.frozen_bulk
        g = -self.ds * q0 * w0
        return e0 + float(g @ (psi - psi0)), g, q0

    def reduced(self, psi, grad, w):
        lam = np.sum(grad) / np.sum(w)
        r = grad - lam * w
        return self.project(r), lam

    def __call__(self, eta):
        psi = self.psi_of(eta)
        p = self.parts(psi)
        r, _ = self.reduced(psi, p["grad"], p["w"])
        return p["value"], r


def fem_state(model, E, psi):
    """Elastic energy and boundary density with the void bounded by the lifted nodes."""
    pts = E.nodes + psi[:, None] * E.normal
    sol = model.cached_solution(ClosedCurve(pts))
    return sol.energy, sol.boundary_q


# ---------------------------------------------------------------------------
# backends


def _check_incoming(E, cfg):
    if cfg.beta >= E.sigma:
        raise StepFailure(
            f"beta = {cfg.beta:.4g} is not below the tube half-width {E.sigma:.4g} of the current curve"
        )


def _run_inner(obj, eta0, cfg):
    beta = cfg.beta

    def feasible(eta):
        try:
            return float(np.max(np.abs(obj.psi_of(eta)))) <= beta
        except StepFailure:
            return False

    return lbfgs(
        obj,
        eta0,
        precondition=obj.precondition,
        project=obj.project,
        feasible=feasible,
        grad_norm=lambda r: float(np.max(np.abs(r))) / obj.ds,
        tol=cfg.tol,
        max_iter=cfg.max_iter,
    )


def minimize_step(E, cfg):
    """Minimize Phi over area-preserving graphs in the beta box, starting from psi = 0."""
    _check_incoming(E, cfg)
    if cfg.bulk.kind != "fem":
        obj = StepObjective(E, cfg)
        res = _run_inner(obj, np.zeros(E.n), cfg)
        psi = obj.psi_of(res.x)
        result = _finalize(E, cfg, psi, res.iterations, res.converged, res.boundary_hits > 0)
        if not res.converged:
            raise NonConvergenceError(
                f"step optimizer stopped ({res.message}) with gradient {res.grad_norm:.3e}", best=result
            )
        return result
    return _minimize_fem(E, cfg)


def _minimize_fem(E, cfg):
    """Outer loop: freeze the elastic gradient, minimize, re-solve, keep only decreasing iterates."""
    model = cfg.bulk
    psi = np.zeros(E.n)
    eta = np.zeros(E.n)
    e0, q0 = fem_state(model, E, psi)
    base = StepObjective(E, cfg, frozen_bulk=(e0, q0, psi, 1.0 + E.curvature * psi))
    p = base.parts(psi)
    phi_cur = p["P"] + e0 + p["D"] / (2 * cfg.h)
    total_iter = 0
    converged = False
    hits = 0
    for _ in range(cfg.max_outer):
        e_m, q_m = fem_state(model, E, psi)
        obj = StepObjective(E, cfg, frozen_bulk=(e_m, q_m, psi.copy(), 1.0 + E.curvature * psi))
        res = _run_inner(obj, eta, cfg)
        total_iter += res.iterations
        hits += res.boundary_hits
        # monotone safeguard on the true objective
        alpha = 1.0
        while alpha > 1e-4:
            eta_try = eta + alpha * (res.x - eta)
            psi_try = obj.psi_of(eta_try)
            e_try, _ = fem_state(model, E, psi_try)
            pt = obj.parts(psi_try)
            phi_try = pt["P"] + e_try + pt["D"] / (2 * cfg.h)
            if phi_try <= phi_cur:
                break
            alpha *= 0.5
        else:
            converged = True
            break
        change = float(np.max(np.abs(psi_try - psi)))
        eta, psi, phi_cur = eta_try, psi_try, phi_try
        if change < cfg.outer_tol:
            converged = True
            break
    return _finalize(E, cfg, psi, total_iter, converged, hits > 0)


def el_fixed_point_step(E, cfg):
    """Fixed-point iteration on the single Euler-Lagrange equation for psi.

    Each iterate solves ``(I/h + D^2 g D^2) psi = D^2 k_phi - D^2 Q + D^2 R - kappa psi^2/(2h)``
    with the right side frozen at the previous iterate, then shifts psi by the
    constant that restores the enclosed area.
    """
    _check_incoming(E, cfg)
    a, h, n = cfg.anisotropy, cfg.h, E.n
    D2 = spectral.derivative_matrix(n, 2, E.length)
    g = a.mobility_g(E.normal)
    M = np.eye(n) / h + D2 @ (g[:, None] * D2)
    lu = scipy.linalg.lu_factor(M)
    kphi_E = aniso_curvature(E, a)
    base = D2 @ kphi_E
    psi = np.zeros(n)
    diffs = []
    converged = False
    it = 0
    for it in range(1, cfg.fp_max_iter + 1):
        hf = HeightField(E, psi) if np.max(np.abs(psi)) < E.sigma else None
        if hf is None:
            raise BackendFailure("fixed-point iterate left the tube; use the minimize backend")
        _, R = curvature_expansion(hf, a)
        Q = _bulk_trace(cfg.bulk, E, psi)
        rhs = base - D2 @ Q + D2 @ R - E.curvature * psi**2 / (2 * h)
        new = band_limit(scipy.linalg.lu_solve(lu, rhs))
        new = new + area_shift(E, new)
        diff = float(np.max(np.abs(new - psi)))
        psi = new
        diffs.append(diff)
        if not np.all(np.isfinite(psi)):
            raise BackendFailure("fixed-point iterate is not finite; use the minimize backend")
        if len(diffs) >= 3 and diffs[-1] > 10 * diffs[-3] and diffs[-1] > cfg.fp_tol:
            raise BackendFailure("fixed-point iteration diverges; use the minimize backend")
        if diff < cfg.fp_tol:
            converged = True
            break
    if np.max(np.abs(psi)) > cfg.beta:
        raise BackendFailure("fixed point leaves the beta box; use the minimize backend")
    result = _finalize(E, cfg, psi, it, converged, False)
    if not converged:
        raise NonConvergenceError(f"fixed point stalled at increment {diffs[-1]:.3e}", best=result)
    return result


def _bulk_trace(model, E, psi):
    if model.kind == "none":
        return np.zeros(E.n)
    pts = E.nodes + psi[:, None] * E.normal
    if model.kind == "analytic":
        return model.q(pts[:, 0], pts[:, 1])
    return fem_state(model, E, psi)[1]


def run_step(E, cfg):
    if cfg.backend == "minimize":
        return minimize_step(E, cfg)
    return el_fixed_point_step(E, cfg)


# ---------------------------------------------------------------------------
# step products and residuals


def euler_lagrange_defect(E, psi, cfg):
    """Pointwise defect kappa^phi_F - Q + v/h at the lifted nodes, its J-weighted mean and J."""
    hf = HeightField(E, psi)
    kphi = graph_aniso_curvature(hf, cfg.anisotropy)
    Q = _bulk_trace(cfg.bulk, E, psi)
    xi = psi + 0.5 * E.curvature * psi**2
    v = spectral.inverse_laplacian(xi, E.length)
    dev = kphi - Q + v / cfg.h
    _, _, J = graph_frame(hf)
    L = float(np.sum(dev * J) / np.sum(J))
    return dev, L, J


def el_residual(E, res, cfg):
    """L^2 norm over the new boundary of the Euler-Lagrange defect minus its mean."""
    dev, L, J = euler_lagrange_defect(E, res.psi.values, cfg)
    return float(np.sqrt(np.sum((dev - L) ** 2 * J) * E.ds))


def iteration_quantity(E, psi, xi, a, h):
    """int xi^2 + (h/2) int g(nu) |psi''|^2 over the reference curve."""
    g = a.mobility_g(E.normal)
    return E.integrate(xi**2) + 0.5 * h * E.integrate(g * E.d_ds(psi, 2) ** 2)


def _finalize(E, cfg, psi, iterations, converged, box_hit):
    hf = HeightField(E, psi)
    pts = hf.points()
    if not is_simple(pts):
        raise GraphBreakdownError("the new curve self-intersects")
    try:
        F = lift(hf, n=E.n)
    except (ValidationError, DomainError) as exc:
        raise GraphBreakdownError(f"lift failed: {exc}") from exc
    F = _restore_area(F, E.area, E.n)
    xi = psi + 0.5 * E.curvature * psi**2
    v = spectral.inverse_laplacian(xi, E.length)
    d = float(np.sqrt(max(E.integrate(xi * v), 0.0)))
    a = cfg.anisotropy
    P = aniso_perimeter(F, a)
    Eb = bulk_energy(cfg.bulk, F)
    dev, L, J = euler_lagrange_defect(E, psi, cfg)
    resid = float(np.sqrt(np.sum((dev - L) ** 2 * J) * E.ds))
    margin = float(np.max(np.abs(psi)) / cfg.beta)
    return StepResult(
        F=F,
        psi=hf,
        d=d,
        lagrange_L=L,
        el_residual_norm=resid,
        energies=(P, Eb, d * d / (2 * cfg.h)),
        constraint_margin=margin,
        iteration_quantity=iteration_quantity(E, psi, xi, a, cfg.h),
        iterations=iterations,
        converged=converged,
        box_active=bool(box_hit or margin >= 1.0 - 1e-12),
        backend=cfg.backend,
        xi=xi,
        v=v,
        area_drift=float((F.area - E.area) / E.area),
    )


def objective_value(E, cfg, psi):
    """Phi(psi) evaluated directly (fem bulk is solved, not linearized)."""
    obj = StepObjective(E, cfg, frozen_bulk=(0.0, np.zeros(E.n), np.zeros(E.n), np.ones(E.n)))
    p = obj.parts(psi)
    Eb = fem_state(cfg.bulk, E, psi)[0] if cfg.bulk.kind == "fem" else p["bulk"]
    return p["P"] + Eb + p["D"] / (2 * cfg.h)


def objective_gradient(E, cfg, psi):
    """dPhi/dpsi; for fem the elastic part uses the boundary density at psi."""
    if cfg.bulk.kind == "fem":
        e, q = fem_state(cfg.bulk, E, psi)
        obj = StepObjective(E, cfg, frozen_bulk=(e, q, psi, 1.0 + E.curvature * psi))
    else:
        obj = StepObjective(E, cfg)
    return obj.parts(psi)["grad"]


def total_energy(F, cfg):
    """P_phi(F) + bulk(F)."""
    return aniso_perimeter(F, cfg.anisotropy) + bulk_energy(cfg.bulk, F)
