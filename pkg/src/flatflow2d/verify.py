"""Property suite run by ``flatflow2d verify``.

Each property is a small self-contained experiment with a pass/fail verdict
and a one-line detail string.  The default suite takes well under a minute.
"""

import time
from dataclasses import dataclass

import numpy as np

from .anisotropy import Anisotropy, builtin_anisotropies
from .curve import (
    ClosedCurve,
    HeightField,
    curvature_expansion,
    direct_aniso_curvature,
    gauss_bonnet,
    graph_aniso_curvature,
    lift,
    remainder_linear_part,
)
from .elasticity import (
    BulkEnergyModel,
    Dirichlet,
    Domain,
    HookeTensor,
    lame_thick_cylinder,
    quadratic_form,
    shape_derivative_check,
    solve_equilibrium,
)
from .hminus import dist, first_variation_check
from .step import StepConfig, StepObjective, area_shift, run_step


@dataclass(frozen=True)
class PropertyResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self):
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


# ---------------------------------------------------------------------------
# shared fixtures


def random_polar_curve(rng, n, modes=4, amplitude=0.08):
    """Smooth star-shaped curve with a few random low Fourier modes in the radius."""
    coeffs = rng.uniform(-1, 1, size=(modes, 2)) * amplitude / np.arange(2, modes + 2)[:, None]

    def radius(t):
        r = np.ones_like(t)
        for j, (c, s) in enumerate(coeffs, start=2):
            r += c * np.cos(j * t) + s * np.sin(j * t)
        return r

    return ClosedCurve.polar(radius, n)


def random_solenoidal_field(rng, degree=3, scale=0.5):
    """Divergence-free polynomial field (d_y S, -d_x S) of a random stream function S."""
    terms = [(i, j) for i in range(degree + 1) for j in range(degree + 1 - i) if i + j >= 1]
    c = rng.normal(size=len(terms)) * scale

    def X(p):
        x, y = p[:, 0], p[:, 1]
        u = np.zeros_like(x)
        v = np.zeros_like(x)
        for ck, (i, j) in zip(c, terms):
            if j:
                u += ck * j * x**i * y ** (j - 1)
            if i:
                v -= ck * i * x ** (i - 1) * y**j
        return np.stack([u, v], axis=1)

    return X


def area_matched_graph(E, shape):
    """Height field ``shape + c`` over E with the constant chosen so the areas agree."""
    return HeightField(E, shape + area_shift(E, shape))


def bump_field(center, r0, r1):
    """Radial field equal to (x - center) inside r0, smoothly cut off to zero at r1."""

    def X(p):
        rel = p - np.asarray(center)
        r = np.hypot(rel[:, 0], rel[:, 1])
        s = np.clip((r1 - r) / (r1 - r0), 0.0, 1.0)
        return rel * (s * s * (3 - 2 * s))[:, None]

    return X


# ---------------------------------------------------------------------------
# properties


def prop_anisotropy_identities(rng):
    worst_h = worst_e = worst_d = 0.0
    for a in builtin_anisotropies().values():
        th = rng.uniform(0, 2 * np.pi, 1000)
        nu = np.stack([np.cos(th), np.sin(th)], axis=1)
        lam = rng.uniform(0.1, 10, 1000)
        worst_h = max(worst_h, float(np.max(np.abs(a.eval(lam[:, None] * nu) - lam * a.eval(nu)) / lam)))
        worst_e = max(worst_e, float(np.max(np.abs(np.einsum("ij,ij->i", a.gradient(nu), nu) - a.eval(nu)))))
        for v in a.gradient(nu[:32]):
            worst_d = max(worst_d, abs(a.dual_norm(v) - 1.0))
    ok = worst_h < 1e-12 and worst_e < 1e-10 and worst_d < 1e-8
    return ok, f"homogeneity {worst_h:.1e}, Euler {worst_e:.1e}, duality {worst_d:.1e}"


def prop_fourier_mobility(rng):
    a = builtin_anisotropies()["fourier"]
    th = rng.uniform(0, 2 * np.pi, 512)
    h, _, h2 = a._h(th)
    err = float(np.max(np.abs(a.mobility_g(np.stack([np.cos(th), np.sin(th)], axis=1)) - (h + h2))))
    return err < 1e-10, f"max |g - (h + h'')| = {err:.1e}"


def prop_gauss_bonnet(rng):
    curves = [ClosedCurve.circle(1.0, 512), ClosedCurve.ellipse(2.0, 1.0, 512), random_polar_curve(rng, 512)]
    spreads = {}
    for name, a in builtin_anisotropies().items():
        vals = [gauss_bonnet(c, a) for c in curves]
        spreads[name] = float(np.ptp(vals))
    eu = gauss_bonnet(curves[1], Anisotropy.euclidean())
    ok = max(spreads.values()) < 1e-6 and abs(eu - 2 * np.pi) < 1e-9
    return ok, f"max spread {max(spreads.values()):.1e}, euclidean - 2 pi = {eu - 2 * np.pi:.1e}"


def prop_hminus_modes(rng):
    E = ClosedCurve.circle(1.0, 256)
    th = 2 * np.pi * np.arange(256) / 256
    err = max(abs(dist(E, np.cos(k * th)).d - np.sqrt(np.pi) / k) for k in range(1, 17))
    return err < 1e-10, f"max |d - sqrt(pi)/k| = {err:.1e}"


def prop_hminus_first_variation(rng, fields=3):
    E = ClosedCurve.circle(1.0, 128)
    th = 2 * np.pi * np.arange(128) / 128
    F = lift(area_matched_graph(E, 0.05 * np.cos(2 * th) + 0.03 * np.sin(3 * th)), n=128)
    worst = 0.0
    for _ in range(fields):
        an, fd = first_variation_check(E, F, random_solenoidal_field(rng))
        worst = max(worst, abs(an - fd) / max(abs(an), abs(fd)))
    return worst < 1e-3, f"worst relative gap {worst:.1e} over {fields} fields"


def prop_expansion(rng):
    bases = [ClosedCurve.circle(1.0, 256), ClosedCurve.ellipse(1.2, 1 / 1.2, 256)]
    worst_form, worst_ratio, worst_lin = 0.0, np.inf, np.inf
    for a in builtin_anisotropies().values():
        for E in bases:
            th = 2 * np.pi * np.arange(E.n) / E.n
            m = int(rng.integers(2, 7))
            shape = 0.02 * np.cos(m * th + rng.uniform(0, 2 * np.pi))
            hf = HeightField(E, shape)
            worst_form = max(worst_form, float(np.max(np.abs(graph_aniso_curvature(hf, a) - direct_aniso_curvature(hf, a)))))
            R1 = curvature_expansion(hf, a)[1]
            R2 = curvature_expansion(HeightField(E, shape / 2), a)[1]
            worst_ratio = min(worst_ratio, np.max(np.abs(R1)) / np.max(np.abs(R2)))
            Q1 = R1 - remainder_linear_part(E, a, shape)
            Q2 = R2 - remainder_linear_part(E, a, shape / 2)
            worst_lin = min(worst_lin, np.max(np.abs(Q1)) / np.max(np.abs(Q2)))
    ok = worst_form < 1e-8 and worst_ratio > 1.8 and worst_lin > 3.5
    return ok, f"formula vs direct {worst_form:.1e}; halving ratio of R {worst_ratio:.2f}, of R minus its linear part {worst_lin:.2f}"


def prop_affine_energy(rng):
    A = np.array([[0.05, 0.01], [0.01, -0.02]])
    hooke = HookeTensor(1.0, 1.0)
    model = BulkEnergyModel.fem(hooke, Domain("disk", 3.0), Dirichlet("affine", matrix=tuple(map(tuple, A))), 0.1)
    # no void: an affine field is then the exact equilibrium and P1 reproduces it
    sol = solve_equilibrium(model, None)
    mesh_area = float(np.sum(sol.element_area))
    err = abs(sol.energy - quadratic_form(hooke, A) * mesh_area)
    return err < 1e-10, f"|energy - Q(A) area| = {err:.1e}"


def prop_lame(rng):
    hooke = HookeTensor(1.0, 1.0)
    a, R, delta = 1.0, 3.0, 0.01
    model = BulkEnergyModel.fem(hooke, Domain("disk", R), Dirichlet("radial", delta=delta), 0.02)
    F = ClosedCurve.circle(a, 256)
    q_exact = lame_thick_cylinder(hooke, a, R, delta)[2]
    err = float(np.max(np.abs(model.cached_solution(F).boundary_q - q_exact)) / q_exact)
    return err < 0.02, f"max relative boundary Q error {err:.2%} at mesh size 0.02"


def prop_shape_derivative(rng):
    hooke = HookeTensor(1.0, 1.0)
    model = BulkEnergyModel.fem(
        hooke, Domain("disk", 3.0), Dirichlet("affine", matrix=((0.05, 0.0), (0.0, 0.0))), 0.05
    )
    F = ClosedCurve.ellipse(1.2, 1 / 1.2, 128)
    an, fd = shape_derivative_check(model, F, bump_field((0.0, 0.0), 1.4, 2.4))
    rel = abs(an - fd) / abs(fd)
    return rel < 0.05, f"analytic {an:.5g} vs finite difference {fd:.5g} ({rel:.1%})"


def prop_step_gradient(rng, directions=5):
    E = ClosedCurve.ellipse(1.2, 1 / 1.2, 128)
    worst = 0.0
    for a in builtin_anisotropies().values():
        cfg = StepConfig(h=1e-3, beta=0.1, anisotropy=a, bulk=BulkEnergyModel.analytic("0.1 * x**2 + 0.05 * y"))
        obj = StepObjective(E, cfg)
        psi = 0.01 * rng.normal(size=E.n)
        psi = psi - np.mean(psi)
        grad = obj.parts(psi)["grad"]
        for _ in range(directions):
            v = rng.normal(size=E.n)
            t = 1e-6
            fd = (obj.parts(psi + t * v)["value"] - obj.parts(psi - t * v)["value"]) / (2 * t)
            worst = max(worst, abs(fd - grad @ v) / abs(fd))
    return worst < 1e-5, f"worst relative gap {worst:.1e}"


def prop_stationary_shapes(rng):
    worst = 0.0
    cases = [(ClosedCurve.circle(1.0, 256), Anisotropy.euclidean())]
    a = builtin_anisotropies()["elliptic"]
    cases.append((a.wulff_boundary(256), a))
    for E, a in cases:
        res = run_step(E, StepConfig(h=1e-3, beta=0.1, anisotropy=a))
        worst = max(worst, float(np.max(np.abs(res.psi.values))), res.el_residual_norm)
    return worst < 1e-7, f"max of |psi| and EL residual {worst:.1e}"


PROPERTIES = {
    "anisotropy identities": prop_anisotropy_identities,
    "fourier mobility": prop_fourier_mobility,
    "Gauss-Bonnet invariance": prop_gauss_bonnet,
    "H^-1 Fourier modes": prop_hminus_modes,
    "H^-1 first variation": prop_hminus_first_variation,
    "curvature expansion": prop_expansion,
    "affine elastic energy": prop_affine_energy,
    "thick-cylinder boundary density": prop_lame,
    "elastic shape derivative": prop_shape_derivative,
    "step objective gradient": prop_step_gradient,
    "stationary shapes": prop_stationary_shapes,
}


def run_suite(seed=0, names=None):
    """Run the named properties (default: all) and return their results."""
    results = []
    for name, fn in PROPERTIES.items():
        if names is not None and name not in names:
            continue
        rng = np.random.default_rng(seed)
        t0 = time.perf_counter()
        try:
            ok, detail = fn(rng)
        except Exception as exc:  # a crash is a failed property, reported by name
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        results.append(PropertyResult(name, bool(ok), detail, time.perf_counter() - t0))
    return results
