"""Acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line; the lines are printed in the terminal
summary (see conftest.py) and by ``python tests/test_acceptance.py``.
"""

import time

import numpy as np
import pytest

from flatflow2d.anisotropy import Anisotropy, builtin_anisotropies
from flatflow2d.curve import ClosedCurve, HeightField, curvature_expansion, gauss_bonnet, hausdorff, remainder_linear_part
from flatflow2d.elasticity import (
    BulkEnergyModel,
    Dirichlet,
    Domain,
    HookeTensor,
    boundary_q,
    lame_thick_cylinder,
    quadratic_form,
    shape_derivative_check,
    solve_equilibrium,
)
from flatflow2d.flow import (
    calibrate_iteration_constant,
    energy_increases,
    iteration_violations,
    mode_amplitude,
    run_flat_flow,
    run_pde_reference,
)
from flatflow2d.hminus import dist, first_variation_check
from flatflow2d.step import StepConfig, area_shift
from flatflow2d.verify import bump_field, random_polar_curve, random_solenoidal_field

ALL = builtin_anisotropies()
RESULTS = {}
SEED = 20240601


def record(number, title, passed, detail, seconds, limit):
    within = seconds < limit
    line = f"{'PASS' if passed and within else 'FAIL'}  criterion {number:>2} {title}: {detail} [{seconds:.1f} s, limit {limit:g} s]"
    RESULTS[number] = line
    print(line)
    return passed and within


def ellipse0(n):
    return ClosedCurve.ellipse(1.2, 1 / 1.2, n)


# ---------------------------------------------------------------------------


def check_gauss_bonnet():
    rng = np.random.default_rng(SEED)
    t0 = time.perf_counter()
    curves = [ClosedCurve.circle(1.0, 512), ClosedCurve.ellipse(2.0, 1.0, 512), random_polar_curve(rng, 512)]
    spreads = {k: float(np.ptp([gauss_bonnet(c, a) for c in curves])) for k, a in ALL.items()}
    eu = max(abs(gauss_bonnet(c, Anisotropy.euclidean()) - 2 * np.pi) for c in curves)
    ok = max(spreads.values()) < 1e-6 and eu < 1e-9
    detail = ", ".join(f"{k} spread {v:.1e}" for k, v in spreads.items()) + f"; euclidean - 2 pi {eu:.1e}"
    return ok, detail, time.perf_counter() - t0


def check_hminus():
    rng = np.random.default_rng(SEED)
    t0 = time.perf_counter()
    C = ClosedCurve.circle(1.0, 256)
    th = 2 * np.pi * np.arange(256) / 256
    mode_err = max(abs(dist(C, np.cos(k * th)).d - np.sqrt(np.pi) / k) for k in range(1, 17))
    E = ClosedCurve.circle(1.0, 128)
    th = 2 * np.pi * np.arange(128) / 128
    shape = 0.05 * np.cos(2 * th) + 0.03 * np.sin(3 * th)
    from flatflow2d.curve import lift

    F = lift(HeightField(E, shape + area_shift(E, shape)), n=128)
    worst = 0.0
    for _ in range(10):
        an, fd = first_variation_check(E, F, random_solenoidal_field(rng))
        worst = max(worst, abs(an - fd) / max(abs(an), abs(fd)))
    ok = mode_err < 1e-10 and worst < 1e-3
    return ok, f"max |d - sqrt(pi)/k| {mode_err:.1e}; first variation worst gap {worst:.1e}", time.perf_counter() - t0


def _expansion_ratios(rng, subtract_linear):
    bases = [ClosedCurve.circle(1.0, 256), ellipse0(256), random_polar_curve(rng, 256)]
    worst = np.inf
    for a in ALL.values():
        for E in bases:
            th = 2 * np.pi * np.arange(E.n) / E.n
            for _ in range(5):
                m = int(rng.integers(2, 9))
                psi = 0.02 * np.cos(m * th + rng.uniform(0, 2 * np.pi))
                R = [curvature_expansion(HeightField(E, psi / 2**j), a)[1] for j in range(2)]
                if subtract_linear:
                    R = [r - remainder_linear_part(E, a, psi / 2**j) for j, r in enumerate(R)]
                worst = min(worst, np.max(np.abs(R[0])) / np.max(np.abs(R[1])))
    return worst


def check_expansion():
    rng = np.random.default_rng(SEED)
    t0 = time.perf_counter()
    worst = _expansion_ratios(rng, subtract_linear=False)
    return worst >= 3.5, f"smallest halving ratio of |R|_inf {worst:.2f} (needs >= 3.5)", time.perf_counter() - t0


def check_stationarity():
    t0 = time.perf_counter()
    cases = [("circle", ClosedCurve.circle(1.0, 256), Anisotropy.euclidean())]
    cases += [(f"{k} Wulff", a.wulff_boundary(256), a) for k, a in ALL.items()]
    parts, ok = [], True
    for name, E0, a in cases:
        traj = run_flat_flow(E0, StepConfig(h=1e-3, beta=0.05, anisotropy=a), T=0.1, stride=10, track_tube=False)
        haus = max(hausdorff(E0, c) for c in traj.curves)
        resid = float(np.nanmax(traj.column("el_residual")[1:]))
        good = traj.completed and len(traj.times) == 101 and haus < 1e-6 and resid < 1e-6
        ok &= good
        parts.append(f"{name} {'ok' if good else 'MISS'} (drift {haus:.1e}, residual {resid:.1e})")
    return ok, "; ".join(parts), time.perf_counter() - t0


_ELLIPSE_RUN = {}


def ellipse_run():
    if "traj" not in _ELLIPSE_RUN:
        t0 = time.perf_counter()
        E0 = ellipse0(256)
        traj = run_flat_flow(E0, StepConfig(h=1e-3, beta=0.1), T=0.1, stride=10)
        _ELLIPSE_RUN.update(E0=E0, traj=traj, seconds=time.perf_counter() - t0)
    return _ELLIPSE_RUN["E0"], _ELLIPSE_RUN["traj"], _ELLIPSE_RUN["seconds"]


def check_dissipation():
    E0, traj, seconds = ellipse_run()
    t0 = time.perf_counter()
    inc = energy_increases(traj, tol=1e-10)
    drift = float(np.max(np.abs(traj.column("area") - E0.area)) / E0.area)
    margin = float(np.nanmax(traj.column("margin")[1:]))
    ok = traj.completed and len(traj.times) == 101 and not inc and drift < 1e-5 and margin <= 0.5
    detail = f"{len(inc)} energy increases, area drift {drift:.1e}, max margin {margin:.3f}"
    return ok, detail, seconds + time.perf_counter() - t0


def check_consistency():
    t0 = time.perf_counter()
    E0 = ellipse0(256)
    T = 0.05
    ref = run_pde_reference(E0, dt=1e-5, T=T, stride=100)
    errs = []
    for h in (4e-3, 2e-3, 1e-3):
        traj = run_flat_flow(E0, StepConfig(h=h, beta=0.1), T=T, track_tube=False)
        if not traj.completed:
            return False, f"flat flow at h={h:g} halted: {traj.halt.kind}", time.perf_counter() - t0
        # compare at the last flat-flow time, floor(T/h) h
        _, R = ref.snapshot_at(traj.times[-1])
        errs.append(hausdorff(traj.final_curve, R))
    ratios = [errs[i] / errs[i + 1] for i in range(2)]
    diam = E0.diameter
    ok = errs[0] > errs[1] > errs[2] and all(1.5 <= r <= 3 for r in ratios) and errs[-1] < 5e-3 * diam
    detail = "errors " + ", ".join(f"{e:.2e}" for e in errs) + ", ratios " + ", ".join(f"{r:.2f}" for r in ratios)
    detail += f", smallest/diam {errs[-1] / diam:.1e}"
    return ok, detail, time.perf_counter() - t0


def check_decay():
    t0 = time.perf_counter()
    E0 = ClosedCurve.polar(lambda t: 1 + 0.05 * np.cos(4 * t), 128)
    traj = run_pde_reference(E0, dt=1e-6, T=2e-4, stride=20)
    amps = np.array([mode_amplitude(c, 4) for c in traj.curves])
    rate = -np.polyfit(traj.snapshot_times, np.log(amps), 1)[0]
    return abs(rate - 240) <= 24, f"fitted decay rate {rate:.1f} (target 240)", time.perf_counter() - t0


def check_elasticity():
    t0 = time.perf_counter()
    hooke = HookeTensor(1.0, 1.0)
    A = np.array([[0.05, 0.01], [0.01, -0.02]])
    model = BulkEnergyModel.fem(hooke, Domain("disk", 3.0), Dirichlet("affine", matrix=tuple(map(tuple, A))), 0.1)
    sol = solve_equilibrium(model, None)
    affine_err = abs(sol.energy - quadratic_form(hooke, A) * float(np.sum(sol.element_area))) / sol.energy
    a, R, delta = 0.5, 2.0, 0.01
    exact = lame_thick_cylinder(hooke, a, R, delta)[2]
    lame = []
    for size in (0.02, 0.01):
        m = BulkEnergyModel.fem(hooke, Domain("disk", R), Dirichlet("radial", delta=delta), size)
        lame.append(float(np.max(np.abs(boundary_q(m, ClosedCurve.circle(a, 256)) - exact)) / exact))
    radial = BulkEnergyModel.fem(hooke, Domain("disk", R), Dirichlet("radial", delta=delta), 0.03)
    an, fd = shape_derivative_check(radial, ClosedCurve.circle(a, 256), bump_field((0, 0), 0.8, 1.5))
    gap_r = abs(an - fd) / abs(fd)
    stretch = BulkEnergyModel.fem(hooke, Domain("disk", 3.0), Dirichlet("affine", matrix=((0.05, 0), (0, 0))), 0.05)
    an, fd = shape_derivative_check(stretch, ellipse0(128), bump_field((0, 0), 1.4, 2.4))
    gap_s = abs(an - fd) / abs(fd)
    ok = affine_err < 1e-10 and lame[0] < 0.02 and lame[0] / lame[1] >= 1.7 and max(gap_r, gap_s) < 0.05
    detail = (
        f"affine {affine_err:.1e}; Lame {lame[0]:.2%} -> {lame[1]:.2%} (x{lame[0] / lame[1]:.2f}); "
        f"shape derivative gaps {gap_r:.1%} (radial), {gap_s:.1%} (stretch)"
    )
    return ok, detail, time.perf_counter() - t0


def check_iteration():
    _, traj, _ = ellipse_run()
    t0 = time.perf_counter()
    M = calibrate_iteration_constant(traj, last=10)
    bad = iteration_violations(traj, M, start=10)
    return traj.completed and not bad, f"M = {M:.3g}, {len(bad)} violations", time.perf_counter() - t0


def check_coupled():
    t0 = time.perf_counter()
    bulk = BulkEnergyModel.fem(
        HookeTensor(1.0, 1.0), Domain("disk", 3.0), Dirichlet("affine", matrix=((0.05, 0.0), (0.0, 0.0))), 0.05
    )
    E0 = ellipse0(256)
    traj = run_flat_flow(E0, StepConfig(h=2e-3, beta=0.1, bulk=bulk), T=0.02, stride=5)
    inc = energy_increases(traj, tol=1e-8)
    drift = float(np.max(np.abs(traj.column("area") - E0.area)) / E0.area)
    ok = traj.completed and len(traj.times) == 11 and not inc and drift < 1e-4
    halt = "none" if traj.halt is None else traj.halt.kind
    return ok, f"halt {halt}, {len(inc)} energy increases, area drift {drift:.1e}", time.perf_counter() - t0


CRITERIA = [
    (1, "Gauss-Bonnet invariance", check_gauss_bonnet, 1),
    (2, "H^-1 oracle", check_hminus, 5),
    (3, "curvature-expansion remainder", check_expansion, 5),
    (4, "stationarity", check_stationarity, 30),
    (5, "dissipation and conservation", check_dissipation, 120),
    (6, "consistency with the reference PDE", check_consistency, 600),
    (7, "linearized decay", check_decay, 60),
    (8, "elasticity oracles", check_elasticity, 180),
    (9, "iteration inequality", check_iteration, 120),
    (10, "coupled run", check_coupled, 900),
]


@pytest.mark.acceptance
@pytest.mark.parametrize("number, title, check, limit", CRITERIA, ids=[f"criterion_{c[0]:02d}" for c in CRITERIA])
def test_criterion(number, title, check, limit):
    ok, detail, seconds = check()
    assert record(number, title, ok, detail, seconds, limit), RESULTS[number]


# -- supplementary evidence for the criteria above ----------------------------------


def test_expansion_remainder_is_quadratic_after_removing_its_linear_part():
    rng = np.random.default_rng(SEED)
    assert _expansion_ratios(rng, subtract_linear=False) > 1.8
    assert _expansion_ratios(np.random.default_rng(SEED), subtract_linear=True) >= 3.5


@pytest.mark.slow
def test_fourier_wulff_is_stationary_when_resolved():
    a = ALL["fourier"]
    W = a.wulff_boundary(1024)
    traj = run_flat_flow(W, StepConfig(h=1e-3, beta=0.05, anisotropy=a), T=0.1, stride=10, track_tube=False)
    assert traj.completed
    assert max(hausdorff(W, c) for c in traj.curves) < 1e-6
    assert np.nanmax(traj.column("el_residual")[1:]) < 1e-6


if __name__ == "__main__":
    for number, title, check, limit in CRITERIA:
        ok, detail, seconds = check()
        record(number, title, ok, detail, seconds, limit)
