"""Trajectories: the discrete flat flow, the sharp-interface reference PDE and
tools to compare and monitor them.

The flat flow re-references every step on the previous accepted curve.  The
reference evolves ``V = d^2/ds^2 (kappa^phi - Q)`` along the outward normal with
a semi-implicit spectral scheme.
"""

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np
import scipy.integrate

from .anisotropy import Anisotropy
from .curve import ClosedCurve, aniso_curvature, aniso_perimeter, extract_graph, hausdorff, ubc_radius
from .elasticity import BulkEnergyModel, boundary_q, energy as bulk_energy
from .errors import (
    BackendFailure,
    DomainError,
    FlatFlowError,
    GraphBreakdownError,
    NonConvergenceError,
    StepFailure,
    ValidationError,
)
from .step import StepConfig, constant_offset_for_area, run_step

MAX_STEPS = 10**6

RECORD_KEYS = (
    "k",
    "t",
    "d",
    "d_over_h",
    "P_phi",
    "E_elastic",
    "F_total",
    "area",
    "length",
    "psi_linf",
    "psi_l2",
    "margin",
    "iter_quantity",
    "kappa_phi_h2",
    "kappa_phi_d3_l2",
    "ubc_radius",
    "el_residual",
    "lagrange_L",
    "iterations",
    "in_tube_E0",
)


@dataclass(frozen=True)
class Halt:
    """Why a run stopped before its horizon."""

    kind: str
    k: int
    t: float
    message: str

    def to_dict(self):
        return {"kind": self.kind, "k": self.k, "t": self.t, "message": self.message}


@dataclass(eq=False)
class FlowTrajectory:
    """Step times, strided snapshots and one diagnostics record per step.

    ``times`` holds ``k dt`` for every completed step (including ``k = 0``);
    ``curves[j]`` is the curve at step ``snapshot_steps[j]``.
    """

    dt: float
    kind: str = "flat-flow"
    times: list = field(default_factory=list)
    curves: list = field(default_factory=list)
    snapshot_steps: list = field(default_factory=list)
    records: list = field(default_factory=list)
    halt: Halt = None
    tube_exit: tuple = None

    @property
    def snapshot_times(self):
        return [self.times[k] for k in self.snapshot_steps]

    @property
    def final_curve(self):
        return self.curves[-1]

    @property
    def completed(self):
        return self.halt is None

    def column(self, key):
        """One diagnostics column as a float array (missing values as nan)."""
        return np.array([np.nan if r.get(key) is None else r[key] for r in self.records], dtype=float)

    def snapshot_at(self, t):
        """Snapshot nearest to time ``t``."""
        j = int(np.argmin(np.abs(np.asarray(self.snapshot_times) - t)))
        return self.snapshot_times[j], self.curves[j]

    def jsonl_lines(self):
        lines = [json.dumps(r) for r in self.records]
        if self.halt is not None:
            rec = {key: None for key in RECORD_KEYS}
            rec.update(k=self.halt.k, t=self.halt.t, halt=self.halt.to_dict())
            lines.append(json.dumps(rec))
        return lines

    def save(self, out_dir, svg=False):
        """Write ``diagnostics.jsonl`` and numbered curve snapshots."""
        snap_dir = os.path.join(out_dir, "snapshots")
        os.makedirs(snap_dir, exist_ok=True)
        with open(os.path.join(out_dir, "diagnostics.jsonl"), "w") as fh:
            for line in self.jsonl_lines():
                fh.write(line + "\n")
        index = []
        for k, t, curve in zip(self.snapshot_steps, self.snapshot_times, self.curves):
            name = f"curve_{k:07d}.json"
            curve.save(os.path.join(snap_dir, name))
            index.append({"k": k, "t": t, "file": name})
        meta = {
            "kind": self.kind,
            "dt": self.dt,
            "snapshots": index,
            "halt": None if self.halt is None else self.halt.to_dict(),
            "tube_exit": None if self.tube_exit is None else {"k": self.tube_exit[0], "t": self.tube_exit[1]},
        }
        with open(os.path.join(out_dir, "trajectory.json"), "w") as fh:
            json.dump(meta, fh, indent=1)
        if svg:
            write_svg(self, os.path.join(out_dir, "frames.svg"))

    @classmethod
    def load(cls, out_dir):
        with open(os.path.join(out_dir, "trajectory.json")) as fh:
            meta = json.load(fh)
        records = []
        with open(os.path.join(out_dir, "diagnostics.jsonl")) as fh:
            for line in fh:
                rec = json.loads(line)
                if rec.get("halt") is None:
                    records.append(rec)
        traj = cls(dt=meta["dt"], kind=meta["kind"], records=records)
        traj.times = [r["t"] for r in records]
        steps = [r["k"] for r in records]
        for item in meta["snapshots"]:
            traj.snapshot_steps.append(steps.index(item["k"]))
            traj.curves.append(ClosedCurve.load(os.path.join(out_dir, "snapshots", item["file"])))
        if meta["halt"] is not None:
            traj.halt = Halt(**meta["halt"])
        if meta["tube_exit"] is not None:
            traj.tube_exit = (meta["tube_exit"]["k"], meta["tube_exit"]["t"])
        return traj


# ---------------------------------------------------------------------------
# norms and monitors


def sobolev_norms(E, f, k):
    """(sum_{j <= k} |d^j f / ds^j|_{L^2}^2)^{1/2} on the curve E."""
    if k not in range(5):
        raise DomainError("Sobolev order must be 0..4")
    f = np.asarray(f, dtype=float)
    total = E.integrate(f**2)
    for j in range(1, k + 1):
        total += E.integrate(E.d_ds(f, j) ** 2)
    return float(np.sqrt(total))


def circularity(E):
    """max |kappa - mean kappa| / mean kappa."""
    k = E.curvature
    return float(np.max(np.abs(k - k.mean())) / k.mean())


def _curve_record(k, t, F, a, bulk):
    kphi = aniso_curvature(F, a)
    P = aniso_perimeter(F, a)
    Eb = bulk_energy(bulk, F)
    return {
        "k": k,
        "t": t,
        "d": 0.0,
        "d_over_h": 0.0,
        "P_phi": P,
        "E_elastic": Eb,
        "F_total": P + Eb,
        "area": F.area,
        "length": F.length,
        "psi_linf": 0.0,
        "psi_l2": 0.0,
        "margin": 0.0,
        "iter_quantity": 0.0,
        "kappa_phi_h2": sobolev_norms(F, kphi, 2),
        "kappa_phi_d3_l2": float(np.sqrt(F.integrate(F.d_ds(kphi, 3) ** 2))),
        "ubc_radius": ubc_radius(F),
        "el_residual": None,
        "lagrange_L": None,
        "iterations": 0,
        "in_tube_E0": True,
    }


def _step_record(k, t, E, res, cfg):
    rec = _curve_record(k, t, res.F, cfg.anisotropy, cfg.bulk)
    psi = res.psi.values
    rec.update(
        d=res.d,
        d_over_h=res.d / cfg.h,
        P_phi=res.energies[0],
        E_elastic=res.energies[1],
        F_total=res.energies[0] + res.energies[1],
        psi_linf=float(np.max(np.abs(psi))),
        psi_l2=float(np.sqrt(E.integrate(psi**2))),
        margin=res.constraint_margin,
        iter_quantity=res.iteration_quantity,
        el_residual=res.el_residual_norm,
        lagrange_L=res.lagrange_L,
        iterations=res.iterations,
    )
    return rec


def _inside_tube(E0, F, beta):
    """True when F is a normal graph over E0 with heights inside the beta tube."""
    if beta >= E0.sigma:
        return False
    try:
        hf = extract_graph(E0, F)
    except FlatFlowError:
        return False
    return bool(hf) and float(np.max(np.abs(hf.values))) <= beta


def _num_steps(T, dt):
    if not (T >= 0 and dt > 0):
        raise ValidationError("T must be non-negative and the time step positive")
    K = int(math.floor(T / dt + 1e-9))
    if K > MAX_STEPS:
        raise ValidationError(f"T/h = {K} exceeds the step limit {MAX_STEPS}")
    return K


# ---------------------------------------------------------------------------
# discrete flat flow


def run_flat_flow(E0, cfg, T, stride=1, track_tube=True):
    """Iterate minimizing-movement steps from E0 up to time T.

    Each step is a normal graph over the previous accepted curve.  A typed
    failure (graph breakdown, saturated box, optimizer or backend failure)
    ends the run; the partial trajectory is returned with ``halt`` set.

    When ``track_tube`` is on, each accepted curve is also read as a graph over
    E0 and the first step leaving the beta tube around E0 is stored in
    ``tube_exit``.
    """
    if stride < 1:
        raise ValidationError("stride must be at least 1")
    E0.validate()
    h = cfg.h
    K = _num_steps(T, h)
    traj = FlowTrajectory(dt=h, kind="flat-flow")
    traj.times.append(0.0)
    traj.records.append(_curve_record(0, 0.0, E0, cfg.anisotropy, cfg.bulk))
    traj.curves.append(E0)
    traj.snapshot_steps.append(0)
    E = E0
    for k in range(1, K + 1):
        t = k * h
        halt = None
        try:
            res = run_step(E, cfg)
            if res.box_active:
                halt = Halt("constraint-saturation", k, t, f"|psi| reached beta = {cfg.beta:g}")
        except GraphBreakdownError as exc:
            halt = Halt("graph-breakdown", k, t, str(exc))
        except NonConvergenceError as exc:
            best = getattr(exc, "best", None)
            if best is not None and best.box_active:
                # the optimizer stalled against the box: the constraint binds
                halt = Halt("constraint-saturation", k, t, f"|psi| reached beta = {cfg.beta:g}: {exc}")
            else:
                halt = Halt("non-convergence", k, t, str(exc))
        except BackendFailure as exc:
            halt = Halt("backend-failure", k, t, str(exc))
        except (StepFailure, DomainError, ValidationError) as exc:
            halt = Halt("step-failure", k, t, str(exc))
        if halt is not None:
            traj.halt = halt
            break
        rec = _step_record(k, t, E, res, cfg)
        if track_tube:
            inside = traj.tube_exit is None and _inside_tube(E0, res.F, cfg.beta)
            rec["in_tube_E0"] = inside
            if not inside and traj.tube_exit is None:
                traj.tube_exit = (k, t)
        else:
            rec["in_tube_E0"] = None
        traj.records.append(rec)
        traj.times.append(t)
        E = res.F
        if k % stride == 0 or k == K:
            traj.curves.append(E)
            traj.snapshot_steps.append(k)
    if traj.halt is not None and traj.snapshot_steps[-1] != len(traj.times) - 1:
        traj.curves.append(E)
        traj.snapshot_steps.append(len(traj.times) - 1)
    return traj


# ---------------------------------------------------------------------------
# reference PDE


def stable_dt(E, a, c=0.5):
    """Largest admissible reference time step c (L/n)^2 / max g."""
    return c * E.ds**2 / float(np.max(a.mobility_g(E.normal)))


def pde_velocity(E, a, model):
    """Outward normal velocity d^2/ds^2 (kappa^phi - Q)."""
    return E.d_ds(aniso_curvature(E, a) - boundary_q(model, E), 2)


def run_pde_reference(E0, a=None, model=None, dt=None, T=0.0, stride=1, c=0.5):
    """Sharp-interface evolution ``V = d^2/ds^2 (kappa^phi - Q)``.

    Semi-implicit in arclength: the part ``-gbar d^4 x`` with ``gbar = max g``
    is implicit, the rest explicit.  After each step the nodes are resampled
    at uniform arclength and the enclosed area is restored by a constant
    normal offset.  ``dt`` defaults to ``stable_dt(E0, a, c)`` and may not
    exceed it.
    """
    a = a or Anisotropy.euclidean()
    model = model or BulkEnergyModel.none()
    if stride < 1:
        raise ValidationError("stride must be at least 1")
    E0.validate()
    cap = stable_dt(E0, a, c)
    dt = cap if dt is None else dt
    if dt > cap * (1 + 1e-12):
        raise ValidationError(f"dt = {dt:.3g} exceeds the stability cap {cap:.3g}")
    K = _num_steps(T, dt)
    n, area0 = E0.n, E0.area
    traj = FlowTrajectory(dt=dt, kind="pde")
    traj.times.append(0.0)
    traj.records.append(_curve_record(0, 0.0, E0, a, model))
    traj.curves.append(E0)
    traj.snapshot_steps.append(0)
    E = E0
    for k in range(1, K + 1):
        t = k * dt
        V = pde_velocity(E, a, model)
        gbar = float(np.max(a.mobility_g(E.normal)))
        x = E.nodes
        explicit = x + dt * (V[:, None] * E.normal + gbar * E.d_ds(x, 4))
        wk = np.fft.fftfreq(n, d=1.0 / n) * (2 * np.pi / E.length)
        x_new = np.real(np.fft.ifft(np.fft.fft(explicit, axis=0) / (1 + dt * gbar * wk**4)[:, None], axis=0))
        if not np.all(np.isfinite(x_new)) or dt * float(np.max(np.abs(V))) > 0.5 * E.sigma:
            traj.halt = Halt("instability", k, t, "normal velocity blew up; reduce dt")
            break
        try:
            F = ClosedCurve.from_parametric(x_new, n, validate=False)
            # the offset is tiny, so the spacing stays uniform to rounding
            F = ClosedCurve(F.nodes + constant_offset_for_area(F, area0) * F.normal)
        except (FlatFlowError, FloatingPointError) as exc:
            traj.halt = Halt("instability", k, t, str(exc))
            break
        E = F
        traj.times.append(t)
        if k % stride == 0 or k == K:
            rec = _curve_record(k, t, E, a, model)
            rec["in_tube_E0"] = None
            traj.records.append(rec)
            traj.curves.append(E)
            traj.snapshot_steps.append(len(traj.times) - 1)
    if traj.halt is not None and traj.curves[-1] is not E:
        rec = _curve_record(len(traj.times) - 1, traj.times[-1], E, a, model)
        rec["in_tube_E0"] = None
        traj.records.append(rec)
        traj.curves.append(E)
        traj.snapshot_steps.append(len(traj.times) - 1)
    return traj


def mode_amplitude(E, m, center=None):
    """|m-th Fourier coefficient| of the radius r(theta) of a star-shaped curve."""
    c = E.nodes.mean(axis=0) if center is None else np.asarray(center)
    rel = E.upsample(8) - c
    theta = np.arctan2(rel[:, 1], rel[:, 0])
    r = np.hypot(rel[:, 0], rel[:, 1])
    order = np.argsort(theta)
    theta, r = theta[order], r[order]
    # trapezoidal rule on the closed angular grid
    tt = np.concatenate([theta, [theta[0] + 2 * np.pi]])
    rr = np.concatenate([r, [r[0]]])
    z = rr * np.exp(-1j * m * tt)
    return float(abs(scipy.integrate.trapezoid(z, tt)) / np.pi)


# ---------------------------------------------------------------------------
# comparisons and monitors


def compare(traj_a, traj_b, E0=None):
    """Hausdorff and L^2 height gaps at each snapshot time of ``traj_a``.

    Each snapshot of ``traj_a`` is matched with the nearest snapshot of
    ``traj_b``.  The height gap uses graphs over E0 (default: the first
    snapshot of ``traj_a``) and is None where either curve is not a graph.
    """
    E0 = E0 or traj_a.curves[0]
    rows = []
    for t, A in zip(traj_a.snapshot_times, traj_a.curves):
        tb, B = traj_b.snapshot_at(t)
        haus = hausdorff(A, B)
        gap = None
        try:
            ga, gb = extract_graph(E0, A), extract_graph(E0, B)
            if ga and gb:
                gap = float(np.sqrt(E0.integrate((ga.values - gb.values) ** 2)))
        except FlatFlowError:
            pass
        rows.append({"t": t, "t_other": tb, "hausdorff": haus, "l2_height": gap})
    return rows


def calibrate_iteration_constant(traj, last=10):
    """M >= 0 fitted so that I_k <= (1 + M h) I_{k-1} holds for k = 2..last."""
    I = traj.column("iter_quantity")
    ratios = [(I[k] / I[k - 1] - 1) / traj.dt for k in range(2, min(last, len(I) - 1) + 1) if I[k - 1] > 0]
    return max([0.0] + ratios)


def iteration_violations(traj, M, start=10, rtol=1e-12):
    """Steps k >= start where I_k > (1 + M h) I_{k-1}."""
    I = traj.column("iter_quantity")
    return [k for k in range(max(start, 2), len(I)) if I[k] > (1 + M * traj.dt) * I[k - 1] * (1 + rtol)]


def energy_increases(traj, tol=1e-10):
    """Steps whose total energy exceeds the previous one by more than tol relative."""
    F = traj.column("F_total")
    return [k for k in range(1, len(F)) if F[k] > F[k - 1] + tol * abs(F[k - 1])]


def dissipation_gap(traj):
    """(sum d_k^2 / 2h) - (G_0 - G_K); non-positive up to rounding for a minimizing scheme."""
    d = traj.column("d")
    F = traj.column("F_total")
    return float(np.sum(d[1:] ** 2) / (2 * traj.dt) - (F[0] - F[-1]))


def monitor_excursions(traj, factor=2.0):
    """Steps where a monitored bound exceeds ``factor`` times its first-decile maximum.

    Monitored: d/h, the H^2 norm of kappa^phi and h^{1/4} times the L^2 norm
    of its third derivative.
    """
    K = len(traj.records) - 1
    if K < 1:
        return {}
    decile = max(1, math.ceil(K / 10))
    series = {
        "d_over_h": traj.column("d_over_h"),
        "kappa_phi_h2": traj.column("kappa_phi_h2"),
        "kappa_phi_d3_scaled": traj.dt**0.25 * traj.column("kappa_phi_d3_l2"),
    }
    out = {}
    for name, vals in series.items():
        ref = float(np.nanmax(vals[1 : decile + 1]))
        out[name] = [int(k) for k in range(decile + 1, K + 1) if vals[k] > factor * ref]
    return out


def write_svg(traj, path, size=480):
    """One polyline per snapshot, later snapshots darker."""
    pts = np.vstack([c.nodes for c in traj.curves])
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    span = float(np.max(hi - lo)) or 1.0
    pad = 0.05 * span
    scale = size / (span + 2 * pad)
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}">']
    m = len(traj.curves)
    for j, c in enumerate(traj.curves):
        xy = (c.nodes - lo + pad) * scale
        xy[:, 1] = size - xy[:, 1]
        coords = " ".join(f"{x:.2f},{y:.2f}" for x, y in np.vstack([xy, xy[:1]]))
        shade = int(200 * (1 - j / max(1, m - 1)))
        parts.append(f'<polyline fill="none" stroke="rgb({shade},{shade},{shade})" points="{coords}"/>')
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")
