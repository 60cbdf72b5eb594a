"""The scheme converges to surface diffusion as h -> 0.

The reference solution evolves V = d^2/ds^2 kappa with a semi-implicit
spectral method.  Halving h roughly halves the distance between the two
at the final time (first-order consistency).
"""

from flatflow2d import ClosedCurve, StepConfig, hausdorff, run_flat_flow, run_pde_reference

E0 = ClosedCurve.ellipse(1.2, 1 / 1.2, 128)
T = 0.05
# snapshots every 1e-3 so each flat-flow end time floor(T/h) h has an exact match
ref = run_pde_reference(E0, dt=1e-5, T=T, stride=100)
prev = None
for h in (4e-3, 2e-3, 1e-3):
    traj = run_flat_flow(E0, StepConfig(h=h, beta=0.1), T=T, track_tube=False)
    _, R = ref.snapshot_at(traj.times[-1])
    err = hausdorff(traj.final_curve, R)
    ratio = "" if prev is None else f"  (ratio {prev / err:.2f})"
    print(f"h = {h:.0e}: Hausdorff distance to the reference {err:.3e}{ratio}")
    prev = err
