"""A void inside an elastic body under uniaxial stretch.

The body fills a disk of radius 3 with displacement 0.05 x prescribed on its
outer edge.  The void boundary is traction free.  Elastic energy density on
the void boundary enters the step as a bulk term; the hole lengthens across
the pull direction while its area stays fixed.
"""

import numpy as np

from flatflow2d import BulkEnergyModel, ClosedCurve, Dirichlet, Domain, HookeTensor, StepConfig, run_flat_flow
from flatflow2d.elasticity import boundary_q, lame_thick_cylinder

hooke = HookeTensor(lame_lambda=1.0, lame_mu=1.0)

# Sanity check against the closed-form thick cylinder first.
a, R, delta = 0.5, 2.0, 0.01
radial = BulkEnergyModel.fem(hooke, Domain("disk", R), Dirichlet("radial", delta=delta), mesh_size=0.02)
q = boundary_q(radial, ClosedCurve.circle(a, 256))
exact = lame_thick_cylinder(hooke, a, R, delta)[2]
print(f"thick cylinder: boundary energy density {q.mean():.4e} vs closed form {exact:.4e}")

bulk = BulkEnergyModel.fem(
    hooke, Domain("disk", 3.0), Dirichlet("affine", matrix=((0.05, 0.0), (0.0, 0.0))), mesh_size=0.05
)
E0 = ClosedCurve.circle(1.0, 128)
traj = run_flat_flow(E0, StepConfig(h=2e-3, beta=0.1, bulk=bulk), T=0.02, stride=2)
for rec in traj.records[::2]:
    print(f"t = {rec['t']:.3f}: perimeter {rec['P_phi']:.5f}, elastic {rec['E_elastic']:.5f}, total {rec['F_total']:.5f}")
F = traj.final_curve
extent = np.ptp(F.nodes, axis=0)
print(f"final width {extent[0]:.4f}, height {extent[1]:.4f}, area drift {(F.area - E0.area) / E0.area:.1e}")
