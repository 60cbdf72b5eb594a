"""Constrained minimizing movements for anisotropic surface diffusion of closed curves."""

from .anisotropy import Anisotropy, builtin_anisotropies
from .curve import (
    ClosedCurve,
    GraphBreakdown,
    HeightField,
    aniso_curvature,
    aniso_perimeter,
    curvature_expansion,
    extract_graph,
    gauss_bonnet,
    hausdorff,
    lift,
    project,
    ubc_radius,
)
from .elasticity import BulkEnergyModel, Dirichlet, Domain, HookeTensor, boundary_q, energy, solve_equilibrium
from .errors import (
    BackendFailure,
    DomainError,
    FlatFlowError,
    GraphBreakdownError,
    InfiniteDistanceError,
    MeshError,
    NonConvergenceError,
    OutOfTubeError,
    SolverError,
    StepFailure,
    ValidationError,
)
from .flow import FlowTrajectory, Halt, compare, run_flat_flow, run_pde_reference, sobolev_norms
from .hminus import dist, distance_between, xi_graph, xi_scan
from .step import StepConfig, StepResult, el_fixed_point_step, el_residual, minimize_step, run_step

__version__ = "0.1.0"
