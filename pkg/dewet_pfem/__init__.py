"""
dewet_pfem - parametric finite element simulation of 2D solid-state dewetting.

A thin film on a flat substrate is represented by an open polygonal curve
whose ends slide along y = 0. The curve evolves by surface diffusion with
relaxed contact-angle conditions at the contact points; time stepping is
backward Euler (ZJB), predictor-corrector (PC) or BDF2..BDF4.

make_stepper() -- creates a stepper for a scheme and initial curve
evolve() / evolve_to_equilibrium() -- run trajectories with diagnostics
"""
from . import scheme_type
from .curve import (
    Diagnostics,
    PolygonalCurve,
    ShapeSpec,
    contact_angles,
    diagnostics,
    discrete_energy,
    enclosed_area,
    from_shape,
    mesh_ratio,
    read_curve_csv,
    write_curve_csv,
)
from .exceptions import *
from .harness import (
    StudySpec,
    TrajectoryRecord,
    angle_convergence_study,
    cauchy_study,
    equilibrium_sweep,
    evolve,
    evolve_to_equilibrium,
    wulff_study,
)
from .metrics import ConvergenceReport, convergence_orders, manifold_distance, region_of, wulff_shape
from .schemes import (
    CurveHistory,
    SchemeParams,
    bdf_step,
    bootstrap,
    initial_curvature,
    make_stepper,
    pc_step,
    zjb_step,
)

__all__ = [
    'scheme_type',
    'PolygonalCurve',
    'Diagnostics',
    'ShapeSpec',
    'from_shape',
    'enclosed_area',
    'discrete_energy',
    'mesh_ratio',
    'contact_angles',
    'diagnostics',
    'read_curve_csv',
    'write_curve_csv',
    'SchemeParams',
    'CurveHistory',
    'make_stepper',
    'zjb_step',
    'pc_step',
    'bdf_step',
    'bootstrap',
    'initial_curvature',
    'region_of',
    'manifold_distance',
    'wulff_shape',
    'convergence_orders',
    'ConvergenceReport',
    'TrajectoryRecord',
    'StudySpec',
    'evolve',
    'evolve_to_equilibrium',
    'cauchy_study',
    'wulff_study',
    'angle_convergence_study',
    'equilibrium_sweep',
    'Error',
    'ParameterError',
    'ConfigError',
    'CurveError',
    'DegenerateMeshError',
    'ContactCrossingError',
    'RegionError',
    'NonSimpleRegionError',
    'ClippingError',
    'SchemeError',
    'WellPosednessError',
    'SolveError',
    'RankDeficientError',
    'HistoryError',
    'StepFailure',
    'HarnessError',
    'TrajectoryError',
    'EquilibriumNotReached',
]
