"""Space-time Galerkin solver for the linear wave equation.

Continuous trial / discontinuous test functions in time on slabs, tensor
Lagrange elements in space, and a C1 lifting post-processor that raises the
temporal convergence order by one.
"""

from .analysis import (ErrorReport, LevelResult, METRICS, collect_errors,
                       discrete_energy, energy_error, eoc, l2_l2_error,
                       linf_l2_error)
from .cli import EnergyReport, StudyConfig, emit_tables, run_energy, run_single, run_study
from .fem import (FeSpace, Mesh, SpatialFunction, assemble_load, build_space,
                  interpolate, l2_project, ritz_project, spatial_h1_seminorm,
                  spatial_l2_norm, unit_square_mesh)
from .lifting import (LiftedTrajectory, ThetaPoly, build_theta, initial_derivative,
                      jump_from_equation, lift, lifted_deriv_eval, lifted_eval,
                      pointwise_residual)
from .linalg import (BlockOperator, NonConvergenceError, SingularMatrixError,
                     cg_solve, lu_factor, lu_solve, make_block_operator)
from .problems import WaveProblem, get_problem, problem_energy, problem_poly, problem_trig
from .quadrature import (NodalBasis, Rule1D, eval_lagrange, gauss_lobatto_rule,
                         gauss_rule, nodal_basis)
from .stepper import (MolSystem, SlabTrajectory, TimePartition, cgp_step,
                      evaluate, integrate, make_system, step_residual,
                      time_partition, uniform_partition)

__version__ = "0.1.0"

__all__ = [
    "BlockOperator", "EnergyReport", "ErrorReport", "FeSpace", "LevelResult",
    "LiftedTrajectory", "METRICS", "Mesh", "MolSystem", "NodalBasis",
    "NonConvergenceError", "Rule1D", "SingularMatrixError", "SlabTrajectory",
    "SpatialFunction", "StudyConfig", "ThetaPoly", "TimePartition",
    "WaveProblem", "assemble_load", "build_space", "build_theta", "cg_solve",
    "cgp_step", "collect_errors", "discrete_energy", "emit_tables",
    "energy_error", "eoc", "eval_lagrange", "evaluate", "gauss_lobatto_rule",
    "gauss_rule", "get_problem", "initial_derivative", "integrate",
    "interpolate", "jump_from_equation", "l2_l2_error", "l2_project", "lift",
    "lifted_deriv_eval", "lifted_eval", "linf_l2_error", "lu_factor",
    "lu_solve", "make_block_operator", "make_system", "nodal_basis",
    "pointwise_residual", "problem_energy", "problem_poly", "problem_trig",
    "ritz_project", "run_energy", "run_single", "run_study",
    "spatial_h1_seminorm", "spatial_l2_norm", "step_residual",
    "time_partition", "uniform_partition", "unit_square_mesh",
]
