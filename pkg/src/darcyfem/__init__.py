"""Finite element solvers and a verification harness for Darcy flow in
heterogeneous anisotropic porous media with a straight material interface.

Solvers: primal Galerkin potential, three stabilized equal-order mixed
formulations (mgls, hvm, cgls) with an optional interface-constrained
variant, and an interior-penalty broken potential method.
"""

from .assembly import (DofMap, LinearSystem, StabilizationParams,
                       apply_essential_bc, assemble_galerkin,
                       assemble_stabilized_mixed,
                       darcy_velocity_from_potential, params_for)
from .dg import (BrokenField, DGParams, assemble_dg, broken_from_continuous,
                 broken_from_function, default_beta0, dg_jump_average,
                 evaluate_broken_functional)
from .elements import (QuadratureRule, ShapeSet, default_rule, gauss_rule,
                       map_to_physical, reference_basis)
from .interface import (InterfaceTransform, build_interface_transform,
                        element_transform, pi_node, q_matrix,
                        recover_interface_solution, transform_element_system)
from .linsolve import (ResidualError, SingularMatrixError, SolverError,
                       compress, solve)
from .material import (MaterialField, crumpton_material, identity_material,
                       material_from_tensors, tensors_at)
from .mesh import (QuadMesh, build_structured_mesh, classify_interface,
                   dump_mesh)
from .verification import (BrokenSolution, ErrorReport, MixedSolution,
                           PrimalSolution, ProblemSpec, convergence_study,
                           crumpton_problem, fit_rate, l2_errors,
                           smooth_problem, solve_single,
                           verify_problem_consistency)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
