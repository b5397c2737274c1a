"""Volume integral equation solver for electromagnetic scattering by a penetrable body.

Galerkin discretization with trilinear hat functions on a uniform grid,
FFT-accelerated iterative or dense solution, and post-processing of
fields, far-field amplitudes and cross sections.
"""
from .errors import (ConfigError, EmptyScattererError, GridTooCoarseError, NonConvergenceError, ParameterError,
                     SingularityError, SolverError, VIEError)
from .medium import MediumParams, PlaneWave, derive_wavenumbers, incident_field, incident_curl
from .geometry import ScattererGrid, ScattererShape, box, ellipsoid, sphere, voxelize
from .kernels import green_tensor, green_tensor_fourier, grad_scalar_green, hessian_scalar_green, scalar_green
from .quadrature import (KernelTables, QuadratureRule, galerkin_g_entry, galerkin_grad_entry, integrate_g_cell,
                         kernel_tables)
from .assembly import BasisSet, GalerkinSystem, assemble, build_basis, dump_system, load_system, project
from .solver import SolveReport, solve, solve_dense, solve_iterative
from .postprocess import (CrossSections, FarFieldSample, FieldSolution, boundary_diagnostic, cross_sections,
                          eval_field, eval_H, eval_scattered, far_field, radiation_check, sphere_rule)

__version__ = "0.1.0"


def solve_scattering(shape, h, medium, incident, method="auto", rule=None, node_rule="cells", **solver_options):
    """Convenience pipeline: voxelize, build the basis, assemble and solve.

    Returns a :class:`FieldSolution`.
    """
    rule = QuadratureRule() if rule is None else rule
    grid = voxelize(shape, h, node_rule=node_rule)
    basis = build_basis(grid)
    system = assemble(grid, basis, medium, incident, rule)
    c, report = solve(system, method, **solver_options)
    return FieldSolution(c, system, report, rule)
