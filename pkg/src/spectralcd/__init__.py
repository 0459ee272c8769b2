"""Time-spectral stabilized finite elements for convection-diffusion."""

from .analytic import (SeriesSolution2D, asu_hat_groups, exact_1d, exact_2d,
                       galerkin_nodal_1d, kappa_asu, omega_hat_approx, omega_hat_exact,
                       tau_approx, tau_exact_1d, tau_max)
from .estimator import SpectralCDSolver
from .fem import (AssembledSystem, ProblemData, StabilizationMethod, Variant, assemble,
                  effective_coefficients, element_matrix, rd_reconstruct)
from .mesh import (Mesh, cylinder_tet_3d, metric_tensor, read_mesh, structured_quad_2d,
                   uniform_1d, write_mesh)
from .numerics import Cx, DimensionlessGroups, PhysicalParams, cx_fn, dimensionless_groups
from .solver import SolveReport, analytic_energy, gmres, quadratic_form
from .temporal import TemporalTrace, temporal_reference_1d

__version__ = "0.1.0"

__all__ = [
    "AssembledSystem", "Cx", "DimensionlessGroups", "Mesh", "PhysicalParams",
    "ProblemData", "SeriesSolution2D", "SolveReport", "SpectralCDSolver",
    "StabilizationMethod", "TemporalTrace", "Variant", "analytic_energy", "assemble",
    "asu_hat_groups", "cx_fn", "cylinder_tet_3d", "dimensionless_groups",
    "effective_coefficients", "element_matrix", "exact_1d", "exact_2d",
    "galerkin_nodal_1d", "gmres", "kappa_asu", "metric_tensor", "omega_hat_approx",
    "omega_hat_exact", "quadratic_form", "rd_reconstruct", "read_mesh",
    "structured_quad_2d", "tau_approx", "tau_exact_1d", "tau_max",
    "temporal_reference_1d", "uniform_1d", "write_mesh",
]
