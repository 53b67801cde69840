"""Canonical-system Hamiltonians from Hankel kernels via Fredholm determinants."""

__version__ = "0.1.0"

from .errors import (CanhamError, DomainError, InvalidInterval, K5Violation, KinkPoint,
                     LinearSolveFailure, NearSingular, SpecError)
from .kernels import KernelSpec, kernel_eval, kernel_fourier, kernel_validate, load_spec
from .quadrature import Resolution, assemble_nystrom, build_grid, gauss_nodes
from .fredholm import fredholm_det, hamiltonian_at, hamiltonian_curve, k5_certificate, spectrum_at
from .fields import Field, boundary_m, field_extend, m_from_mu, mu_at, relation_residuals, solve_field
from .canonical import Route, ab_ratio, ode_residual, pde_residual, theta_consistency
from .modelspace import (boundary_identity, decay_scan, energy_identity, j_kernel,
                         solve_projection_eqs)

__all__ = [
    "CanhamError", "DomainError", "InvalidInterval", "K5Violation", "KinkPoint",
    "LinearSolveFailure", "NearSingular", "SpecError",
    "KernelSpec", "kernel_eval", "kernel_fourier", "kernel_validate", "load_spec",
    "Resolution", "assemble_nystrom", "build_grid", "gauss_nodes",
    "fredholm_det", "hamiltonian_at", "hamiltonian_curve", "k5_certificate", "spectrum_at",
    "Field", "boundary_m", "field_extend", "m_from_mu", "mu_at", "relation_residuals", "solve_field",
    "Route", "ab_ratio", "ode_residual", "pde_residual", "theta_consistency",
    "boundary_identity", "decay_scan", "energy_identity", "j_kernel", "solve_projection_eqs",
]
