"""Massive ODE/IM correspondence for the Bullough-Dodd model.

Field solver for the modified Bullough-Dodd equation on a cone, transport of
the associated 3x3 linear problem, Q-function extraction, the conformal
third-order equation, and QQ / Bethe Ansatz diagnostics.
"""
from .bethe import (
    ConformalSource,
    MassiveSource,
    SpectralScan,
    ZeroRecord,
    bae_residual,
    conformal_limit_study,
    find_q_zeros,
    qq_residual,
    scan_q,
)
from .conformal import (
    FrobeniusBasis,
    conformal_q_at_theta,
    conformal_q_triple,
    solve_y,
    wronskian3,
    z_function,
)
from .core import (
    BranchError,
    ConvergenceError,
    IntegrationError,
    ModelParams,
    SpectralPoint,
    find_zero,
    integrate_ray,
    omega,
    potential,
    scaling_map,
)
from .field import FieldConfig, FieldSolution, eta_eval, local_expansion_coeffs, solve_field
from .massive import compute_q_triple, massive_psi_k, massive_u, massive_wronskian, to_chi_gauge
from .qtypes import QTriple

__version__ = "0.1.0"

__all__ = [
    "BranchError",
    "ConformalSource",
    "ConvergenceError",
    "FieldConfig",
    "FieldSolution",
    "FrobeniusBasis",
    "IntegrationError",
    "MassiveSource",
    "ModelParams",
    "QTriple",
    "SpectralPoint",
    "SpectralScan",
    "ZeroRecord",
    "bae_residual",
    "compute_q_triple",
    "conformal_limit_study",
    "conformal_q_at_theta",
    "conformal_q_triple",
    "eta_eval",
    "find_q_zeros",
    "find_zero",
    "integrate_ray",
    "local_expansion_coeffs",
    "massive_psi_k",
    "massive_u",
    "massive_wronskian",
    "omega",
    "potential",
    "qq_residual",
    "scaling_map",
    "scan_q",
    "solve_field",
    "solve_y",
    "to_chi_gauge",
    "wronskian3",
    "z_function",
]
