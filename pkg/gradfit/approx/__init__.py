"""Local and global best approximation of gradients."""

from gradfit.approx.bounds import (
    LocalConstants,
    basis_norms,
    bramble_hilbert_constant,
    delta_k_bound,
    inverse_estimate_check,
    local_constants,
    node_mu,
    poincare_trace_constants,
    trace_inequality_check,
)
from gradfit.approx.diagnostics import (
    AprioriBound,
    DecouplingResult,
    InterpolationResult,
    apriori_bound,
    bramble_hilbert_ratios,
    coefficient_rows,
    decoupling_ratio,
    diagnostics_record,
    interpolation_error,
    local_decoupling_bound,
    local_error_sum,
    nodal_deviation_check,
    partial_decoupling_ratio,
    partial_error_sum,
    theoretical_decoupling_constant,
)
from gradfit.approx.interpolant import interpolate
from gradfit.approx.local import (
    ErrorFunctional,
    LocalBestFit,
    decoupled_local_error,
    epsilon,
    local_best_fit,
    local_epsilons,
    total_epsilon,
)
from gradfit.approx.ritz import RitzResult, assemble_stiffness, energy_error, ritz_projection
from gradfit.approx.space import FeFunction, FeSpace, build_space
from gradfit.approx.target import TargetFunction, check_gradient

__all__ = [
    "AprioriBound",
    "DecouplingResult",
    "ErrorFunctional",
    "FeFunction",
    "FeSpace",
    "InterpolationResult",
    "LocalBestFit",
    "LocalConstants",
    "RitzResult",
    "TargetFunction",
    "apriori_bound",
    "assemble_stiffness",
    "basis_norms",
    "bramble_hilbert_constant",
    "bramble_hilbert_ratios",
    "build_space",
    "check_gradient",
    "coefficient_rows",
    "decoupled_local_error",
    "decoupling_ratio",
    "delta_k_bound",
    "diagnostics_record",
    "energy_error",
    "epsilon",
    "interpolate",
    "interpolation_error",
    "inverse_estimate_check",
    "local_best_fit",
    "local_constants",
    "local_decoupling_bound",
    "local_epsilons",
    "local_error_sum",
    "nodal_deviation_check",
    "node_mu",
    "partial_decoupling_ratio",
    "partial_error_sum",
    "poincare_trace_constants",
    "ritz_projection",
    "theoretical_decoupling_constant",
    "total_epsilon",
    "trace_inequality_check",
]
