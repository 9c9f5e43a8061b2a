"""Inverse best approximation property for finite subspace families.

Decide whether every prescription of best approximations from a family
of subspaces is attainable, produce the geometric certificates behind
that decision, and compute minimal-norm and best-approximation solutions
of the resulting prescribed-projection problems, directly or by periodic
projections with an a-priori linear rate bound.
"""

from .angles import (
    DEGENERACY_BAND,
    angle_identity_gap,
    cos_friedrichs,
    is_degenerate,
    projector_product_norm,
)
from .applications import (
    HypothesisError,
    MaskedSignalProblem,
    SlowFamilySpec,
    dft,
    dft_matrix,
    idft,
    recover_with_measurements,
    slow_convergence_demo,
    slow_family,
    solve_moments,
    solve_operator_system,
    time_frequency_recover,
    worst_aligned_start,
)
from .family import (
    BiorthogonalReport,
    DependentFamilyError,
    Family,
    FEASIBILITY_RTOL,
    IbapFailureError,
    IbapReport,
    InfeasibilityCertificate,
    InfeasiblePrescriptionError,
    LevelCertificate,
    PairBound,
    biorthogonal_bounds,
    check_independence,
    dependent_tuple,
    epsilon_solve,
    infeasibility_certificate,
    trailing_sums,
    uniqueness_check,
    validate_prescription,
    verify_ibap,
)
from .solvers import (
    AffineConstraint,
    ConvergenceTrace,
    IterationRecord,
    SolutionSet,
    SolveOptions,
    affine_project,
    best_approximation,
    direct_solve,
    extend_min_norm,
    min_norm_stages,
    prescription_residual,
    rate_bound,
    solve_min_norm,
    solve_two,
)
from .subspaces import (
    COMPLEX,
    MEMBERSHIP_RTOL,
    ORTHONORMALITY_TOL,
    REAL,
    Subspace,
    add,
    add_all,
    as_field_vector,
    field_dtype,
    inner,
    intersect,
)

__version__ = "0.1.0"

__all__ = [
    "AffineConstraint",
    "BiorthogonalReport",
    "COMPLEX",
    "ConvergenceTrace",
    "DEGENERACY_BAND",
    "DependentFamilyError",
    "FEASIBILITY_RTOL",
    "Family",
    "HypothesisError",
    "IbapFailureError",
    "IbapReport",
    "InfeasibilityCertificate",
    "InfeasiblePrescriptionError",
    "IterationRecord",
    "LevelCertificate",
    "MEMBERSHIP_RTOL",
    "MaskedSignalProblem",
    "ORTHONORMALITY_TOL",
    "PairBound",
    "REAL",
    "SlowFamilySpec",
    "SolutionSet",
    "SolveOptions",
    "Subspace",
    "add",
    "add_all",
    "affine_project",
    "angle_identity_gap",
    "as_field_vector",
    "best_approximation",
    "biorthogonal_bounds",
    "check_independence",
    "cos_friedrichs",
    "dependent_tuple",
    "dft",
    "dft_matrix",
    "direct_solve",
    "epsilon_solve",
    "extend_min_norm",
    "field_dtype",
    "idft",
    "infeasibility_certificate",
    "inner",
    "intersect",
    "is_degenerate",
    "min_norm_stages",
    "prescription_residual",
    "projector_product_norm",
    "rate_bound",
    "recover_with_measurements",
    "slow_convergence_demo",
    "slow_family",
    "solve_min_norm",
    "solve_moments",
    "solve_operator_system",
    "solve_two",
    "time_frequency_recover",
    "trailing_sums",
    "uniqueness_check",
    "validate_prescription",
    "verify_ibap",
    "worst_aligned_start",
]
