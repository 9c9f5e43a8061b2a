"""Solvers for prescribed-projection problems.

Four routes are provided and cross-checked by the test suite:

* a closed form for two constraints, exact when the projector-product
  norm of the pair is below 1;
* a finite recursion that extends a trailing minimal-norm solution one
  level at a time, yielding the global minimal-norm solution;
* a direct stacked least-squares solver, which doubles as the reference
  oracle and produces the full solution set (particular point plus
  parallel subspace);
* the periodic projection iteration onto the affine constraint sets,
  with an a-priori linear rate bound from the complement angles.

The operator inverses (Id - P_U P_V)^(-1) appearing in the closed form
and the recursion are realized as small Hermitian solves in basis
coordinates, never as power series.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .angles import projector_product_norm
from .family import (
    FEASIBILITY_RTOL,
    Family,
    IbapFailureError,
    InfeasibilityCertificate,
    InfeasiblePrescriptionError,
    stacked_lstsq,
    trailing_sums,
    validate_prescription,
    verify_ibap,
)
from .subspaces import MEMBERSHIP_RTOL, Subspace, _check_compatible, add_all, as_field_vector

#: pair solves refuse projector-product norms at or beyond this value
NORM_GUARD = 1.0 - 1e-12


@dataclass(frozen=True, eq=False)
class AffineConstraint:
    """The requirement that the best approximation from `subspace` be `point`.

    Equivalently, membership in the affine set point + complement; the
    point must belong to the subspace.
    """

    subspace: Subspace
    point: np.ndarray

    def __post_init__(self):
        u = as_field_vector(self.point, self.subspace.ambient_dim, self.subspace.dtype,
                            what="constraint point")
        gap = float(np.linalg.norm(self.subspace.project(u) - u))
        if gap > MEMBERSHIP_RTOL * max(1.0, float(np.linalg.norm(u))):
            raise ValueError(f"constraint point is not in its subspace (distance {gap:.3e})")
        u = u.copy()
        u.setflags(write=False)
        object.__setattr__(self, "point", u)

    @classmethod
    def from_affine_set(cls, point, parallel: Subspace) -> "AffineConstraint":
        """Constraint for the affine set point + parallel.

        Membership in that set is equivalent to projecting, on the
        complement of the parallel subspace, to the point's own
        projection there.
        """
        sub = parallel.complement()
        return cls(sub, sub.project(point))


@dataclass(frozen=True)
class SolveOptions:
    max_iter: int = 10000
    tol: float = 1e-10
    record_trace: bool = False

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")


@dataclass(frozen=True)
class IterationRecord:
    """State after one full sweep: constraint residual, optional distance
    to the true best approximation, and the theoretical bound value."""

    index: int
    max_residual: float
    dist_to_solution: float | None
    bound: float | None


@dataclass(frozen=True)
class ConvergenceTrace:
    records: tuple
    alpha: float | None
    initial_distance: float | None
    converged: bool
    sweeps: int


@dataclass(frozen=True, eq=False)
class SolutionSet:
    """The affine solution set: a particular solution plus the parallel
    subspace (the intersection of all constraint complements)."""

    particular: np.ndarray
    parallel: Subspace


def affine_project(constraint: AffineConstraint, x) -> np.ndarray:
    """Projection onto the constraint's affine set: u + x - P x."""
    u = constraint.subspace
    x = as_field_vector(x, u.ambient_dim, u.dtype)
    return constraint.point + x - u.project(x)


def _pair_gram(u: Subspace, v: Subspace) -> np.ndarray:
    return u.basis.conj().T @ v.basis


def _solve_id_minus(u: Subspace, v: Subspace, w: np.ndarray) -> np.ndarray:
    """Solve (Id - P_u P_v) y = w as a dim(u)-sized Hermitian system.

    The solution differs from w by an element of u, so it suffices to
    solve for those coordinates.  Requires the pair norm below 1.
    """
    p = u.dim
    if p == 0:
        return w.copy()
    g = _pair_gram(u, v)
    core = np.eye(p, dtype=u.dtype) - g @ g.conj().T
    rhs = g @ (v.basis.conj().T @ w)
    return w + u.basis @ np.linalg.solve(core, rhs)


def _require_pair_norm(u: Subspace, v: Subspace) -> float:
    norm = projector_product_norm(u, v)
    if norm >= NORM_GUARD:
        raise ValueError(
            f"projector-product norm {norm:.17g} is too close to 1: "
            "the two-subspace inverse best approximation hypothesis fails")
    return norm


def solve_two(c1: AffineConstraint, c2: AffineConstraint) -> np.ndarray:
    """Minimal-norm point satisfying two prescribed-projection constraints.

    Closed form in basis coordinates: with g the cross-Gram matrix of the
    bases and (a, b) the coordinates of the two prescribed points, the
    components solve (I - g g*) and (I - g* g) systems.  The result lies
    in the sum of the subspaces, hence is the minimal-norm solution.
    """
    u, v = c1.subspace, c2.subspace
    _check_compatible(u, v)
    _require_pair_norm(u, v)
    g = _pair_gram(u, v)
    a = u.basis.conj().T @ c1.point
    b = v.basis.conj().T @ c2.point
    out = np.zeros(u.ambient_dim, dtype=u.dtype)
    if u.dim:
        core = np.eye(u.dim, dtype=u.dtype) - g @ g.conj().T
        out = out + u.basis @ np.linalg.solve(core, a - g @ b)
    if v.dim:
        core = np.eye(v.dim, dtype=v.dtype) - g.conj().T @ g
        out = out + v.basis @ np.linalg.solve(core, b - g.conj().T @ a)
    return out


def extend_min_norm(level: Subspace, trailing: Subspace, u, v) -> np.ndarray:
    """One step of the minimal-norm recursion.

    Given the prescribed point u in `level` and a point v of `trailing`
    (the minimal-norm solution of the constraints after this level),
    returns the point of level + trailing projecting to u on `level` and
    to v on `trailing`.  Applies the two resolvent solves
    (Id - P P')^(-1) to u - P v and v - P' u.
    """
    _check_compatible(level, trailing)
    u = as_field_vector(u, level.ambient_dim, level.dtype, what="level point")
    v = as_field_vector(v, level.ambient_dim, level.dtype, what="trailing point")
    if not level.contains(u):
        raise ValueError("level point is not in the level subspace")
    if not trailing.contains(v):
        raise ValueError("trailing point is not in the trailing subspace")
    _require_pair_norm(level, trailing)
    w1 = u - level.project(v)
    w2 = v - trailing.project(u)
    return _solve_id_minus(level, trailing, w1) + _solve_id_minus(trailing, level, w2)


def min_norm_stages(family: Family, prescription) -> list:
    """Intermediate minimal-norm solutions of the trailing subsystems.

    Entry j solves the last j+1 constraints; the final entry is the
    minimal-norm solution of the whole prescription.  Requires the IBAP.
    """
    report = verify_ibap(family)
    if not report.verdict:
        raise IbapFailureError(
            "family does not satisfy the inverse best approximation property", report)
    pres = validate_prescription(family, prescription)
    subs = family.subspaces
    stages = [pres[-1]]
    if len(subs) == 1:
        return stages
    tails = trailing_sums(family)
    x = pres[-1]
    for i in range(len(subs) - 2, -1, -1):
        x = extend_min_norm(subs[i], tails[i], pres[i], x)
        stages.append(x)
    return stages


def solve_min_norm(family: Family, prescription) -> np.ndarray:
    """Minimal-norm solution of the prescribed-projection problem."""
    return min_norm_stages(family, prescription)[-1]


def prescription_residual(family: Family, prescription, x) -> float:
    """max_i || P_i x - u_i ||, the observable constraint residual."""
    x = as_field_vector(x, family.ambient_dim, family.dtype)
    return max(float(np.linalg.norm(s.project(x) - u))
               for s, u in zip(family.subspaces, prescription))


def direct_solve(family: Family, prescription, anchor=None) -> SolutionSet:
    """Stacked least-squares reference solver.

    Solves all constraints at once by minimal-norm least squares; with an
    anchor, shifts the particular solution to the closest point of the
    solution set.  Raises with an infeasibility certificate when the
    stacked system is inconsistent.
    """
    pres = validate_prescription(family, prescription)
    x, residual, scale = stacked_lstsq(family, pres)
    if residual > FEASIBILITY_RTOL * scale:
        raise InfeasiblePrescriptionError(
            f"prescription is infeasible (stacked residual {residual:.3e})",
            InfeasibilityCertificate(residual=residual, best_point=x))
    parallel = add_all(family.subspaces).complement()
    if anchor is not None:
        anchor = as_field_vector(anchor, family.ambient_dim, family.dtype, what="anchor")
        x = x + parallel.project(anchor - x)
    return SolutionSet(particular=x, parallel=parallel)


def rate_bound(family: Family) -> float:
    """A-priori linear rate of the periodic projection iteration.

    Computed from the Friedrichs angles between each complement and the
    intersection of the trailing complements; lies in [0, 1) whenever the
    family satisfies the IBAP, which is required.
    """
    report = verify_ibap(family)
    if not report.verdict:
        raise IbapFailureError("rate bound presupposes the inverse best approximation property",
                               report)
    return report.alpha


def best_approximation(start, family: Family, prescription,
                       options: SolveOptions | None = None):
    """Periodic projection iteration from `start` onto the solution set.

    Each sweep applies the affine projectors of the constraints from the
    last to the first.  Stops when the constraint residual drops to
    options.tol or after options.max_iter sweeps; both outcomes are
    recorded in the returned trace.  When the family satisfies the IBAP
    the trace carries the bound values alpha^n * d0 against the true best
    approximation.  Returns (point, trace).
    """
    opts = options if options is not None else SolveOptions()
    pres = validate_prescription(family, prescription)
    start = as_field_vector(start, family.ambient_dim, family.dtype, what="start")
    report = verify_ibap(family)
    alpha = report.alpha if report.verdict else None
    reference = None
    if report.verdict or opts.record_trace:
        reference = direct_solve(family, pres, anchor=start).particular
    else:
        x0, residual, scale = stacked_lstsq(family, pres)
        if residual > FEASIBILITY_RTOL * scale:
            raise InfeasiblePrescriptionError(
                f"prescription is infeasible (stacked residual {residual:.3e})",
                InfeasibilityCertificate(residual=residual, best_point=x0))
    d0 = float(np.linalg.norm(start - reference)) if reference is not None else None
    constraints = [AffineConstraint(s, u) for s, u in zip(family.subspaces, pres)]
    x = start
    records = []
    converged = False
    sweeps = 0
    for n in range(1, opts.max_iter + 1):
        sweeps = n
        for c in reversed(constraints):
            x = affine_project(c, x)
        res = prescription_residual(family, pres, x)
        dist = None
        if opts.record_trace and reference is not None:
            dist = float(np.linalg.norm(x - reference))
        bound = alpha ** n * d0 if alpha is not None else None
        records.append(IterationRecord(index=n, max_residual=res,
                                       dist_to_solution=dist, bound=bound))
        if res <= opts.tol:
            converged = True
            break
    trace = ConvergenceTrace(records=tuple(records), alpha=alpha,
                             initial_distance=d0, converged=converged, sweeps=sweeps)
    return x, trace
