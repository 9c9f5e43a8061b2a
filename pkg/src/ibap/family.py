"""Families of subspaces and the inverse best approximation property.

A family (U_1, ..., U_m) satisfies the inverse best approximation
property (IBAP) when every prescription (u_1, ..., u_m) with u_i in U_i
is realized as the tuple of best approximations of some point x, that is
P_i x = u_i for all i.  In finite dimension this holds exactly when the
subspaces are linearly independent; the per-level certificates computed
here (trailing-sum projector norms, Friedrichs angles, gamma constants)
quantify how well-conditioned that decision is and feed the convergence
rate bound of the iterative solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .angles import DEGENERACY_BAND, cos_friedrichs, projector_product_norm
from .subspaces import (
    MEMBERSHIP_RTOL,
    Subspace,
    _check_compatible,
    _rank_from_singular_values,
    add,
    as_field_vector,
    intersect,
)

#: relative residual above which a stacked prescription system is
#: declared inconsistent
FEASIBILITY_RTOL = 1e-8


class DependentFamilyError(ValueError):
    """The subspaces admit a nonzero tuple summing to zero.

    The certificate attribute holds such a tuple (u_1, ..., u_m), one
    vector per subspace, scaled so the largest has unit norm.
    """

    def __init__(self, message: str, certificate):
        super().__init__(message)
        self.certificate = certificate


class IbapFailureError(ValueError):
    """An operation requiring the IBAP was invoked on a family without it."""

    def __init__(self, message: str, report: "IbapReport"):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class InfeasibilityCertificate:
    """Witness that a prescription admits no exact solution.

    residual is the stacked least-squares gap; best_point attains it.
    """

    residual: float
    best_point: np.ndarray


class InfeasiblePrescriptionError(ValueError):
    def __init__(self, message: str, certificate: InfeasibilityCertificate):
        super().__init__(message)
        self.certificate = certificate


@dataclass(frozen=True, eq=False)
class Family:
    """An ordered family of subspaces sharing ambient dimension and field."""

    subspaces: tuple

    def __post_init__(self):
        subs = tuple(self.subspaces)
        if not subs:
            raise ValueError("a family needs at least one subspace")
        for s in subs:
            if not isinstance(s, Subspace):
                raise TypeError(f"family members must be Subspace, got {type(s).__name__}")
            _check_compatible(subs[0], s)
        object.__setattr__(self, "subspaces", subs)

    @property
    def ambient_dim(self) -> int:
        return self.subspaces[0].ambient_dim

    @property
    def field(self) -> str:
        return self.subspaces[0].field

    @property
    def dtype(self):
        return self.subspaces[0].dtype

    @property
    def dims(self) -> tuple:
        return tuple(s.dim for s in self.subspaces)

    def __len__(self) -> int:
        return len(self.subspaces)

    def __iter__(self):
        return iter(self.subspaces)

    def __getitem__(self, i):
        return self.subspaces[i]

    def __repr__(self) -> str:
        return f"Family(dims={list(self.dims)}, ambient={self.ambient_dim}, field={self.field})"


@dataclass(frozen=True)
class LevelCertificate:
    """Certificates for one level i, pairing U_i against the trailing sum.

    norm is the projector-product norm of the pair, cos_angle the
    Friedrichs angle cosine, gamma the optimal constant bounding
    ||u|| <= gamma * ||(I - P_trailing) u|| over u in U_i (infinite when
    the pair is degenerate).  degenerate flags norms within the numerical
    band of 1.
    """

    index: int
    norm: float
    cos_angle: float
    gamma: float
    degenerate: bool


@dataclass(frozen=True)
class IbapReport:
    """Outcome of the IBAP decision with its per-level certificates.

    verdict coincides with linear independence of the subspaces, the
    exact finite-dimensional criterion; alpha is the a-priori linear
    rate bound of the periodic projection iteration (1.0 when no
    uniform guarantee exists).
    """

    verdict: bool
    independent: bool
    levels: tuple
    alpha: float
    sum_dims: int
    dim_sum: int


def trailing_sums(family: Family) -> list:
    """For each level i < m, the sum of the subspaces after it."""
    subs = family.subspaces
    out = [subs[-1]]
    for s in reversed(subs[1:-1]):
        out.append(add(s, out[-1]))
    out.reverse()
    return out


def _stacked_basis(family: Family) -> np.ndarray:
    return np.hstack([s.basis for s in family.subspaces])


def _family_rank_tol(family: Family) -> float:
    return max(s.rank_tol for s in family.subspaces)


def _spanning_rank_and_null(family: Family):
    """Rank of the stacked bases and, if deficient, a null coefficient vector."""
    mat = _stacked_basis(family)
    total = mat.shape[1]
    if total == 0:
        return 0, None
    _, s, vh = np.linalg.svd(mat, full_matrices=True)
    rank = _rank_from_singular_values(s, mat.shape, _family_rank_tol(family))
    if rank == total:
        return rank, None
    return rank, vh[-1].conj()


def check_independence(family: Family) -> bool:
    """Whether the only tuple with u_i in U_i and zero sum is the zero tuple.

    Finite-dimensional test: the dimension of the sum equals the sum of
    the dimensions.
    """
    rank, _ = _spanning_rank_and_null(family)
    return rank == sum(family.dims)


def dependent_tuple(family: Family):
    """A nonzero tuple (u_i) with u_i in U_i and sum zero, or None.

    Such a tuple certifies both linear dependence and, by the zero-sum
    infeasibility argument, a prescription with empty solution set.
    """
    rank, coeff = _spanning_rank_and_null(family)
    if coeff is None:
        return None
    parts = []
    offset = 0
    for s in family.subspaces:
        parts.append(s.basis @ coeff[offset:offset + s.dim])
        offset += s.dim
    scale = max(float(np.linalg.norm(p)) for p in parts)
    return [p / scale for p in parts]


def _rate_alpha(family: Family) -> float:
    """Rate bound from the Friedrichs angles of the complements.

    alpha = sqrt(1 - prod_i (1 - c_i^2)) with c_i the angle cosine
    between the complement of U_i and the intersection of the trailing
    complements.
    """
    subs = family.subspaces
    m = len(subs)
    if m == 1:
        return 0.0
    comps = [s.complement() for s in subs]
    tail = comps[-1]
    prod = 1.0
    for i in range(m - 2, -1, -1):
        c = cos_friedrichs(comps[i], tail)
        prod *= 1.0 - c * c
        if i:
            tail = intersect(comps[i], tail)
    return math.sqrt(max(0.0, 1.0 - prod))


def verify_ibap(family: Family) -> IbapReport:
    """Decide the IBAP and assemble all per-level certificates.

    The verdict is driven by exact-rank independence; the level norms
    serve as conditioning certificates, with degenerate flags for norms
    inside the numerical band of 1.  Degenerate numerics never raise.
    """
    subs = family.subspaces
    m = len(subs)
    rank, _ = _spanning_rank_and_null(family)
    sum_dims = sum(family.dims)
    independent = rank == sum_dims
    levels = []
    if m > 1:
        for i, tail in enumerate(trailing_sums(family)):
            norm = projector_product_norm(subs[i], tail)
            cosang = cos_friedrichs(subs[i], tail)
            degenerate = norm >= 1.0 - DEGENERACY_BAND
            gamma = 1.0 / math.sqrt(1.0 - norm * norm) if norm < 1.0 else math.inf
            levels.append(LevelCertificate(index=i + 1, norm=norm, cos_angle=cosang,
                                           gamma=gamma, degenerate=degenerate))
    verdict = independent
    alpha = _rate_alpha(family) if verdict else 1.0
    return IbapReport(verdict=verdict, independent=independent, levels=tuple(levels),
                      alpha=alpha, sum_dims=sum_dims, dim_sum=rank)


def validate_prescription(family: Family, prescription) -> list:
    """Check one vector per subspace, each a member of its subspace.

    Membership violations are errors, never silent projections.
    """
    prescription = list(prescription)
    if len(prescription) != len(family):
        raise ValueError(f"prescription has {len(prescription)} vectors for {len(family)} subspaces")
    out = []
    for i, (s, u) in enumerate(zip(family.subspaces, prescription)):
        u = as_field_vector(u, family.ambient_dim, family.dtype, what=f"prescription vector {i + 1}")
        gap = float(np.linalg.norm(s.project(u) - u))
        if gap > MEMBERSHIP_RTOL * max(1.0, float(np.linalg.norm(u))):
            raise ValueError(f"prescription vector {i + 1} is not in its subspace (distance {gap:.3e})")
        out.append(u)
    return out


def stacked_lstsq(family: Family, prescription: list):
    """Minimal-norm least-squares solution of the stacked coordinate system.

    Rows are the conjugate-transposed bases, so the system is equivalent
    to P_i x = u_i for prescriptions inside their subspaces.  Returns
    (x, residual, scale) with scale = 1 + norm of the right-hand side.
    """
    n = family.ambient_dim
    rows = [s.basis.conj().T for s in family.subspaces]
    rhs = [s.basis.conj().T @ u for s, u in zip(family.subspaces, prescription)]
    a = np.vstack(rows)
    b = np.concatenate(rhs) if rhs else np.zeros(0, dtype=family.dtype)
    if a.shape[0] == 0:
        return np.zeros(n, dtype=family.dtype), 0.0, 1.0
    x, _, _, _ = np.linalg.lstsq(a, b, rcond=None)
    residual = float(np.linalg.norm(a @ x - b))
    return x, residual, 1.0 + float(np.linalg.norm(b))


def infeasibility_certificate(family: Family, prescription):
    """Certificate that the prescription has no solution, or None.

    A zero-sum prescription with nonzero members always produces one.
    """
    pres = validate_prescription(family, prescription)
    x, residual, scale = stacked_lstsq(family, pres)
    if residual > FEASIBILITY_RTOL * scale:
        return InfeasibilityCertificate(residual=residual, best_point=x)
    return None


def epsilon_solve(family: Family, prescription, epsilon: float) -> np.ndarray:
    """Point whose projections approximate the prescription within epsilon.

    Linear independence is required and, in finite dimension, yields the
    exact solution; the returned residual is limited only by numerics.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    pres = validate_prescription(family, prescription)
    cert = dependent_tuple(family)
    if cert is not None:
        raise DependentFamilyError(
            "the subspaces are linearly dependent; approximate prescriptions are unattainable",
            cert)
    x, residual, _ = stacked_lstsq(family, pres)
    if residual > epsilon:
        raise ArithmeticError(
            f"stacked solve residual {residual:.3e} exceeds epsilon {epsilon:.3e}")
    return x


def uniqueness_check(family: Family) -> bool:
    """Whether prescriptions admit at most one solution.

    True exactly when the intersection of the complements is trivial,
    i.e. the subspaces together span the whole space.
    """
    rank, _ = _spanning_rank_and_null(family)
    return rank == family.ambient_dim


@dataclass(frozen=True)
class PairBound:
    """Sandwich bounds for one pair of nearly bi-orthogonal sequences.

    sup_inner is the largest same-index scalar product magnitude; the
    computed projector-product norm of the two spans must lie between
    its square and itself.
    """

    pair: tuple
    sup_inner: float
    lower: float
    upper: float
    norm: float


@dataclass(frozen=True)
class BiorthogonalReport:
    pairs: tuple
    condition_sum: float
    family: Family
    ibap: IbapReport


def biorthogonal_bounds(sequences, tol: float = 1e-10) -> BiorthogonalReport:
    """Bounds relating same-index scalar products to projector norms.

    Takes three orthonormal vector sequences of equal finite length whose
    members at different indices are pairwise orthogonal across
    sequences.  For each pair of sequences the projector-product norm of
    the spans is sandwiched between the squared and plain supremum of the
    same-index scalar products.  The report also carries the sufficient
    condition sum (the three square-rooted suprema); when it is below 1
    the spanned family satisfies the IBAP.
    """
    sequences = [list(seq) for seq in sequences]
    if len(sequences) != 3:
        raise ValueError("exactly three sequences are required")
    length = len(sequences[0])
    if length == 0 or any(len(seq) != length for seq in sequences):
        raise ValueError("sequences must share the same positive length")
    mats = []
    for i, seq in enumerate(sequences):
        cols = np.column_stack([np.asarray(v) for v in seq])
        gram_defect = np.max(np.abs(cols.conj().T @ cols - np.eye(length)))
        if gram_defect > tol:
            raise ValueError(f"sequence {i + 1} is not orthonormal (defect {gram_defect:.3e})")
        mats.append(cols)
    pairs = []
    sup_inners = {}
    for i in range(3):
        for j in range(i + 1, 3):
            cross = mats[i].conj().T @ mats[j]
            off = cross - np.diag(np.diag(cross))
            worst = float(np.max(np.abs(off))) if length > 1 else 0.0
            if worst > tol:
                raise ValueError(
                    f"sequences {i + 1} and {j + 1} are not cross-orthogonal "
                    f"off the diagonal (defect {worst:.3e})")
            sup_inners[(i, j)] = float(np.max(np.abs(np.diag(cross))))
    spans = [Subspace.from_spanning(list(m.T), m.shape[0]) for m in mats]
    for i in range(3):
        for j in range(i + 1, 3):
            sup = sup_inners[(i, j)]
            norm = projector_product_norm(spans[i], spans[j])
            pairs.append(PairBound(pair=(i + 1, j + 1), sup_inner=sup,
                                   lower=sup * sup, upper=sup, norm=norm))
    condition_sum = sum(math.sqrt(p.sup_inner) for p in pairs)
    fam = Family(tuple(spans))
    return BiorthogonalReport(pairs=tuple(pairs), condition_sum=condition_sum,
                              family=fam, ibap=verify_ibap(fam))
