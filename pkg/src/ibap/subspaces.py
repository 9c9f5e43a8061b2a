"""Subspaces of R^n and C^n held as column-orthonormal bases.

Everything else in this package (projectors, angles, feasibility checks,
solvers) reduces to small dense linear algebra on these bases.  Subspace
values are immutable after construction and safe to share across threads;
no operation mutates its inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

REAL = "real"
COMPLEX = "complex"

#: max-norm tolerance for the orthonormality invariant of stored bases
ORTHONORMALITY_TOL = 1e-12

#: relative tolerance for "u lies in U" membership checks
MEMBERSHIP_RTOL = 1e-8

_EPS = float(np.finfo(np.float64).eps)


def field_dtype(field: str) -> np.dtype:
    """numpy dtype backing a field tag, either "real" or "complex"."""
    if field == REAL:
        return np.dtype(np.float64)
    if field == COMPLEX:
        return np.dtype(np.complex128)
    raise ValueError(f"unknown field {field!r}, expected 'real' or 'complex'")


def inner(x, y):
    """Scalar product, linear in x and conjugate-linear in y."""
    return np.vdot(np.asarray(y), np.asarray(x))


def as_field_vector(x, ambient_dim: int, dtype, what: str = "vector") -> np.ndarray:
    """Coerce x to a length-ambient_dim vector of the given dtype.

    Complex input with a nonzero imaginary part is rejected when the
    target dtype is real.
    """
    arr = np.asarray(x)
    if arr.shape != (ambient_dim,):
        raise ValueError(f"{what} has shape {arr.shape}, expected ({ambient_dim},)")
    if np.iscomplexobj(arr) and np.dtype(dtype) == np.float64:
        if np.any(arr.imag != 0):
            raise ValueError(f"{what} has nonzero imaginary entries in a real problem")
        arr = arr.real
    return np.asarray(arr, dtype=dtype)


def _rank_from_singular_values(s: np.ndarray, shape, rank_tol: float) -> int:
    if s.size == 0 or s[0] <= 0.0:
        return 0
    rel = rank_tol if rank_tol > 0 else max(shape) * _EPS
    return int(np.sum(s > rel * s[0]))


def _orthonormal_columns(mat: np.ndarray, rank_tol: float) -> np.ndarray:
    """Orthonormal basis of the column span of mat, via rank-revealing SVD."""
    if mat.shape[1] == 0:
        return mat
    u, s, _ = np.linalg.svd(mat, full_matrices=False)
    rank = _rank_from_singular_values(s, mat.shape, rank_tol)
    return u[:, :rank]


@dataclass(frozen=True, eq=False)
class Subspace:
    """A linear subspace as an (ambient_dim, dim) orthonormal basis matrix.

    dim == 0 encodes the zero subspace; it is a regular value, never an
    error.  rank_tol is the relative singular-value cutoff the subspace
    was built with (0 selects the default max(shape) * machine epsilon);
    derived subspaces inherit the larger of their parents' tolerances.
    """

    basis: np.ndarray
    rank_tol: float = 0.0

    def __post_init__(self):
        basis = np.asarray(self.basis)
        if basis.ndim != 2:
            raise ValueError(f"basis must be a 2-D array, got shape {basis.shape}")
        dtype = np.complex128 if np.iscomplexobj(basis) else np.float64
        basis = np.array(basis, dtype=dtype)
        n, k = basis.shape
        if n < 1:
            raise ValueError("ambient dimension must be positive")
        if k > n:
            raise ValueError(f"{k} basis columns cannot be independent in dimension {n}")
        if not self.rank_tol >= 0:
            raise ValueError("rank_tol must be nonnegative")
        if k:
            defect = np.max(np.abs(basis.conj().T @ basis - np.eye(k)))
            if defect > ORTHONORMALITY_TOL:
                raise ValueError(f"basis columns are not orthonormal (defect {defect:.3e})")
        basis.setflags(write=False)
        object.__setattr__(self, "basis", basis)

    @classmethod
    def from_spanning(cls, vectors, ambient_dim: int | None = None,
                      rank_tol: float = 0.0, field: str | None = None) -> "Subspace":
        """Subspace spanned by the given vectors.

        The numerical rank is the number of singular values exceeding
        rank_tol times the largest one.  An empty spanning set yields the
        zero subspace; ambient_dim is then required.
        """
        vectors = [np.asarray(v) for v in vectors]
        if ambient_dim is None:
            if not vectors:
                raise ValueError("ambient_dim is required for an empty spanning set")
            if vectors[0].ndim != 1:
                raise ValueError("spanning vectors must be 1-D arrays")
            ambient_dim = vectors[0].shape[0]
        if field is None:
            dtype = np.complex128 if any(np.iscomplexobj(v) for v in vectors) else np.float64
        else:
            dtype = field_dtype(field)
        cols = [as_field_vector(v, ambient_dim, dtype, what=f"spanning vector {i}")
                for i, v in enumerate(vectors)]
        if not cols:
            return cls(np.zeros((ambient_dim, 0), dtype=dtype), rank_tol)
        return cls(_orthonormal_columns(np.column_stack(cols), rank_tol), rank_tol)

    @classmethod
    def zero(cls, ambient_dim: int, field: str = REAL, rank_tol: float = 0.0) -> "Subspace":
        return cls(np.zeros((ambient_dim, 0), dtype=field_dtype(field)), rank_tol)

    @classmethod
    def full(cls, ambient_dim: int, field: str = REAL, rank_tol: float = 0.0) -> "Subspace":
        return cls(np.eye(ambient_dim, dtype=field_dtype(field)), rank_tol)

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def field(self) -> str:
        return COMPLEX if np.iscomplexobj(self.basis) else REAL

    @property
    def dtype(self) -> np.dtype:
        return self.basis.dtype

    @property
    def is_zero(self) -> bool:
        return self.dim == 0

    def project(self, x) -> np.ndarray:
        """Orthogonal projection of x onto this subspace."""
        x = as_field_vector(x, self.ambient_dim, self.dtype)
        if self.dim == 0:
            return np.zeros(self.ambient_dim, dtype=self.dtype)
        return self.basis @ (self.basis.conj().T @ x)

    def contains(self, x, tol: float | None = None) -> bool:
        """Whether x lies in the subspace, up to a relative tolerance."""
        x = as_field_vector(x, self.ambient_dim, self.dtype)
        if tol is None:
            tol = MEMBERSHIP_RTOL * max(1.0, float(np.linalg.norm(x)))
        return float(np.linalg.norm(self.project(x) - x)) <= tol

    def complement(self) -> "Subspace":
        """Orthogonal complement; dimensions add up to ambient_dim exactly."""
        n, k = self.basis.shape
        if k == 0:
            return Subspace(np.eye(n, dtype=self.dtype), self.rank_tol)
        if k == n:
            return Subspace(np.zeros((n, 0), dtype=self.dtype), self.rank_tol)
        u, _, _ = np.linalg.svd(self.basis, full_matrices=True)
        return Subspace(u[:, k:], self.rank_tol)

    def __repr__(self) -> str:
        return f"Subspace(dim={self.dim}, ambient={self.ambient_dim}, field={self.field})"


def _check_compatible(a: Subspace, b: Subspace) -> None:
    if a.ambient_dim != b.ambient_dim:
        raise ValueError(f"ambient dimensions differ: {a.ambient_dim} vs {b.ambient_dim}")
    if a.field != b.field:
        raise ValueError(f"fields differ: {a.field} vs {b.field}")


def add(a: Subspace, b: Subspace) -> Subspace:
    """Sum of two subspaces, the span of their union."""
    _check_compatible(a, b)
    rank_tol = max(a.rank_tol, b.rank_tol)
    mat = np.hstack([a.basis, b.basis])
    return Subspace(_orthonormal_columns(mat, rank_tol), rank_tol)


def add_all(subspaces) -> Subspace:
    """Sum of a nonempty collection of subspaces."""
    subspaces = list(subspaces)
    if not subspaces:
        raise ValueError("add_all needs at least one subspace")
    first = subspaces[0]
    for s in subspaces[1:]:
        _check_compatible(first, s)
    rank_tol = max(s.rank_tol for s in subspaces)
    mat = np.hstack([s.basis for s in subspaces])
    return Subspace(_orthonormal_columns(mat, rank_tol), rank_tol)


def intersect(a: Subspace, b: Subspace) -> Subspace:
    """Intersection, computed as the complement of the sum of complements."""
    _check_compatible(a, b)
    return add(a.complement(), b.complement()).complement()
