"""Desk-scale application reductions to prescribed-projection problems.

Covers constrained moment problems, linear operator systems, recovery of
a signal from masked time and frequency samples (with optional scalar
measurements), and the two-subspace family whose angle degrades with the
truncation length, making alternating projections arbitrarily slow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .angles import DEGENERACY_BAND, projector_product_norm
from .family import Family, IbapFailureError, verify_ibap
from .solvers import (
    AffineConstraint,
    ConvergenceTrace,
    SolveOptions,
    best_approximation,
    solve_min_norm,
    solve_two,
)
from .subspaces import COMPLEX, Subspace, as_field_vector, intersect, add


class HypothesisError(ValueError):
    """A structural hypothesis of an application reduction fails.

    level, when set, is the 1-based index of the offending constraint.
    """

    def __init__(self, message: str, level: int | None = None):
        super().__init__(message)
        self.level = level


@lru_cache(maxsize=None)
def dft_matrix(n: int) -> np.ndarray:
    """Unitary discrete Fourier matrix, entries exp(-2 pi i jk / n) / sqrt(n).

    Cached per length and returned read-only; forward and inverse carry
    the same 1/sqrt(n) scaling, so frequency-support projectors are
    orthogonal without weights.
    """
    if n < 1:
        raise ValueError("transform length must be positive")
    j = np.arange(n)
    w = np.exp(-2j * np.pi * np.outer(j, j) / n) / math.sqrt(n)
    w.setflags(write=False)
    return w


def dft(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.complex128)
    return dft_matrix(x.shape[0]) @ x


def idft(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.complex128)
    return dft_matrix(x.shape[0]).conj().T @ x


def _validated_mask(mask, n: int, what: str) -> tuple:
    idx = [int(i) for i in mask]
    if len(set(idx)) != len(idx):
        raise ValueError(f"{what} contains duplicate indices")
    for i in idx:
        if not 0 <= i < n:
            raise ValueError(f"{what} index {i} out of range for length {n}")
    return tuple(idx)


@dataclass(frozen=True, eq=False)
class MaskedSignalProblem:
    """Recover a length-n signal from its values on a time-index set and
    the values of its unitary DFT on a frequency-index set."""

    n: int
    time_mask: tuple
    freq_mask: tuple
    time_values: np.ndarray
    freq_values: np.ndarray

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("signal length must be positive")
        tmask = _validated_mask(self.time_mask, self.n, "time mask")
        fmask = _validated_mask(self.freq_mask, self.n, "frequency mask")
        tvals = np.asarray(self.time_values, dtype=np.complex128)
        fvals = np.asarray(self.freq_values, dtype=np.complex128)
        if tvals.shape != (len(tmask),):
            raise ValueError(f"time values have shape {tvals.shape}, expected ({len(tmask)},)")
        if fvals.shape != (len(fmask),):
            raise ValueError(f"frequency values have shape {fvals.shape}, expected ({len(fmask)},)")
        tvals.setflags(write=False)
        fvals.setflags(write=False)
        object.__setattr__(self, "time_mask", tmask)
        object.__setattr__(self, "freq_mask", fmask)
        object.__setattr__(self, "time_values", tvals)
        object.__setattr__(self, "freq_values", fvals)


def _time_support_subspace(n: int, mask: tuple) -> Subspace:
    return Subspace(np.eye(n, dtype=np.complex128)[:, list(mask)])


def _freq_support_subspace(n: int, mask: tuple) -> Subspace:
    return Subspace(dft_matrix(n).conj().T[:, list(mask)])


def _signal_constraints(problem: MaskedSignalProblem):
    n = problem.n
    u_time = _time_support_subspace(n, problem.time_mask)
    a_ext = np.zeros(n, dtype=np.complex128)
    a_ext[list(problem.time_mask)] = problem.time_values
    u_freq = _freq_support_subspace(n, problem.freq_mask)
    b_ext = np.zeros(n, dtype=np.complex128)
    b_ext[list(problem.freq_mask)] = problem.freq_values
    return (u_time, a_ext), (u_freq, idft(b_ext))


def time_frequency_recover(problem: MaskedSignalProblem) -> np.ndarray:
    """Minimal-norm signal matching the masked time and frequency data.

    The product |time mask| * |frequency mask| < n guarantees the two
    support subspaces meet trivially (discrete uncertainty principle) and
    is accepted as a sufficient shortcut; otherwise the projector-product
    norm is checked numerically and near-1 values are refused.
    """
    (u_time, a_ext), (u_freq, b_sig) = _signal_constraints(problem)
    shortcut = len(problem.time_mask) * len(problem.freq_mask) < problem.n
    if not shortcut:
        norm = projector_product_norm(u_time, u_freq)
        if norm >= 1.0 - DEGENERACY_BAND:
            raise HypothesisError(
                f"masks too large: the support subspaces intersect "
                f"(projector-product norm {norm:.12g})")
    return solve_two(AffineConstraint(u_time, a_ext), AffineConstraint(u_freq, b_sig))


def recover_with_measurements(problem: MaskedSignalProblem, measurements,
                              values) -> np.ndarray:
    """Masked time/frequency recovery with extra scalar measurements.

    Each measurement vector contributes the constraint <x, m_i> = value_i.
    Measurement supports must be pairwise disjoint and must not be
    contained in the time mask; the assembled family must satisfy the
    inverse best approximation property.  With no measurements this is
    exactly the plain masked recovery.
    """
    measurements = [as_field_vector(m, problem.n, np.complex128, what=f"measurement {i + 1}")
                    for i, m in enumerate(measurements)]
    values = [complex(v) for v in values]
    if len(values) != len(measurements):
        raise ValueError(f"{len(measurements)} measurement vectors but {len(values)} values")
    if not measurements:
        return time_frequency_recover(problem)
    time_set = set(problem.time_mask)
    supports = []
    for i, m in enumerate(measurements):
        supp = set(np.nonzero(m)[0].tolist())
        if not supp:
            raise HypothesisError(f"measurement {i + 1} is the zero vector", level=i + 1)
        if supp <= time_set:
            raise HypothesisError(
                f"measurement {i + 1} is supported inside the time mask", level=i + 1)
        for j, other in enumerate(supports):
            if supp & other:
                raise HypothesisError(
                    f"measurements {j + 1} and {i + 1} have overlapping supports", level=i + 1)
        supports.append(supp)
    (u_time, a_ext), (u_freq, b_sig) = _signal_constraints(problem)
    subs = [Subspace.from_spanning([m], problem.n) for m in measurements]
    pres = [eta * m / float(np.linalg.norm(m)) ** 2 for m, eta in zip(measurements, values)]
    subs += [u_time, u_freq]
    pres += [a_ext, b_sig]
    family = Family(tuple(subs))
    report = verify_ibap(family)
    if not report.verdict:
        raise IbapFailureError("measurement and mask subspaces are linearly dependent", report)
    return solve_min_norm(family, pres)


def solve_moments(space: Subspace, vectors, values) -> np.ndarray:
    """Minimal-norm member of `space` with prescribed scalar products.

    Solves for x in the space with <x, v_i> = values[i] for each moment
    vector.  The moment vectors must be nonzero and linearly independent,
    and their span must meet the orthocomplement of the space trivially.
    """
    n = space.ambient_dim
    vs = [as_field_vector(v, n, space.dtype, what=f"moment vector {i + 1}")
          for i, v in enumerate(vectors)]
    values = list(values)
    if len(values) != len(vs):
        raise ValueError(f"{len(vs)} moment vectors but {len(values)} values")
    for i, v in enumerate(vs):
        if not np.linalg.norm(v) > 0:
            raise HypothesisError(f"moment vector {i + 1} is zero", level=i + 1)
    if vs:
        span = Subspace.from_spanning(vs, n)
        if span.dim != len(vs):
            raise HypothesisError("moment vectors are linearly dependent")
        if intersect(space.complement(), span).dim:
            raise HypothesisError(
                "the span of the moment vectors meets the orthocomplement of the space")
    if space.field == COMPLEX:
        etas = [complex(v) for v in values]
    else:
        etas = []
        for i, v in enumerate(values):
            z = complex(v)
            if z.imag != 0:
                raise ValueError(f"moment value {i + 1} is complex in a real problem")
            etas.append(z.real)
    subs = [Subspace.from_spanning([v], n) for v in vs]
    pres = [eta * v / float(np.linalg.norm(v)) ** 2 for v, eta in zip(vs, etas)]
    subs.append(space.complement())
    pres.append(np.zeros(n, dtype=space.dtype))
    return solve_min_norm(Family(tuple(subs)), pres)


def solve_operator_system(operators, rhs) -> np.ndarray:
    """Minimal-norm x with T_i x = y_i for the given matrices.

    Each right-hand side must lie in the range of its operator, and every
    kernel must together with the intersection of the later kernels cover
    the whole space; the deficient level is reported otherwise.
    """
    mats = [np.atleast_2d(np.asarray(t)) for t in operators]
    rhs = list(rhs)
    if not mats:
        raise ValueError("at least one operator is required")
    if len(rhs) != len(mats):
        raise ValueError(f"{len(mats)} operators but {len(rhs)} right-hand sides")
    n = mats[0].shape[1]
    use_complex = any(np.iscomplexobj(t) for t in mats) or any(np.iscomplexobj(np.asarray(y)) for y in rhs)
    dtype = np.complex128 if use_complex else np.float64
    mats = [np.asarray(t, dtype=dtype) for t in mats]
    for i, t in enumerate(mats):
        if t.shape[1] != n:
            raise ValueError(f"operator {i + 1} has {t.shape[1]} columns, expected {n}")
    points = []
    row_spaces = []
    for i, (t, y) in enumerate(zip(mats, rhs)):
        y = as_field_vector(y, t.shape[0], dtype, what=f"right-hand side {i + 1}")
        u = np.linalg.pinv(t) @ y
        gap = float(np.linalg.norm(t @ u - y))
        if gap > 1e-8 * (1.0 + float(np.linalg.norm(y))):
            raise ValueError(
                f"right-hand side {i + 1} is not in the range of its operator "
                f"(residual {gap:.3e})")
        points.append(u)
        row_spaces.append(Subspace.from_spanning([row.conj() for row in t], n))
    kernels = [s.complement() for s in row_spaces]
    m = len(mats)
    for i in range(m - 1):
        tail = kernels[i + 1]
        for k in kernels[i + 2:]:
            tail = intersect(tail, k)
        if add(kernels[i], tail).dim < n:
            raise HypothesisError(
                f"kernel overlap condition fails at level {i + 1}: "
                "the kernel plus the intersection of the later kernels "
                "does not cover the space", level=i + 1)
    return solve_min_norm(Family(tuple(row_spaces)), points)


@dataclass(frozen=True, eq=False)
class SlowFamilySpec:
    """Truncated two-subspace family with per-block mixing weights.

    Block j of the ambient space of dimension 2 * truncation carries one
    direction of each subspace; the weight alphas[j] > 0 sets the angle
    between them.
    """

    truncation: int
    alphas: tuple

    def __post_init__(self):
        if self.truncation < 1:
            raise ValueError("truncation must be at least 1")
        alphas = tuple(float(a) for a in self.alphas)
        if len(alphas) != self.truncation:
            raise ValueError(f"{len(alphas)} weights for truncation {self.truncation}")
        if any(not a > 0 for a in alphas):
            raise ValueError("all weights must be positive")
        object.__setattr__(self, "alphas", alphas)

    @classmethod
    def harmonic(cls, truncation: int) -> "SlowFamilySpec":
        """Weights 1/(j+1); the angle degrades as the truncation grows."""
        return cls(truncation, tuple(1.0 / (j + 1) for j in range(truncation)))


def slow_family(spec: SlowFamilySpec):
    """Two-subspace family whose projector-product norm is predictable.

    The first subspace is spanned by the even coordinate directions, the
    second by per-block unit mixtures of the even and odd directions.
    Returns (family, predicted_norm) with predicted_norm the largest
    per-block value 1 / sqrt(1 + alpha^2); as the weights shrink, the
    norm approaches 1 and the iteration rate degrades.
    """
    n = 2 * spec.truncation
    basis_even = np.zeros((n, spec.truncation))
    basis_mixed = np.zeros((n, spec.truncation))
    for j, a in enumerate(spec.alphas):
        scale = 1.0 / math.sqrt(1.0 + a * a)
        basis_even[2 * j, j] = 1.0
        basis_mixed[2 * j, j] = scale
        basis_mixed[2 * j + 1, j] = a * scale
    family = Family((Subspace(basis_even), Subspace(basis_mixed)))
    predicted = max(1.0 / math.sqrt(1.0 + a * a) for a in spec.alphas)
    return family, predicted


def worst_aligned_start(spec: SlowFamilySpec) -> np.ndarray:
    """Unit start vector in the block attaining the predicted norm."""
    j = int(np.argmin(spec.alphas))
    r = np.zeros(2 * spec.truncation)
    r[2 * j + 1] = 1.0
    return r


def slow_convergence_demo(spec: SlowFamilySpec, start,
                          options: SolveOptions | None = None) -> ConvergenceTrace:
    """Alternating projection run with the zero prescription.

    The zero prescription is always feasible, so the run measures pure
    rate degradation: started in the worst-aligned block, the per-sweep
    contraction of the distance equals the squared predicted norm.
    """
    family, _ = slow_family(spec)
    n = family.ambient_dim
    zeros = np.zeros(n)
    _, trace = best_approximation(start, family, [zeros, zeros], options)
    return trace
