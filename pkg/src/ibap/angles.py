"""Projector-product norms and Friedrichs angles between subspace pairs.

These two scalars carry all the geometric information used by the
family-level feasibility certificates and the convergence rate bound.
"""

from __future__ import annotations

import numpy as np

from .subspaces import Subspace, _check_compatible, intersect

#: norms at or above 1 minus this band are flagged numerically degenerate
DEGENERACY_BAND = 1e-8


def projector_product_norm(u: Subspace, v: Subspace) -> float:
    """Operator norm of the composition of the two orthogonal projectors.

    Equals the largest singular value of the cross-Gram matrix of the two
    bases, clamped to [0, 1]; this is the cosine of the smallest principal
    angle between the subspaces.  Symmetric in its arguments.
    """
    _check_compatible(u, v)
    if u.dim == 0 or v.dim == 0:
        return 0.0
    s = np.linalg.svd(u.basis.conj().T @ v.basis, compute_uv=False)
    return float(np.clip(s[0], 0.0, 1.0))


def is_degenerate(norm: float) -> bool:
    """Whether a projector-product norm sits in the near-1 degeneracy band."""
    return norm >= 1.0 - DEGENERACY_BAND


def cos_friedrichs(u: Subspace, v: Subspace) -> float:
    """Cosine of the Friedrichs angle between two subspaces.

    The common part w = u meet v is removed from both sides and the
    projector-product norm of the two residual subspaces is returned.
    When one subspace contains the other the residuals are trivial and
    the value is 0.
    """
    _check_compatible(u, v)
    w = intersect(u, v)
    if w.dim:
        wp = w.complement()
        u = intersect(u, wp)
        v = intersect(v, wp)
    if u.dim == 0 or v.dim == 0:
        return 0.0
    return projector_product_norm(u, v)


def angle_identity_gap(u: Subspace, v: Subspace) -> float:
    """Discrepancy of the identity c(U, V) = ||P_U P_V - P_(U meet V)||.

    Evaluates the right-hand side on dense projector matrices and returns
    the absolute difference from cos_friedrichs; zero in exact arithmetic.
    """
    _check_compatible(u, v)
    pu = u.basis @ u.basis.conj().T
    pv = v.basis @ v.basis.conj().T
    w = intersect(u, v)
    pw = w.basis @ w.basis.conj().T
    dense = float(np.linalg.norm(pu @ pv - pw, 2))
    return abs(cos_friedrichs(u, v) - dense)
