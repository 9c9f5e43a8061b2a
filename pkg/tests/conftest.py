"""Shared random-instance generators for the test suite.

All randomness is seeded per test, so the suite is deterministic.
"""

import numpy as np
import pytest

from ibap import COMPLEX, REAL, Family, Subspace

FIELDS = [REAL, COMPLEX]


def rng_for(seed):
    return np.random.default_rng(seed)


def random_matrix(rng, n, k, field=REAL):
    m = rng.standard_normal((n, k))
    if field == COMPLEX:
        m = m + 1j * rng.standard_normal((n, k))
    return m


def random_unit(rng, n, field=REAL):
    v = random_matrix(rng, n, 1, field)[:, 0]
    return v / np.linalg.norm(v)


def random_subspace(rng, n, k, field=REAL):
    return Subspace.from_spanning(list(random_matrix(rng, n, k, field).T), n, field=field)


def random_orthogonal(rng, n, field=REAL):
    q, r = np.linalg.qr(random_matrix(rng, n, n, field))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_family(rng, n, dims, field=REAL):
    """Generic subspaces with the given dimensions; independent almost
    surely when the dimensions sum to at most n."""
    return Family(tuple(random_subspace(rng, n, k, field) for k in dims))


def random_orthogonal_family(rng, n, dims, field=REAL):
    """Mutually orthogonal subspaces (disjoint column blocks of one
    unitary matrix); the rate bound of such a family is zero."""
    assert sum(dims) <= n
    q = random_orthogonal(rng, n, field)
    subs = []
    offset = 0
    for k in dims:
        subs.append(Subspace(q[:, offset:offset + k]))
        offset += k
    return Family(tuple(subs))


def random_independent_dims(rng, n, m):
    """Random member dimensions, each at least 1, summing to at most n."""
    dims = []
    budget = n - m
    for _ in range(m):
        k = 1 + int(rng.integers(0, budget + 1))
        budget -= k - 1
        dims.append(k)
    return dims


def dependent_family_with_witness(rng, n, field=REAL):
    """A forced-dependent family plus a zero-sum prescription witness.

    A spanning vector of the last subspace is planted inside the sum of
    the two preceding ones, so (u, v, 0, ..., -(u + v)) is a nonzero
    prescription with zero sum, which is infeasible.
    """
    m = int(rng.integers(3, 5))
    dims = random_independent_dims(rng, n, m)
    subs = [random_subspace(rng, n, k, field) for k in dims]
    while True:
        u = subs[0].project(random_unit(rng, n, field))
        v = subs[1].project(random_unit(rng, n, field))
        w = u + v
        if min(np.linalg.norm(u), np.linalg.norm(v), np.linalg.norm(w)) > 0.05:
            break
    planted = Subspace.from_spanning(list(subs[-1].basis.T) + [w], n, field=field)
    subs[-1] = planted
    family = Family(tuple(subs))
    witness = [u, v] + [np.zeros(n, dtype=family.dtype) for _ in range(m - 3)] + [-w]
    return family, witness


def random_prescription(rng, family, scale=1.0):
    pres = []
    for s in family.subspaces:
        if s.dim == 0:
            pres.append(np.zeros(s.ambient_dim, dtype=s.dtype))
        else:
            coeff = random_matrix(rng, s.dim, 1, s.field)[:, 0] * scale
            pres.append(s.basis @ coeff)
    return pres


@pytest.fixture(params=FIELDS)
def field(request):
    return request.param
