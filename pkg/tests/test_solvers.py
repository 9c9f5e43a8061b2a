"""Closed forms, the minimal-norm recursion, the direct solver, and the
periodic projection iteration with its rate bound."""

import numpy as np
import pytest

from ibap import (
    AffineConstraint,
    Family,
    IbapFailureError,
    InfeasiblePrescriptionError,
    SolveOptions,
    Subspace,
    affine_project,
    best_approximation,
    direct_solve,
    extend_min_norm,
    min_norm_stages,
    prescription_residual,
    rate_bound,
    solve_min_norm,
    solve_two,
    verify_ibap,
)
from ibap.solvers import _solve_id_minus

from conftest import (
    FIELDS,
    random_family,
    random_independent_dims,
    random_orthogonal_family,
    random_prescription,
    random_subspace,
    random_unit,
    rng_for,
)
from oracles import neumann_inverse, pinv_min_norm


def line(*coords):
    v = np.asarray(coords, dtype=float)
    return Subspace.from_spanning([v / np.linalg.norm(v)], len(coords))


def axes_family(n):
    eye = np.eye(n)
    return Family(tuple(Subspace.from_spanning([eye[:, i]], n) for i in range(n)))


class TestAffineProject:
    def test_point_already_on_the_affine_set_is_fixed(self):
        u = line(1, 0)
        c = AffineConstraint(u, np.array([5.0, 0.0]))
        x = np.array([5.0, -3.0])  # projects to (5, 0) already
        assert np.allclose(affine_project(c, x), x, atol=1e-14)

    def test_zero_point_reduces_to_complement_projection(self):
        rng = rng_for(700)
        u = random_subspace(rng, 6, 2)
        c = AffineConstraint(u, np.zeros(6))
        x = random_unit(rng, 6)
        assert np.allclose(affine_project(c, x), x - u.project(x), atol=1e-14)

    def test_plane_example_matches_hand_value(self):
        u = line(1, 0)
        c = AffineConstraint(u, np.array([5.0, 0.0]))
        got = affine_project(c, np.array([1.0, 2.0]))
        assert np.allclose(got, [5.0, 2.0], atol=1e-14)
        # pseudoinverse oracle on the affine system B^H y = B^H u
        a = u.basis.conj().T
        x = np.array([1.0, 2.0])
        correction = np.linalg.pinv(a) @ (a @ x - a @ np.array([5.0, 0.0]))
        assert np.allclose(x - correction, got, atol=1e-12)

    def test_membership_of_the_result(self):
        rng = rng_for(701)
        for _ in range(20):
            u = random_subspace(rng, 7, 3)
            point = u.project(random_unit(rng, 7) * 2)
            c = AffineConstraint(u, point)
            x = random_unit(rng, 7) * 3
            r = affine_project(c, x)
            assert np.linalg.norm(u.project(r) - point) <= 1e-10
            assert np.linalg.norm(u.project(r - x) - (r - x)) <= 1e-10  # r - x in U

    def test_idempotent_and_nonexpansive(self):
        rng = rng_for(702)
        for _ in range(20):
            u = random_subspace(rng, 8, int(rng.integers(1, 8)))
            point = u.project(random_unit(rng, 8))
            c = AffineConstraint(u, point)
            x = random_unit(rng, 8) * 4
            y = random_unit(rng, 8) * 4
            qx = affine_project(c, x)
            assert np.linalg.norm(affine_project(c, qx) - qx) <= 1e-12
            lip = np.linalg.norm(qx - affine_project(c, y))
            assert lip <= np.linalg.norm(x - y) + 1e-12

    def test_constraint_point_must_belong_to_the_subspace(self):
        with pytest.raises(ValueError):
            AffineConstraint(line(1, 0), np.array([1.0, 1.0]))


class TestResolvent:
    @pytest.mark.parametrize("field", FIELDS)
    def test_matches_power_series_oracle(self, field):
        rng = rng_for(703)
        for _ in range(15):
            u = random_subspace(rng, 6, int(rng.integers(1, 4)), field)
            v = random_subspace(rng, 6, int(rng.integers(1, 4)), field)
            w = random_unit(rng, 6, field)
            got = _solve_id_minus(u, v, w)
            expected = neumann_inverse(u, v, w)
            assert np.linalg.norm(got - expected) <= 1e-10

    def test_zero_dim_side_is_the_identity(self):
        rng = rng_for(704)
        v = random_subspace(rng, 5, 2)
        w = random_unit(rng, 5)
        assert np.allclose(_solve_id_minus(Subspace.zero(5), v, w), w)


class TestSolveTwo:
    def test_orthogonal_axes(self):
        z = solve_two(AffineConstraint(line(1, 0), np.array([2.5, 0.0])),
                      AffineConstraint(line(0, 1), np.array([0.0, -4.0])))
        assert np.allclose(z, [2.5, -4.0], atol=1e-14)

    def test_zero_prescription(self):
        rng = rng_for(705)
        u = random_subspace(rng, 6, 2)
        v = random_subspace(rng, 6, 3)
        z = solve_two(AffineConstraint(u, np.zeros(6)), AffineConstraint(v, np.zeros(6)))
        assert np.linalg.norm(z) <= 1e-12

    def test_oblique_lines_match_hand_value(self):
        u1 = line(1, 0)
        u2 = Subspace.from_spanning([np.array([1.0, 1.0]) / np.sqrt(2)], 2)
        z = solve_two(AffineConstraint(u1, np.array([1.0, 0.0])),
                      AffineConstraint(u2, np.array([1.0, 1.0])))
        assert np.allclose(z, [1.0, 1.0], atol=1e-12)

    @pytest.mark.parametrize("field", FIELDS)
    def test_constraints_and_minimality_on_random_pairs(self, field):
        rng = rng_for(706)
        for _ in range(25):
            n = int(rng.integers(4, 10))
            ku = int(rng.integers(1, n // 2 + 1))
            kv = int(rng.integers(1, n - ku + 1))
            u = random_subspace(rng, n, ku, field)
            v = random_subspace(rng, n, kv, field)
            f = Family((u, v))
            pres = random_prescription(rng, f)
            z = solve_two(AffineConstraint(u, pres[0]), AffineConstraint(v, pres[1]))
            assert np.linalg.norm(u.project(z) - pres[0]) <= 1e-8
            assert np.linalg.norm(v.project(z) - pres[1]) <= 1e-8
            oracle = pinv_min_norm(f, pres)
            assert abs(np.linalg.norm(z) - np.linalg.norm(oracle)) <= 1e-8
            assert np.linalg.norm(z - oracle) <= 1e-8 * (1 + np.linalg.norm(oracle))

    def test_intersecting_pair_is_refused(self):
        u = line(1, 0)
        with pytest.raises(ValueError):
            solve_two(AffineConstraint(u, np.array([1.0, 0.0])),
                      AffineConstraint(u, np.array([2.0, 0.0])))


class TestExtendMinNorm:
    def test_orthogonal_pair_reduces_to_addition(self):
        rng = rng_for(707)
        f = random_orthogonal_family(rng, 7, [2, 3])
        u_pt = f[0].project(random_unit(rng, 7))
        v_pt = f[1].project(random_unit(rng, 7))
        got = extend_min_norm(f[0], f[1], u_pt, v_pt)
        assert np.allclose(got, u_pt + v_pt, atol=1e-12)

    def test_zero_inputs_give_zero(self):
        rng = rng_for(708)
        u = random_subspace(rng, 5, 2)
        v = random_subspace(rng, 5, 2)
        z = extend_min_norm(u, v, np.zeros(5), np.zeros(5))
        assert np.linalg.norm(z) <= 1e-14

    def test_cross_validation_against_the_closed_form(self):
        # the recursion step and the closed form are distinct code paths
        rng = rng_for(709)
        for _ in range(20):
            u = random_subspace(rng, 2, 1)
            v = random_subspace(rng, 2, 1)
            if not np.linalg.svd(u.basis.conj().T @ v.basis, compute_uv=False)[0] < 1 - 1e-6:
                continue
            up = u.project(random_unit(rng, 2))
            vp = v.project(random_unit(rng, 2))
            a = extend_min_norm(u, v, up, vp)
            b = solve_two(AffineConstraint(u, up), AffineConstraint(v, vp))
            assert np.linalg.norm(a - b) <= 1e-10

    def test_membership_preconditions(self):
        u = line(1, 0, 0)
        v = line(0, 1, 0)
        with pytest.raises(ValueError):
            extend_min_norm(u, v, np.array([0.0, 1.0, 0.0]), np.array([0.0, 1.0, 0.0]))
        with pytest.raises(ValueError):
            extend_min_norm(u, v, np.array([1.0, 0.0, 0.0]), np.array([0.0, 0.0, 1.0]))


class TestSolveMinNorm:
    def test_single_constraint_returns_its_point(self):
        rng = rng_for(710)
        u = random_subspace(rng, 5, 2)
        point = u.project(random_unit(rng, 5))
        f = Family((u,))
        assert np.allclose(solve_min_norm(f, [point]), point, atol=1e-14)

    def test_coordinate_axes_assemble_the_vector(self):
        f = axes_family(3)
        pres = [np.array([1.5, 0, 0]), np.array([0, -2.0, 0]), np.array([0, 0, 0.25])]
        x = solve_min_norm(f, pres)
        assert np.allclose(x, [1.5, -2.0, 0.25], atol=1e-12)

    @pytest.mark.parametrize("field", FIELDS)
    def test_matches_pseudoinverse_oracle(self, field):
        rng = rng_for(711)
        f = random_family(rng, 7, [2, 2, 1], field)
        for _ in range(10):
            pres = random_prescription(rng, f)
            x = solve_min_norm(f, pres)
            oracle = pinv_min_norm(f, pres)
            assert np.linalg.norm(x - oracle) <= 1e-8 * (1 + np.linalg.norm(oracle))

    def test_stages_are_minimal_for_the_trailing_systems(self):
        rng = rng_for(712)
        f = random_family(rng, 9, [2, 3, 2])
        pres = random_prescription(rng, f)
        stages = min_norm_stages(f, pres)
        m = len(f)
        for j, stage in enumerate(stages):
            trailing = Family(f.subspaces[m - 1 - j:])
            tail_pres = pres[m - 1 - j:]
            oracle = pinv_min_norm(trailing, tail_pres)
            assert np.linalg.norm(stage - oracle) <= 1e-8 * (1 + np.linalg.norm(oracle))
            # fixed by re-projection onto the trailing solution set
            reproj = direct_solve(trailing, tail_pres, anchor=stage).particular
            assert np.linalg.norm(reproj - stage) <= 1e-8

    def test_requires_the_property(self):
        f = Family((line(1, 0, 0).complement(), line(0, 1, 0).complement()))
        pres = [np.zeros(3), np.zeros(3)]
        with pytest.raises(IbapFailureError) as err:
            solve_min_norm(f, pres)
        assert err.value.report.verdict is False

    def test_membership_violation(self):
        f = axes_family(2)
        with pytest.raises(ValueError):
            solve_min_norm(f, [np.array([1.0, 1.0]), np.array([0.0, 1.0])])

    def test_zero_subspace_members_are_fine(self):
        rng = rng_for(713)
        u = random_subspace(rng, 5, 2)
        f = Family((u, Subspace.zero(5)))
        pres = [u.project(random_unit(rng, 5)), np.zeros(5)]
        x = solve_min_norm(f, pres)
        assert np.linalg.norm(u.project(x) - pres[0]) <= 1e-10


class TestDirectSolve:
    def test_zero_prescription(self):
        rng = rng_for(714)
        f = random_family(rng, 6, [2, 2])
        ss = direct_solve(f, [np.zeros(6), np.zeros(6)])
        assert np.linalg.norm(ss.particular) <= 1e-12
        assert ss.parallel.dim == 2
        for s in f.subspaces:
            assert np.max(np.abs(s.basis.conj().T @ ss.parallel.basis)) <= 1e-10

    def test_axes_pair_in_three_dims(self):
        eye = np.eye(3)
        f = Family((Subspace.from_spanning([eye[:, 0]], 3),
                    Subspace.from_spanning([eye[:, 1]], 3)))
        ss = direct_solve(f, [np.array([1.0, 0, 0]), np.array([0, 2.0, 0])])
        assert np.allclose(ss.particular, [1.0, 2.0, 0.0], atol=1e-12)
        assert ss.parallel.dim == 1
        assert np.allclose(np.abs(ss.parallel.basis[:, 0]), [0, 0, 1], atol=1e-12)

    def test_cross_check_with_the_recursion(self):
        rng = rng_for(715)
        for _ in range(15):
            dims = random_independent_dims(rng, 8, 3)
            f = random_family(rng, 8, dims)
            pres = random_prescription(rng, f)
            a = solve_min_norm(f, pres)
            b = direct_solve(f, pres).particular
            assert np.linalg.norm(a - b) <= 1e-8 * (1 + np.linalg.norm(b))

    def test_anchor_returns_the_closest_solution(self):
        rng = rng_for(716)
        f = random_family(rng, 7, [2, 2])
        pres = random_prescription(rng, f)
        anchor = random_unit(rng, 7) * 2
        ss = direct_solve(f, pres, anchor=anchor)
        assert prescription_residual(f, pres, ss.particular) <= 1e-8
        # optimality: the offset from the anchor is orthogonal to the parallel subspace
        gap = ss.parallel.project(ss.particular - anchor)
        assert np.linalg.norm(gap) <= 1e-10

    def test_infeasible_prescription_raises_with_certificate(self):
        u1 = line(1, 0)
        u2 = line(0, 1)
        u3 = Subspace.from_spanning([np.array([1.0, 1.0]) / np.sqrt(2)], 2)
        f = Family((u1, u2, u3))
        pres = [np.array([1.0, 0.0]), np.array([0.0, 1.0]), np.array([-1.0, -1.0])]
        with pytest.raises(InfeasiblePrescriptionError) as err:
            direct_solve(f, pres)
        assert err.value.certificate.residual > 1e-8


class TestRateBound:
    def test_axes_rate_is_zero(self):
        for n in (2, 3, 4):
            assert rate_bound(axes_family(n)) == 0.0

    @pytest.mark.parametrize("theta", [np.pi / 3, np.pi / 4, 1.0])
    def test_two_lines_at_an_angle(self, theta):
        f = Family((line(1, 0), line(np.cos(theta), np.sin(theta))))
        assert abs(rate_bound(f) - abs(np.cos(theta))) <= 1e-12

    def test_three_member_family_with_prescribed_angles(self):
        # complement angles are both 0.6, so alpha = sqrt(1 - 0.64^2)
        u1 = line(0, 0.6, 0.8)
        u2 = line(1, 0, 0)
        u3 = line(0.6, 0.8, 0)
        f = Family((u1, u2, u3))
        expected = np.sqrt(1.0 - 0.64 ** 2)
        assert abs(rate_bound(f) - expected) <= 1e-12

    def test_requires_the_property(self):
        f = Family((line(1, 0, 0).complement(), line(0, 1, 0).complement()))
        with pytest.raises(IbapFailureError):
            rate_bound(f)


class TestBestApproximation:
    def test_start_on_the_solution_set_converges_in_one_sweep(self):
        rng = rng_for(717)
        f = random_family(rng, 6, [2, 1])
        pres = random_prescription(rng, f)
        start = direct_solve(f, pres).particular
        x, trace = best_approximation(start, f, pres)
        assert trace.sweeps == 1 and trace.converged
        assert trace.records[0].max_residual <= 1e-10
        assert np.linalg.norm(x - start) <= 1e-10

    def test_orthogonal_axes_converge_in_one_sweep(self):
        rng = rng_for(718)
        f = random_orthogonal_family(rng, 5, [1, 2, 1])
        pres = random_prescription(rng, f)
        start = random_unit(rng, 5) * 3
        x, trace = best_approximation(start, f, pres)
        assert trace.alpha == 0.0
        assert trace.sweeps == 1 and trace.converged

    def test_two_lines_at_sixty_degrees(self):
        theta = np.pi / 3
        f = Family((line(1, 0), line(np.cos(theta), np.sin(theta))))
        pres = [np.array([1.0, 0.0]),
                0.5 * np.array([np.cos(theta), np.sin(theta)])]
        rng = rng_for(719)
        start = random_unit(rng, 2) * 3
        opts = SolveOptions(tol=1e-12, record_trace=True)
        x, trace = best_approximation(start, f, pres, opts)
        assert trace.converged
        assert abs(trace.alpha - 0.5) <= 1e-12
        ref = direct_solve(f, pres, anchor=start).particular
        assert np.linalg.norm(x - ref) <= 1e-10
        dists = [r.dist_to_solution for r in trace.records]
        for k in range(len(dists) - 1):
            if dists[k] > 1e-13:
                assert dists[k + 1] <= 0.5 * dists[k] + 1e-13

    @pytest.mark.parametrize("field", FIELDS)
    def test_rate_inequality_and_monotone_decrease(self, field):
        rng = rng_for(720)
        for _ in range(10):
            dims = random_independent_dims(rng, 8, int(rng.integers(2, 5)))
            f = random_family(rng, 8, dims, field)
            pres = random_prescription(rng, f)
            start = random_unit(rng, 8, field) * 2
            opts = SolveOptions(max_iter=300, tol=1e-11, record_trace=True)
            x, trace = best_approximation(start, f, pres, opts)
            assert trace.alpha is not None and trace.alpha < 1.0
            d0 = trace.initial_distance
            prev = d0
            for rec in trace.records:
                assert rec.dist_to_solution <= trace.alpha ** rec.index * d0 + 1e-8
                assert rec.dist_to_solution <= prev + 1e-12
                assert rec.bound == trace.alpha ** rec.index * d0
                prev = rec.dist_to_solution

    def test_bound_values_are_nonincreasing(self):
        rng = rng_for(721)
        f = random_family(rng, 6, [2, 2])
        pres = random_prescription(rng, f)
        opts = SolveOptions(max_iter=50, tol=1e-13, record_trace=True)
        _, trace = best_approximation(random_unit(rng, 6), f, pres, opts)
        bounds = [r.bound for r in trace.records]
        assert all(b2 <= b1 + 1e-15 for b1, b2 in zip(bounds, bounds[1:]))

    def test_infeasible_prescription_raises(self):
        u1 = line(1, 0)
        u2 = line(0, 1)
        u3 = Subspace.from_spanning([np.array([1.0, 1.0]) / np.sqrt(2)], 2)
        f = Family((u1, u2, u3))
        pres = [np.array([1.0, 0.0]), np.array([0.0, 1.0]), np.array([-1.0, -1.0])]
        with pytest.raises(InfeasiblePrescriptionError):
            best_approximation(np.zeros(2), f, pres)

    def test_feasible_dependent_family_still_converges(self):
        # dependent family, consistent prescription: no bound column, but
        # the iteration still reaches the solution set
        f = Family((line(1, 0, 0).complement(), line(0, 1, 0).complement()))
        pres = [np.zeros(3), np.zeros(3)]
        rng = rng_for(722)
        opts = SolveOptions(max_iter=500, tol=1e-10, record_trace=True)
        x, trace = best_approximation(random_unit(rng, 3), f, pres, opts)
        assert trace.alpha is None
        assert trace.converged
        assert all(r.bound is None for r in trace.records)
        assert prescription_residual(f, pres, x) <= 1e-10

    def test_max_iter_is_honoured(self):
        theta = 0.05  # slow pair
        f = Family((line(1, 0), line(np.cos(theta), np.sin(theta))))
        pres = [np.zeros(2), np.zeros(2)]
        opts = SolveOptions(max_iter=3, tol=1e-16)
        _, trace = best_approximation(np.array([0.0, 1.0]), f, pres, opts)
        assert trace.sweeps == 3 and not trace.converged


class TestCrossChecks:
    @pytest.mark.parametrize("field", FIELDS)
    def test_solve_two_equals_the_recursion_for_pairs(self, field):
        rng = rng_for(723)
        for _ in range(15):
            n = int(rng.integers(3, 9))
            ku = int(rng.integers(1, n // 2 + 1))
            kv = int(rng.integers(1, n - ku + 1))
            f = random_family(rng, n, [ku, kv], field)
            pres = random_prescription(rng, f)
            a = solve_two(AffineConstraint(f[0], pres[0]), AffineConstraint(f[1], pres[1]))
            b = solve_min_norm(f, pres)
            assert np.linalg.norm(a - b) <= 1e-10 * (1 + np.linalg.norm(b))


class TestAffineFeasibility:
    def test_constraint_from_an_affine_set_describes_the_same_set(self):
        rng = rng_for(724)
        for _ in range(15):
            parallel = random_subspace(rng, 7, int(rng.integers(0, 7)))
            a = random_unit(rng, 7) * 2
            c = AffineConstraint.from_affine_set(a, parallel)
            # a itself and any parallel shift satisfy the constraint
            for shift in (np.zeros(7), parallel.project(random_unit(rng, 7) * 3)):
                y = a + shift
                assert np.linalg.norm(c.subspace.project(y) - c.point) <= 1e-10
            # a point off the set does not
            off = c.subspace.project(random_unit(rng, 7))
            if np.linalg.norm(off) > 1e-3:
                assert np.linalg.norm(c.subspace.project(a + off) - c.point) > 1e-6

    def test_independent_complements_make_affine_intersections_nonempty(self):
        # affine sets whose parallel-complement family is independent
        # always intersect; the intersection point lies in every set
        rng = rng_for(725)
        for _ in range(15):
            n = 8
            dims = random_independent_dims(rng, n, 3)
            normals = random_family(rng, n, dims)  # the complements' family
            assert verify_ibap(normals).verdict
            anchors = [random_unit(rng, n) * 2 for _ in range(3)]
            constraints = [AffineConstraint.from_affine_set(a, s.complement())
                           for a, s in zip(anchors, normals.subspaces)]
            fam = Family(tuple(c.subspace for c in constraints))
            x = direct_solve(fam, [c.point for c in constraints]).particular
            for a, s in zip(anchors, normals.subspaces):
                parallel = s.complement()
                gap = (x - a) - parallel.project(x - a)
                assert np.linalg.norm(gap) <= 1e-8

    def test_full_space_member_is_handled(self):
        rng = rng_for(726)
        full = Subspace.full(5)
        f = Family((full, Subspace.zero(5)))
        rep = verify_ibap(f)
        assert rep.verdict
        target = random_unit(rng, 5)
        x = solve_min_norm(f, [target, np.zeros(5)])
        assert np.allclose(x, target, atol=1e-10)
