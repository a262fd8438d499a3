"""Product-space lifting, operator orderings, and the prod driver."""

import numpy as np
import pytest
from numpy import linalg as la

from crmfeas.errors import DimensionMismatch, NotDiagonal, NotInAffine
from crmfeas.methods import Method, SolverConfig, Status, run
from crmfeas.product_space import (
    DiagonalSubspace,
    ProductSet,
    crm_prod_step,
    drm_prod_step,
    lift,
    map_prod_step,
    project_d,
    project_w,
    restrict,
    run_prod,
)
from crmfeas.sets import Ball, Box, Halfspace, SecondOrderCone

TWO_BALLS = ProductSet([Ball([-1.0, 0.0], 1.0), Ball([1.0, 0.0], 1.0)])
OVERLAP = ProductSet([Ball([-1.0, 0.0], 1.25), Ball([1.0, 0.0], 1.25)])


class TestLiftRestrict:
    def test_lift_concatenates(self):
        assert np.array_equal(lift([1.0, 2.0], 3), [1, 2, 1, 2, 1, 2])

    def test_lift_zero(self):
        assert np.array_equal(lift([0.0, 0.0], 2), np.zeros(4))

    def test_round_trip(self, rng):
        x = rng.standard_normal(5)
        assert np.array_equal(restrict(lift(x, 4), 4), x)

    def test_restrict_examples(self):
        assert np.array_equal(restrict([1.0, 2.0, 1.0, 2.0], 2), [1.0, 2.0])
        # averaging definition, visible when the diagonality check is waived
        assert np.array_equal(restrict([1.0, 3.0, 3.0, 5.0], 2, tol=np.inf), [2.0, 4.0])

    def test_restrict_rejects_disagreeing_blocks(self):
        with pytest.raises(NotDiagonal):
            restrict([0.0, 0.0, 1.0, 1.0], 2)

    def test_restrict_bad_block_count(self):
        with pytest.raises(DimensionMismatch):
            restrict([1.0, 2.0, 3.0], 2)

    def test_lift_requires_positive_m(self):
        with pytest.raises(ValueError):
            lift([1.0], 0)


class TestProjections:
    def test_project_d_blockwise_mean(self):
        z = np.array([1.0, 3.0, 3.0, 5.0])
        assert np.array_equal(project_d(z, 2), [2.0, 4.0, 2.0, 4.0])

    def test_project_d_fixes_diagonal(self, rng):
        z = lift(rng.standard_normal(3), 4)
        assert np.allclose(project_d(z, 4), z, atol=1e-15)

    def test_project_d_linearity(self, rng):
        z = rng.standard_normal(12)
        assert np.allclose(project_d(z, 3) + project_d(-z, 3), np.zeros(12), atol=1e-15)

    def test_project_d_orthogonality(self, rng):
        # (z - P_D z) ⊥ D, checked on random diagonal directions
        D = DiagonalSubspace(4, 3)
        for _ in range(30):
            z = 3.0 * rng.standard_normal(12)
            residual = z - D.project(z)
            d = lift(rng.standard_normal(4), 3)
            assert abs(float(residual @ d)) <= 1e-10 * (1 + la.norm(z) * la.norm(d))

    def test_project_w_feasible_blocks_fixed(self, rng):
        z = np.concatenate([[-2.0, 0.0], [0.5, 0.0]])  # both blocks inside their ball
        assert np.allclose(project_w(OVERLAP, z), z, atol=1e-15)

    def test_project_w_single_factor(self, rng):
        cone = SecondOrderCone(3)
        W = ProductSet([cone])
        z = rng.standard_normal(3)
        assert np.array_equal(W.project(z), cone.project(z))

    def test_project_w_blocks_independent(self):
        W = ProductSet([Halfspace([1.0, 0.0], 0.0), Halfspace([0.0, 1.0], 0.0)])
        z = np.array([-1.0, 5.0, 3.0, 2.0])  # block 1 feasible, block 2 not
        out = W.project(z)
        assert np.array_equal(out[:2], z[:2])
        assert np.allclose(out[2:], [3.0, 0.0])

    def test_halfspace_fast_path_matches_generic(self, rng):
        halfspaces = [Halfspace(rng.standard_normal(4) + 0.1, float(rng.standard_normal()))
                      for _ in range(6)]
        W = ProductSet(halfspaces)
        assert W._rows is not None
        for _ in range(25):
            z = 3.0 * rng.standard_normal(24)
            fast = W.project(z)
            slow = np.concatenate(
                [h.project(z[4 * i:4 * (i + 1)]) for i, h in enumerate(halfspaces)]
            )
            assert la.norm(fast - slow) <= 1e-12 * (1 + la.norm(z))

    def test_mixed_dimension_factors_rejected(self):
        with pytest.raises(DimensionMismatch):
            ProductSet([Ball([0.0, 0.0], 1.0), Ball([0.0, 0.0, 0.0], 1.0)])

    def test_diagonal_to_affine_matches_projector(self, rng):
        D = DiagonalSubspace(3, 3)
        U = D.to_affine()
        for _ in range(10):
            z = rng.standard_normal(9)
            assert np.allclose(D.project(z), U.project(z), atol=1e-10)


class TestProdSteps:
    def test_crm_prod_fixed_point(self):
        z = lift([-0.2, 0.1], 2)  # in both balls and diagonal
        assert np.array_equal(crm_prod_step(OVERLAP, z), z)

    def test_crm_prod_m1_collapses_to_projection(self, rng):
        W = ProductSet([Ball([0.0, 0.0], 1.0)])
        z = np.array([3.0, 4.0])
        out = crm_prod_step(W, z)
        assert np.allclose(out, W.factors[0].project(z), atol=1e-12)

    def test_crm_prod_requires_diagonal_point(self):
        with pytest.raises(NotInAffine):
            crm_prod_step(TWO_BALLS, [0.0, 2.0, 1.0, 2.0])

    def test_equivalence_of_formulations(self, rng):
        # x in every factor  <=>  lift(x, m) in W (and in D exactly)
        factors = [Ball([0.0, 0.0], 2.0), Halfspace([1.0, 0.0], 1.0), Box([-3.0, -3.0], [3.0, 3.0])]
        W = ProductSet(factors)
        D = DiagonalSubspace(2, 3)
        for _ in range(50):
            x = 2.5 * rng.standard_normal(2)
            zx = lift(x, 3)
            residuals = [la.norm(x - f.project(x)) for f in factors]
            if max(residuals) <= 1e-12:
                assert W.contains(zx, 1e-10)
            elif max(residuals) >= 1e-8:
                assert not W.contains(zx, 1e-10)
            assert la.norm(zx - D.project(zx)) <= 1e-14 * (1.0 + la.norm(zx))

    def test_map_prod_ordering_pinned(self, rng):
        # P_W P_D != P_D P_W here, so the default order is observable
        z = np.array([0.0, 2.0, 0.5, 2.0])
        W = TWO_BALLS
        expected = W.project(project_d(z, 2))
        assert np.array_equal(map_prod_step(W, z), expected)
        swapped = project_d(W.project(z), 2)
        assert np.array_equal(map_prod_step(W, z, order="wd"), swapped)
        assert not np.allclose(expected, swapped)

    def test_drm_prod_ordering_pinned(self):
        z = np.array([0.0, 2.0, 0.5, 2.0])
        W = TWO_BALLS
        D = DiagonalSubspace(2, 2)
        expected = 0.5 * (z + W.reflect(D.reflect(z)))
        assert np.allclose(drm_prod_step(W, z), expected, atol=1e-15)
        swapped = 0.5 * (z + D.reflect(W.reflect(z)))
        assert np.allclose(drm_prod_step(W, z, order="wd"), swapped, atol=1e-15)
        assert not np.allclose(expected, swapped)

    def test_map_prod_result_in_w(self, rng):
        for _ in range(10):
            z = 3.0 * rng.standard_normal(4)
            out = map_prod_step(TWO_BALLS, z)
            assert TWO_BALLS.contains(out, 1e-10)

    def test_prod_fixed_points(self):
        z = lift([0.05, 0.1], 2)  # in both overlapping balls, diagonal
        for step in (map_prod_step, drm_prod_step):
            assert np.allclose(step(OVERLAP, z), z, atol=1e-14)

    def test_order_flag_validated(self):
        with pytest.raises(ValueError):
            map_prod_step(TWO_BALLS, np.zeros(4), order="xyz")


class TestRunProd:
    def test_two_tangent_balls_crm(self):
        cfg = SolverConfig(method=Method.CRM, tol=1e-6, record_trace=True)
        trace = run_prod(TWO_BALLS, lift([0.0, 2.0], 2), cfg)
        assert trace.status is Status.CONVERGED
        # D-invariance along the whole trajectory
        for z in trace.iterates:
            assert la.norm(z - project_d(z, 2)) <= 1e-8 * (1 + la.norm(z))
        x = restrict(project_d(trace.final_point, 2), 2)
        for ball in TWO_BALLS.factors:
            assert ball.contains(x, tol=1e-6)
        # independent oracle: a long MAP-prod run heads to the same region
        map_trace = run_prod(TWO_BALLS, lift([0.0, 2.0], 2),
                             SolverConfig(method=Method.MAP, tol=1e-4, max_iter=200_000))
        assert map_trace.status is Status.CONVERGED
        x_map = restrict(map_trace.final_point, 2)
        assert la.norm(x - [0.0, 0.0]) < 5e-3  # tangency point
        assert la.norm(x_map - x) < 5e-2

    def test_all_methods_converge_on_overlapping_balls(self):
        z0 = lift([0.0, 2.0], 2)
        for method in (Method.CRM, Method.MAP, Method.DRM):
            trace = run_prod(OVERLAP, z0, SolverConfig(method=method, tol=1e-6))
            assert trace.status is Status.CONVERGED
            x = restrict(trace.final_point, 2, tol=1e-6)
            for ball in OVERLAP.factors:
                assert ball.contains(x, tol=2e-6)

    def test_m1_collapse_all_methods_equal(self):
        W = ProductSet([Ball([0.0, 0.0], 1.0)])
        z0 = np.array([4.0, 3.0])
        counts = {}
        for method in (Method.CRM, Method.MAP, Method.DRM):
            trace = run_prod(W, z0, SolverConfig(method=method, tol=1e-9))
            assert trace.status is Status.CONVERGED
            counts[method] = trace.iterations
            assert la.norm(trace.final_point - W.factors[0].project(z0)) <= 1e-8
        assert len(set(counts.values())) == 1
        assert max(counts.values()) <= 2

    def test_gap_trace_shape_and_final(self):
        cfg = SolverConfig(method=Method.MAP, tol=1e-6, record_trace=True)
        trace = run_prod(OVERLAP, lift([0.0, 3.0], 2), cfg)
        assert len(trace.gaps) == trace.iterations + 1
        assert len(trace.iterates) == trace.iterations + 1
        assert trace.gaps[-1] < 1e-6

    def test_generic_two_set_driver_also_works_on_w_and_d(self):
        # one driver, two wirings: K := W, U := D with the two-set gap rule
        D = DiagonalSubspace(2, 2)
        trace = run(OVERLAP, D, lift([0.0, 2.0], 2), SolverConfig(method=Method.CRM, tol=1e-6))
        assert trace.status is Status.CONVERGED
        x = restrict(trace.final_point, 2, tol=1e-5)
        for ball in OVERLAP.factors:
            assert ball.contains(x, tol=1e-5)

    def test_serial_method_rejected(self):
        with pytest.raises(ValueError):
            run_prod(OVERLAP, np.zeros(4), SolverConfig(method=Method.SERIAL_CRM))
