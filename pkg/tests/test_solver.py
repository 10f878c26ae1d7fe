import numpy as np
import pytest

from conftest import eta_of, random_operators, random_row_stochastic
from retasa.errors import DataError, NumericalError
from retasa.kernels import KernelSpec
from retasa.solver import (
    OperatorMatrices,
    build_operators,
    evaluate_rho_offsample,
    extended_residual_ss,
    finalize_weights,
    residual_ss,
    solve_iterated_tikhonov,
    solve_tikhonov,
    tune_alpha,
)

IDENTITY2 = OperatorMatrices(c_xy=np.eye(2), c_yx=np.eye(2))


class TestBuildOperators:
    def test_separated_points_give_identity(self):
        spec = KernelSpec("gaussian", 0.1)
        ops = build_operators([0.0, 10.0], [0.0, 10.0], spec, spec)
        np.testing.assert_allclose(ops.c_xy, np.eye(2), atol=1e-10)
        np.testing.assert_allclose(ops.c_yx, np.eye(2), atol=1e-10)

    def test_middle_row_symmetric(self):
        spec = KernelSpec("gaussian", 1.0)
        ops = build_operators([0.0, 1.0, 2.0], [0.0, 1.0, 2.0], spec, spec)
        assert ops.c_xy[1, 0] == pytest.approx(ops.c_xy[1, 2], rel=1e-12)

    def test_rows_sum_to_one(self, rng):
        spec = KernelSpec("gaussian", 0.7)
        x = rng.standard_normal((30, 2))
        y = rng.standard_normal(30)
        ops = build_operators(x, y, spec, spec)
        np.testing.assert_allclose(ops.c_xy.sum(axis=1), 1.0, atol=1e-10)
        np.testing.assert_allclose(ops.c_yx.sum(axis=1), 1.0, atol=1e-10)

    def test_length_mismatch(self):
        spec = KernelSpec("gaussian", 1.0)
        with pytest.raises(DataError):
            build_operators([0.0, 1.0], [0.0, 1.0, 2.0], spec, spec)

    def test_row_simplex_enforced(self):
        bad = np.array([[0.6, 0.6], [0.5, 0.5]])
        with pytest.raises(NumericalError):
            OperatorMatrices(c_xy=bad, c_yx=np.eye(2))


class TestSolveTikhonov:
    def test_identity_scalar_case(self):
        west = solve_tikhonov(IDENTITY2, eta_of([1.0, 1.0]), alpha=1.0, policy="raw")
        np.testing.assert_allclose(west.rho, [0.5, 0.5], rtol=1e-14)

    def test_zero_eta_gives_unit_weights(self, rng):
        ops = random_operators(rng, 5)
        west = solve_tikhonov(ops, eta_of(np.zeros(5)), alpha=0.3)
        np.testing.assert_array_equal(west.rho, np.zeros(5))
        np.testing.assert_array_equal(west.omega, np.ones(5))

    def test_matches_explicit_inverse(self, rng):
        ops = random_operators(rng, 6)
        eta = eta_of(rng.uniform(-1, 1, 6))
        west = solve_tikhonov(ops, eta, alpha=0.3, policy="raw")
        oracle = np.linalg.inv(0.3 * np.eye(6) + ops.c_xy @ ops.c_yx) @ ops.c_xy @ eta.values
        np.testing.assert_allclose(west.rho, oracle, atol=1e-10)

    def test_nonpositive_alpha(self):
        with pytest.raises(ValueError):
            solve_tikhonov(IDENTITY2, eta_of([0.0, 0.0]), alpha=0.0)
        with pytest.raises(ValueError):
            solve_tikhonov(IDENTITY2, eta_of([0.0, 0.0]), alpha=-1.0)

    def test_spectral_filter_oracle(self, rng):
        # Build symmetric doubly stochastic operators so the solution has a
        # known eigenexpansion: rho = sum_k lam_k / (lam_k^2 + alpha) <v_k, eta> v_k.
        n = 8
        perm = rng.permutation(n)
        p = np.eye(n)[perm]
        sym = 0.5 * (p + p.T)
        v = 0.35 * np.eye(n) + 0.25 * np.full((n, n), 1.0 / n) + 0.4 * sym
        ops = OperatorMatrices(c_xy=v.T.copy(), c_yx=v.copy())
        eta = eta_of(rng.uniform(-1, 1, n))
        alpha = 0.17
        west = solve_tikhonov(ops, eta, alpha, policy="raw")
        lam, vecs = np.linalg.eigh(v)
        coef = lam / (lam**2 + alpha) * (vecs.T @ eta.values)
        oracle = vecs @ coef
        np.testing.assert_allclose(west.rho, oracle, atol=1e-8)

    def test_shrinks_toward_zero_with_alpha(self, rng):
        ops = random_operators(rng, 12)
        eta = eta_of(rng.uniform(-2, 2, 12))
        norms = [
            np.abs(solve_tikhonov(ops, eta, a, policy="raw").rho).max()
            for a in (0.01, 0.1, 1.0, 10.0, 100.0, 1e6)
        ]
        assert all(a >= b for a, b in zip(norms, norms[1:]))
        assert norms[-1] < 1e-3


class TestOffsampleEvaluation:
    @pytest.fixture
    def small_problem(self, rng):
        spec = KernelSpec("gaussian", 0.8)
        y = rng.standard_normal(25)
        x = y + 0.5 * rng.standard_normal(25)
        ops = build_operators(x, y, spec, spec)
        eta = eta_of(rng.uniform(-1, 1, 25))
        return spec, y, ops, eta

    def test_fixed_point_identity(self, small_problem):
        spec, y, ops, eta = small_problem
        west = solve_tikhonov(ops, eta, alpha=0.05, policy="raw")
        vals = evaluate_rho_offsample(y, y, spec, ops, west.rho, eta, 0.05)
        np.testing.assert_allclose(vals, west.rho, atol=1e-6)

    def test_huge_alpha_vanishes(self, small_problem):
        spec, y, ops, eta = small_problem
        west = solve_tikhonov(ops, eta, alpha=1e9, policy="raw")
        assert abs(evaluate_rho_offsample(0.123, y, spec, ops, west.rho, eta, 1e9)) < 1e-8

    def test_symmetric_midpoint_is_mean(self):
        # Two symmetric points with symmetric eta: the midpoint evaluation
        # equals the mean of the two on-sample values.
        spec = KernelSpec("gaussian", 1.0)
        y = np.array([-1.0, 1.0])
        x = np.array([-1.0, 1.0])
        ops = build_operators(x, y, spec, spec)
        eta = eta_of([0.4, 0.4])
        west = solve_tikhonov(ops, eta, alpha=0.5, policy="raw")
        mid = evaluate_rho_offsample(0.0, y, spec, ops, west.rho, eta, 0.5)
        assert mid == pytest.approx(0.5 * (west.rho[0] + west.rho[1]), abs=1e-6)


class TestIteratedTikhonov:
    def test_zero_eta(self, rng):
        ops = random_operators(rng, 4)
        rho2 = solve_iterated_tikhonov(ops, eta_of(np.zeros(4)), 0.7, np.zeros(4))
        np.testing.assert_array_equal(rho2, np.zeros(4))

    def test_identity_scalar_recursion(self):
        eta = eta_of([1.0, 1.0])
        west = solve_tikhonov(IDENTITY2, eta, alpha=1.0, policy="raw")
        rho2 = solve_iterated_tikhonov(IDENTITY2, eta, 1.0, west.rho)
        np.testing.assert_allclose(rho2, [0.75, 0.75], rtol=1e-14)

    def test_matches_expanded_closed_form(self, rng):
        ops = random_operators(rng, 6)
        eta = eta_of(rng.uniform(-1, 1, 6))
        alpha = 0.4
        west = solve_tikhonov(ops, eta, alpha, policy="raw")
        rho2 = solve_iterated_tikhonov(ops, eta, alpha, west.rho)
        inv = np.linalg.inv(alpha * np.eye(6) + ops.c_xy @ ops.c_yx)
        oracle = inv @ (ops.c_xy + alpha * inv @ ops.c_xy) @ eta.values
        np.testing.assert_allclose(rho2, oracle, atol=1e-10)


class TestResidualScores:
    def test_zero_eta_zero_score(self, rng):
        ops = random_operators(rng, 4)
        zero = eta_of(np.zeros(4))
        assert residual_ss(0.3, ops, zero, np.zeros(4)) == 0.0
        assert extended_residual_ss(0.3, ops, zero, np.zeros(4)) == 0.0

    def test_scalar_hand_case(self):
        ops = OperatorMatrices(c_xy=np.eye(1), c_yx=np.eye(1))
        eta = eta_of([0.8])
        rho2 = np.array([0.3])
        alpha = 0.5
        assert residual_ss(alpha, ops, eta, rho2) == pytest.approx((0.3 - 0.8) ** 2 / 0.5)
        assert extended_residual_ss(alpha, ops, eta, rho2) == pytest.approx(
            (0.3 - 0.8) ** 2 / 0.25
        )

    def test_nonnegative_over_grid(self, rng):
        ops = random_operators(rng, 7)
        eta = eta_of(rng.uniform(-1, 1, 7))
        for alpha in np.geomspace(1e-3, 10, 12):
            west = solve_tikhonov(ops, eta, alpha, policy="raw")
            rho2 = solve_iterated_tikhonov(ops, eta, alpha, west.rho)
            assert residual_ss(alpha, ops, eta, rho2) >= 0.0

    def test_extended_matches_matrix_form(self, rng):
        ops = random_operators(rng, 6)
        eta = eta_of(rng.uniform(-1, 1, 6))
        alpha = 0.2
        west = solve_tikhonov(ops, eta, alpha, policy="raw")
        rho2 = solve_iterated_tikhonov(ops, eta, alpha, west.rho)
        eps = ops.c_xy @ (ops.c_yx @ rho2 - eta.values)
        oracle = float(eps @ eps) / alpha**2
        assert extended_residual_ss(alpha, ops, eta, rho2) == pytest.approx(
            oracle, abs=1e-12
        )


class TestTuneAlpha:
    def test_single_point_grid(self, rng):
        ops = random_operators(rng, 5)
        eta = eta_of(rng.uniform(-1, 1, 5))
        result = tune_alpha([0.37], "residual", ops, eta)
        assert result.alpha == 0.37
        assert result.scores.shape == (1, 2)

    def test_zero_eta_ties_to_largest(self, rng):
        ops = random_operators(rng, 5)
        result = tune_alpha([0.01, 0.1, 1.0], "residual", ops, eta_of(np.zeros(5)))
        assert result.alpha == 1.0
        np.testing.assert_array_equal(result.scores[:, 1], np.zeros(3))

    def test_rejects_bad_inputs(self, rng):
        ops = random_operators(rng, 3)
        eta = eta_of(np.zeros(3))
        with pytest.raises(ValueError):
            tune_alpha([], "residual", ops, eta)
        with pytest.raises(ValueError):
            tune_alpha([0.1, -0.5], "residual", ops, eta)
        with pytest.raises(ValueError):
            tune_alpha([0.1], "bogus", ops, eta)

    def test_scores_match_explicit_pipeline(self, rng):
        ops = random_operators(rng, 6)
        eta = eta_of(rng.uniform(-1, 1, 6))
        grid = [0.05, 0.5, 5.0]
        result = tune_alpha(grid, "extended", ops, eta)
        for alpha, score in result.scores:
            west = solve_tikhonov(ops, eta, alpha, policy="raw")
            rho2 = solve_iterated_tikhonov(ops, eta, alpha, west.rho)
            assert score == pytest.approx(
                extended_residual_ss(alpha, ops, eta, rho2), rel=1e-10
            )

    def test_prefers_interior_dip(self):
        # A dip at the middle with a lower endpoint tail: the dip wins.
        scores = np.array([10.0, 2.0, 5.0, 1.0])
        from retasa.solver import _select_alpha_index

        assert _select_alpha_index(scores) == 1
        # No interior minimum: global argmin.
        assert _select_alpha_index(np.array([3.0, 2.0, 1.0])) == 2


class TestFinalizeWeights:
    def test_zero_rho_unit_weights(self):
        for policy in ("clamp_rescale", "clamp_only", "raw"):
            omega, clamped, factor = finalize_weights(np.zeros(4), policy)
            np.testing.assert_array_equal(omega, np.ones(4))
            assert clamped == 0
            assert factor == 1.0

    def test_clamp_rescale_example(self):
        omega, clamped, factor = finalize_weights(np.array([-2.0, 0.0]), "clamp_rescale")
        np.testing.assert_allclose(omega, [0.0, 2.0])
        assert clamped == 1
        assert factor == pytest.approx(2.0)

    def test_raw_example(self):
        omega, clamped, factor = finalize_weights(np.array([0.5, -0.5]), "raw")
        np.testing.assert_allclose(omega, [1.5, 0.5])
        assert clamped == 0

    def test_all_zero_after_clamp(self):
        with pytest.raises(NumericalError):
            finalize_weights(np.array([-2.0, -3.0]), "clamp_rescale")

    def test_unknown_policy(self):
        with pytest.raises(ValueError):
            finalize_weights(np.zeros(2), "bogus")


def test_solver_inverse_property_many_instances():
    rng = np.random.default_rng(99)
    for _ in range(50):
        n = int(rng.integers(3, 11))
        ops = OperatorMatrices(
            c_xy=random_row_stochastic(rng, n), c_yx=random_row_stochastic(rng, n)
        )
        eta = eta_of(rng.uniform(-2, 2, n))
        alpha = float(10 ** rng.uniform(-3, 1))
        west = solve_tikhonov(ops, eta, alpha, policy="raw")
        oracle = np.linalg.inv(alpha * np.eye(n) + ops.c_xy @ ops.c_yx) @ ops.c_xy @ eta.values
        assert np.abs(west.rho - oracle).max() < 1e-10
