import numpy as np
import pytest

from retasa.erm import PolynomialModel, expand_features, fit_weighted, predict
from retasa.errors import DataError


def ols_lstsq(x, y, degree):
    design = np.column_stack([np.ones(len(y)), expand_features(np.atleast_2d(x.T).T, degree)])
    beta, *_ = np.linalg.lstsq(design, y, rcond=None)
    return beta


def test_unit_weights_match_ols(rng):
    x = rng.standard_normal((300, 1))
    y = np.sin(x[:, 0]) + rng.standard_normal(300)
    model = fit_weighted(x, y, np.ones(300), degree=3)
    beta = ols_lstsq(x, y, 3)
    assert abs(model.intercept - beta[0]) < 1e-10
    np.testing.assert_allclose(model.coefficients, beta[1:], atol=1e-10)


def test_zero_weights_drop_rows(rng):
    x = rng.standard_normal((60, 1))
    y = 2.0 * x[:, 0] + rng.standard_normal(60)
    w = np.zeros(60)
    w[:25] = 1.0
    full = fit_weighted(x, y, w, degree=2)
    subset = fit_weighted(x[:25], y[:25], np.ones(25), degree=2)
    assert full.intercept == pytest.approx(subset.intercept, abs=1e-10)
    np.testing.assert_allclose(full.coefficients, subset.coefficients, atol=1e-10)


def test_two_point_weighted_line():
    # Closed-form check: the weighted line through (0, 0) w=1 and (1, 2) w=3
    # interpolates both points exactly (two points, two parameters).
    model = fit_weighted(np.array([[0.0], [1.0]]), np.array([0.0, 2.0]), [1.0, 3.0], degree=1)
    assert model.intercept == pytest.approx(0.0, abs=1e-12)
    assert model.coefficients[0] == pytest.approx(2.0, abs=1e-12)


def test_two_point_weighted_centroid(rng):
    # Overdetermined hand case: constant model (degree-1 with a single
    # repeated x) reduces the fit to the weighted mean of y.
    x = np.array([[1.0], [1.0], [2.0]])
    y = np.array([0.0, 4.0, 1.0])
    w = np.array([1.0, 3.0, 2.0])
    model = fit_weighted(x, y, w, degree=1)
    # Normal equations of a line through points (1, .), (1, .), (2, .):
    sw, swx = w.sum(), (w * x[:, 0]).sum()
    swxx = (w * x[:, 0] ** 2).sum()
    swy, swxy = (w * y).sum(), (w * x[:, 0] * y).sum()
    a_mat = np.array([[sw, swx], [swx, swxx]])
    b_vec = np.array([swy, swxy])
    expected = np.linalg.solve(a_mat, b_vec)
    assert model.intercept == pytest.approx(expected[0], abs=1e-10)
    assert model.coefficients[0] == pytest.approx(expected[1], abs=1e-10)


def test_weighted_residual_orthogonality(rng):
    x = rng.standard_normal((200, 1))
    y = np.sin(x[:, 0]) + rng.standard_normal(200)
    w = rng.uniform(0.0, 2.0, 200)
    model = fit_weighted(x, y, w, degree=5)
    design = np.column_stack([np.ones(200), expand_features(x, 5)])
    resid = y - design @ np.concatenate([[model.intercept], model.coefficients])
    grad = design.T @ (w * resid)
    scale = np.abs(design.T @ (w * y)).max()
    assert np.abs(grad).max() <= 1e-8 * (1.0 + scale)


def test_weight_scaling_invariance(rng):
    x = rng.standard_normal((150, 2))
    y = x[:, 0] - 0.5 * x[:, 1] ** 2 + rng.standard_normal(150)
    w = rng.uniform(0.1, 3.0, 150)
    a = fit_weighted(x, y, w, degree=3)
    b = fit_weighted(x, y, 73.5 * w, degree=3)
    assert a.intercept == pytest.approx(b.intercept, abs=1e-10)
    np.testing.assert_allclose(a.coefficients, b.coefficients, atol=1e-10)


def test_noiseless_quadratic_interpolation(rng):
    x = rng.standard_normal((40, 1))
    y = 1.0 - 2.0 * x[:, 0] + 0.5 * x[:, 0] ** 2
    model = fit_weighted(x, y, np.ones(40), degree=2)
    np.testing.assert_allclose(predict(model, x), y, atol=1e-8)


def test_all_zero_weights_rejected(rng):
    with pytest.raises(DataError):
        fit_weighted(rng.standard_normal((10, 1)), rng.standard_normal(10), np.zeros(10), 1)


def test_negative_weights_rejected(rng):
    with pytest.raises(DataError):
        fit_weighted(rng.standard_normal((10, 1)), rng.standard_normal(10), -np.ones(10), 1)


def test_rank_deficient_design(rng):
    x1 = rng.standard_normal(30)
    x = np.column_stack([x1, x1])  # identical columns
    with pytest.raises(DataError):
        fit_weighted(x, rng.standard_normal(30), np.ones(30), degree=1)


class TestPredict:
    def test_constant_model(self):
        m = PolynomialModel(degree=1, coefficients=np.zeros(2), intercept=5.0)
        np.testing.assert_allclose(predict(m, np.zeros((4, 2))), np.full(4, 5.0))

    def test_pure_square(self):
        m = PolynomialModel(degree=2, coefficients=np.array([0.0, 1.0]), intercept=0.0)
        assert predict(m, 3.0) == pytest.approx(9.0)

    def test_scalar_batch_for_univariate(self):
        m = PolynomialModel(degree=1, coefficients=np.array([2.0]), intercept=1.0)
        np.testing.assert_allclose(predict(m, np.array([0.0, 1.0, 2.0])), [1.0, 3.0, 5.0])

    def test_dimension_mismatch(self):
        m = PolynomialModel(degree=1, coefficients=np.ones(2), intercept=0.0)
        with pytest.raises(DataError):
            predict(m, np.zeros((3, 3)))

    def test_degree5_feature_order(self, rng):
        # Coefficient layout is power-major across coordinates.
        x = rng.standard_normal((5, 2))
        feats = expand_features(x, 3)
        np.testing.assert_array_equal(feats[:, 0], x[:, 0])
        np.testing.assert_array_equal(feats[:, 1], x[:, 1])
        np.testing.assert_array_equal(feats[:, 2], x[:, 0] ** 2)
        np.testing.assert_array_equal(feats[:, 5], x[:, 1] ** 3)
