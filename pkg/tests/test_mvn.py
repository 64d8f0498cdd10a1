import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import multivariate_normal, special_ortho_group

from egmm.errors import NumericError, ParameterError
from egmm.mvn import GaussianParam, log_density, log_density_shared, regularize_spd

LOG_INV_2PI = -np.log(2 * np.pi)


def dense_oracle(x, mu, cov):
    d = np.asarray(x, float) - mu
    D = len(mu)
    return -0.5 * (D * np.log(2 * np.pi) + np.log(np.linalg.det(cov)) + d @ np.linalg.inv(cov) @ d)


def random_spd(rng, D):
    A = rng.normal(size=(D, D))
    return A @ A.T + 0.5 * np.eye(D)


class TestLogDensity:
    def test_at_mean(self):
        p = GaussianParam(np.zeros(2), np.eye(2))
        assert log_density(np.zeros(2), p) == pytest.approx(LOG_INV_2PI, abs=1e-12)

    def test_unit_distance(self):
        p = GaussianParam(np.zeros(2), np.eye(2))
        assert log_density([1.0, 0.0], p) == pytest.approx(LOG_INV_2PI - 0.5, abs=1e-12)

    def test_correlated_against_dense_inverse(self):
        cov = np.array([[3.0, 2.0], [2.0, 3.0]])
        p = GaussianParam([2.0, 0.0], cov)
        expected = dense_oracle([2.0, 4.0], np.array([2.0, 0.0]), cov)
        assert log_density([2.0, 4.0], p) == pytest.approx(expected, abs=1e-12)

    def test_batch_against_scipy(self, rng):
        for D in (1, 3, 6):
            cov = random_spd(rng, D)
            means = rng.normal(size=(4, D))
            X = rng.normal(size=(40, D)) * 3
            ref = np.column_stack([multivariate_normal(m, cov).logpdf(X) for m in means])
            np.testing.assert_allclose(
                log_density_shared(X, means, cov), ref.reshape(40, 4), atol=1e-10
            )

    def test_far_points_stay_finite(self):
        p = GaussianParam(np.zeros(2), np.eye(2) * 1e-4)
        assert np.isfinite(log_density([1e3, -1e3], p))

    def test_dimension_mismatch(self):
        p = GaussianParam(np.zeros(2), np.eye(2))
        with pytest.raises(ParameterError):
            log_density(np.zeros(3), p)

    def test_asymmetric_covariance_rejected(self):
        with pytest.raises(ParameterError):
            GaussianParam(np.zeros(2), [[1.0, 0.5], [0.0, 1.0]])

    def test_integrates_to_one(self):
        p = GaussianParam([0.7], [[2.5]])
        sd = np.sqrt(2.5)
        grid = np.linspace(0.7 - 10 * sd, 0.7 + 10 * sd, 4001)
        dens = np.exp(log_density(grid[:, None], p))
        assert np.trapezoid(dens, grid) == pytest.approx(1.0, abs=1e-3)

    @given(st.integers(1, 5), st.integers(0, 2**32 - 1))
    def test_rotation_invariance(self, D, seed):
        rng = np.random.default_rng(seed)
        cov = random_spd(rng, D)
        mu, x = rng.normal(size=D), rng.normal(size=D)
        Q = special_ortho_group.rvs(D, random_state=rng) if D > 1 else np.array([[-1.0]])
        a = log_density(x, GaussianParam(mu, cov))
        b = log_density(Q @ x, GaussianParam(Q @ mu, Q @ cov @ Q.T))
        assert a == pytest.approx(b, abs=1e-10)


class TestRegularize:
    def test_pd_unchanged(self):
        I = np.eye(3)
        assert regularize_spd(I, 1e-6) is not None
        np.testing.assert_array_equal(regularize_spd(I, 1e-6), I)

    def test_zero_matrix_fails(self):
        with pytest.raises(NumericError):
            regularize_spd(np.zeros((2, 2)), 1e-6)

    def test_rank_one(self):
        v = np.array([1.0, 1.0])
        S = np.outer(v, v)  # trace 2, eigenvalues 0 and 2
        out = regularize_spd(S, 1e-6)
        np.testing.assert_allclose(out, S + 1e-6 * np.eye(2), rtol=0, atol=1e-15)
        assert np.linalg.eigvalsh(out).min() > 0

    def test_non_finite(self):
        with pytest.raises(NumericError):
            regularize_spd(np.array([[np.nan, 0], [0, 1.0]]))

    def test_not_square(self):
        with pytest.raises(ParameterError):
            regularize_spd(np.ones((2, 3)))
