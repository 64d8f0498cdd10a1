import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import linear_sum_assignment

from egmm.datagen import FOUR_CLASS_MEANS, gen_four_class
from egmm.errors import DataError, ParameterError
from egmm.kmeans import init_from_kmeans, kmeans_fit, lloyd


def test_symmetric_pairs():
    X = np.array([[0.0, 0.0], [0.0, 1.0], [10.0, 0.0], [10.0, 1.0]])
    r = kmeans_fit(X, 2, restarts=5, seed=1)
    np.testing.assert_allclose(r.centers, [[0.0, 0.5], [10.0, 0.5]])
    assert r.inertia == pytest.approx(1.0)
    np.testing.assert_array_equal(r.assignment, [1, 1, 2, 2])


def test_four_class_centers():
    X = gen_four_class(3).X
    r = kmeans_fit(X, 4, restarts=10, seed=3)
    D = np.linalg.norm(r.centers[:, None] - FOUR_CLASS_MEANS[None], axis=2)
    rows, cols = linear_sum_assignment(D)
    assert D[rows, cols].max() < 0.5


def test_identical_points():
    with pytest.raises(DataError):
        kmeans_fit(np.ones((10, 2)), 2)


@pytest.mark.parametrize("C", [1, 5])
def test_cluster_count_range(C):
    with pytest.raises(ParameterError):
        kmeans_fit(np.arange(10.0).reshape(5, 2), C)


def test_deterministic_under_seed(rng):
    X = rng.normal(size=(60, 3))
    a = kmeans_fit(X, 3, seed=11)
    b = kmeans_fit(X, 3, seed=11)
    np.testing.assert_array_equal(a.centers, b.centers)
    np.testing.assert_array_equal(a.assignment, b.assignment)


def test_centers_sorted_by_first_coordinate(rng):
    X = rng.normal(size=(90, 2)) + np.repeat([[5, 0], [-5, 0], [0, 0]], 30, axis=0)
    r = kmeans_fit(X, 3, seed=0)
    assert np.all(np.diff(r.centers[:, 0]) > 0)


def test_pooled_covariance_oracle(rng):
    X = rng.normal(size=(50, 2))
    r = kmeans_fit(X, 3, seed=2)
    S = np.zeros((2, 2))
    for i, k in enumerate(r.assignment):
        d = X[i] - r.centers[k - 1]
        S += np.outer(d, d)
    np.testing.assert_allclose(r.pooled_covariance, S / 50, atol=1e-12)


@given(st.integers(0, 2**32 - 1), st.integers(2, 5))
def test_lloyd_monotone_and_fixpoint(seed, C):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(40, 2))
    init = X[rng.choice(40, C, replace=False)]
    centers, labels, trace = lloyd(X, init)
    assert all(b <= a + 1e-12 for a, b in zip(trace, trace[1:]))
    d2 = ((X[:, None] - centers[None]) ** 2).sum(axis=2)
    np.testing.assert_array_equal(d2.argmin(axis=1), labels)
    assert np.bincount(labels, minlength=C).min() > 0


def test_empty_cluster_reseeded():
    X = np.array([[0.0], [0.1], [0.2], [10.0]])
    # the middle center attracts nothing on the first pass
    centers, labels, _ = lloyd(X, np.array([[0.1], [100.0], [10.0]]))
    assert np.bincount(labels, minlength=3).min() > 0


class TestInit:
    def test_uniform_weights_and_centers(self, rng):
        r = kmeans_fit(rng.normal(size=(30, 2)), 2, seed=0)
        w, mu, cov = init_from_kmeans(r, 3)
        np.testing.assert_allclose(w, [1 / 3] * 3)
        np.testing.assert_array_equal(mu, r.centers)
        np.testing.assert_array_equal(cov, r.pooled_covariance)

    def test_singular_pooled_scatter_is_ridged(self):
        # points on a line: the within-cluster scatter has rank one
        X = np.column_stack([np.arange(8.0), np.zeros(8)])
        r = kmeans_fit(X, 2, seed=0)
        _, _, cov = init_from_kmeans(r, 3)
        assert np.linalg.eigvalsh(cov).min() > 0
