import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import logsumexp
from scipy.stats import multivariate_normal

from egmm._em import is_monotone
from egmm.belief import enumerate_focal_sets
from egmm.core import (
    EgmmConfig,
    EgmmModel,
    component_means,
    default_kappa,
    e_step,
    egmm_em,
    egmm_fit,
    egmm_loglik,
    m_step,
    m_step_covariance,
    m_step_means,
    m_step_mixing,
    mean_system,
    q_function,
)
from egmm.datagen import gen_diamond
from egmm.errors import NumericError, ParameterError
from egmm.gmm import gmm_em


def loglik_oracle(X, model):
    mu = model.component_means
    comp = np.column_stack(
        [
            np.log(model.weights[j]) + multivariate_normal(mu[j], model.covariance).logpdf(X)
            for j in range(model.M)
        ]
    )
    return logsumexp(comp, axis=1).sum()


def means_oracle(X, m, s):
    """Weighted least squares over all (object, focal set) pairs."""
    rows, targets = [], []
    share = s.indicator / s.cardinality
    for i in range(X.shape[0]):
        for j in range(s.M):
            w = np.sqrt(m[i, j])
            rows.append(w * share[:, j])
            targets.append(w * X[i])
    sol, *_ = np.linalg.lstsq(np.array(rows), np.array(targets), rcond=None)
    return sol


def random_problem(rng, N=60, D=2, C=3, kappa=None):
    s = enumerate_focal_sets(C, kappa)
    X = rng.normal(size=(N, D)) * 2
    m = rng.dirichlet(np.ones(s.M), size=N)
    return X, m, s


class TestComponentMeans:
    def test_singletons_and_midpoint(self):
        s = enumerate_focal_sets(2)
        mu = component_means(np.array([[0.0, 0.0], [4.0, 4.0]]), s)
        np.testing.assert_allclose(mu, [[0, 0], [4, 4], [2, 2]])

    def test_shape_check(self):
        with pytest.raises(ParameterError):
            component_means(np.zeros((3, 2)), enumerate_focal_sets(2))


class TestLikelihoodAndEStep:
    def test_single_point(self):
        s = enumerate_focal_sets(1, 1)
        model = EgmmModel(s, np.array([1.0]), np.array([[1.0, 2.0]]), np.eye(2))
        assert egmm_loglik(np.array([[1.0, 2.0]]), model) == pytest.approx(-np.log(2 * np.pi))

    def test_against_scipy(self, rng):
        X, _, s = random_problem(rng, C=3)
        A = rng.normal(size=(2, 2))
        model = EgmmModel(
            s, rng.dirichlet(np.ones(s.M)), rng.normal(size=(3, 2)), A @ A.T + np.eye(2)
        )
        assert egmm_loglik(X, model) == pytest.approx(loglik_oracle(X, model), rel=1e-12)

    def test_equal_components(self, rng):
        s = enumerate_focal_sets(3)
        model = EgmmModel(s, np.full(s.M, 1 / s.M), np.zeros((3, 2)), np.eye(2))
        np.testing.assert_allclose(e_step(rng.normal(size=(10, 2)), model), 1 / s.M)

    def test_rows_are_mass_functions(self, rng):
        X, _, s = random_problem(rng, C=4, kappa=2)
        model = EgmmModel(s, rng.dirichlet(np.ones(s.M)), rng.normal(size=(4, 2)), np.eye(2) * 0.01)
        m = e_step(X * 50, model)
        assert m.min() >= 0
        np.testing.assert_allclose(m.sum(axis=1), 1, atol=1e-9)


class TestMixing:
    def test_examples(self, rng):
        v = rng.dirichlet(np.ones(5))
        np.testing.assert_allclose(m_step_mixing(np.tile(v, (7, 1))), v)
        np.testing.assert_allclose(m_step_mixing(np.eye(2)), [0.5, 0.5])

    def test_column_mean_oracle(self, rng):
        m = rng.dirichlet(np.ones(6), size=33)
        np.testing.assert_allclose(m_step_mixing(m), [m[:, j].mean() for j in range(6)], atol=1e-12)


class TestMeans:
    @pytest.mark.parametrize("C,kappa", [(2, 2), (3, 3), (4, 2), (3, 1)])
    def test_least_squares_oracle(self, rng, C, kappa):
        X, m, s = random_problem(rng, C=C, kappa=kappa)
        np.testing.assert_allclose(m_step_means(X, m, s), means_oracle(X, m, s), atol=1e-10)

    def test_kappa_one_is_weighted_mean(self, rng):
        X, m, s = random_problem(rng, C=3, kappa=1)
        expected = (m.T @ X) / m.sum(axis=0)[:, None]
        np.testing.assert_allclose(m_step_means(X, m, s), expected, atol=1e-10)

    def test_all_mass_on_omega(self, rng):
        s = enumerate_focal_sets(2)
        X = rng.normal(size=(8, 2))
        m = np.zeros((8, 3))
        m[:, 2] = 1.0
        H, _ = mean_system(X, m, s)
        np.testing.assert_allclose(H, np.full((2, 2), 8 / 4))
        with pytest.raises(NumericError, match=r"clusters \[1, 2\]"):
            m_step_means(X, m, s)

    def test_starving_cluster_named(self, rng):
        s = enumerate_focal_sets(3, 1)
        X = rng.normal(size=(10, 2))
        m = np.zeros((10, 3))
        m[:5, 0] = m[5:, 1] = 1.0
        with pytest.raises(NumericError, match=r"\[3\]"):
            m_step_means(X, m, s)

    @given(st.integers(0, 2**32 - 1), st.integers(2, 5))
    def test_H_symmetric_psd(self, seed, C):
        rng = np.random.default_rng(seed)
        X, m, s = random_problem(rng, N=20, C=C, kappa=min(C, 3))
        H, _ = mean_system(X, m, s)
        np.testing.assert_array_equal(H, H.T)
        assert np.linalg.eigvalsh(H).min() >= -1e-10 * np.trace(H)


class TestCovariance:
    def test_single_component(self, rng):
        X = rng.normal(size=(40, 3))
        mu = X.mean(axis=0, keepdims=True)
        S = m_step_covariance(X, np.ones((40, 1)), mu, ridge=0.0)
        np.testing.assert_allclose(S, np.cov(X.T, bias=True), atol=1e-12)

    def test_zero_scatter_is_ridged(self):
        X = np.array([[0.0, 0.0], [1.0, 1.0], [3.0, 0.0]])
        S = m_step_covariance(X, np.eye(3), X)
        assert np.linalg.eigvalsh(S).min() > 0
        assert np.abs(S).max() < 1e-5


class TestQStationarity:
    """The M-step output zeroes the gradient of Q for fixed memberships."""

    @pytest.mark.parametrize("C,kappa", [(2, 2), (3, 3), (4, 2), (3, 1)])
    def test_finite_differences(self, rng, C, kappa):
        X, m, s = random_problem(rng, N=80, C=C, kappa=kappa)
        w, mu, cov = m_step(X, m, s, ridge=0.0)
        Q0 = q_function(X, m, w, mu, cov, s)
        tol = 1e-4 * (1 + abs(Q0))
        h = 1e-5 * np.abs(X).max()
        for idx in np.ndindex(mu.shape):
            e = np.zeros_like(mu)
            e[idx] = h
            g = (q_function(X, m, w, mu + e, cov, s) - q_function(X, m, w, mu - e, cov, s)) / (
                2 * h
            )
            assert abs(g) <= tol
        hs = 1e-5 * np.trace(cov)
        for a, b in zip(*np.triu_indices(2)):
            E = np.zeros_like(cov)
            E[a, b] = E[b, a] = hs
            g = (q_function(X, m, w, mu, cov + E, s) - q_function(X, m, w, mu, cov - E, s)) / (
                2 * hs
            )
            assert abs(g) <= tol
        for j in range(s.M - 1):
            d = np.zeros(s.M)
            d[j], d[-1] = 1.0, -1.0
            hw = 1e-6
            g = (
                q_function(X, m, w + hw * d, mu, cov, s) - q_function(X, m, w - hw * d, mu, cov, s)
            ) / (2 * hw)
            assert abs(g) <= tol


class TestEm:
    def test_monotone(self, rng):
        for _ in range(5):
            C = int(rng.integers(2, 5))
            X = rng.normal(size=(int(rng.integers(50, 300)), int(rng.integers(1, 4))))
            model, part = egmm_fit(
                X, EgmmConfig(C=C, restarts=1, seed=int(rng.integers(99)), max_iter=200)
            )
            assert is_monotone(model.loglik_trace)
            assert model.loglik == pytest.approx(egmm_loglik(X, model), rel=1e-12)

    def test_kappa_one_matches_shared_gmm(self, rng):
        X = rng.normal(size=(200, 2)) + np.repeat(rng.normal(size=(3, 2)) * 3, [70, 70, 60], axis=0)
        s = enumerate_focal_sets(3, 1)
        init = (np.full(3, 1 / 3), X[[0, 80, 150]].copy(), np.cov(X.T, bias=True))
        a, b = [], []
        egmm_em(X, s, *init, tol=-np.inf, max_iter=20, callback=lambda it, *p: a.append(p))
        gmm_em(
            X, *init, mode="shared", tol=-np.inf, max_iter=20, callback=lambda it, *p: b.append(p)
        )
        assert len(a) == len(b) == 20
        for pa, pb in zip(a, b):
            for x, y in zip(pa, pb):
                np.testing.assert_allclose(x, y, rtol=0, atol=1e-10)

    def test_translation_equivariance(self, rng):
        X = rng.normal(size=(120, 2)) + np.repeat([[0, 0], [4, 1]], 60, axis=0)
        s = enumerate_focal_sets(2)
        c = np.array([100.0, -50.0])
        init_mu = X[[0, 119]]
        a = egmm_em(X, s, np.full(3, 1 / 3), init_mu, np.eye(2), max_iter=50)
        b = egmm_em(X + c, s, np.full(3, 1 / 3), init_mu + c, np.eye(2), max_iter=50)
        np.testing.assert_allclose(b.means, a.means + c, atol=1e-8)
        np.testing.assert_allclose(b.covariance, a.covariance, atol=1e-8)
        np.testing.assert_allclose(b.weights, a.weights, atol=1e-8)

    def test_max_iter_flagged(self, rng):
        X = rng.normal(size=(50, 2))
        model, _ = egmm_fit(X, EgmmConfig(C=2, max_iter=1, restarts=1))
        assert model.iterations == 1 and not model.converged
        assert len(model.loglik_trace) == 2

    def test_deterministic(self, rng):
        X = rng.normal(size=(80, 2))
        cfg = EgmmConfig(C=3, restarts=2, seed=5)
        a, pa = egmm_fit(X, cfg)
        b, pb = egmm_fit(X, cfg)
        np.testing.assert_array_equal(a.means, b.means)
        np.testing.assert_array_equal(pa.masses, pb.masses)

    def test_diamond_bridge(self):
        d = gen_diamond()
        model, part = egmm_fit(d.X, EgmmConfig(C=2, kappa=2, restarts=10, seed=0))
        best = part.masses.argmax(axis=1)
        assert best[5] == 2  # column of {1, 2}
        assert set(best[:5]) | set(best[6:]) <= {0, 1}
        assert len(set(best[:5])) == len(set(best[6:])) == 1 and best[0] != best[6]

    def test_round_trip(self, rng):
        model, _ = egmm_fit(rng.normal(size=(40, 2)), EgmmConfig(C=2, restarts=1))
        back = EgmmModel.from_dict(model.to_dict())
        np.testing.assert_array_equal(back.means, model.means)
        assert back.structure == model.structure


class TestConfig:
    def test_default_kappa(self):
        assert [default_kappa(C) for C in (2, 3, 4, 6)] == [2, 3, 2, 2]

    @pytest.mark.parametrize(
        "kw", [dict(C=1), dict(C=10), dict(C=3, kappa=4), dict(C=2, tol=0), dict(C=2, restarts=0)]
    )
    def test_invalid(self, kw):
        with pytest.raises(ParameterError):
            EgmmConfig(**kw).validate(10)

    def test_non_finite_data(self):
        X = np.ones((5, 2))
        X[0, 0] = np.nan
        with pytest.raises(ParameterError):
            egmm_fit(X, EgmmConfig(C=2))
