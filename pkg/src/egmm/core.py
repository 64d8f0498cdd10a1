"""Evidential Gaussian mixture model fitted by constrained EM.

Every non-empty subset ``A_j`` of the cluster frame (up to the cardinality
cap) gets a Gaussian component whose mean is the average of the means of
the clusters it contains, and all components share one covariance matrix.
The posterior component probabilities of an object form its mass function.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ._em import (
    col_sums,
    floor_weights,
    log_weights,
    normalize_log,
    seed_sequence,
    weighted_scatter,
)
from .belief import FocalStructure, enumerate_focal_sets
from .errors import NumericError, ParameterError
from .kmeans import init_from_kmeans, kmeans_fit
from .mvn import (
    DEFAULT_RIDGE,
    _try_cholesky,
    cholesky,
    log_density_chol,
    regularize_spd,
    regularize_spd_factor,
)
from .partition import EvidentialPartition

H_RIDGE = 1e-10
SOLVE_RTOL = 1e-8


def default_kappa(C: int) -> int:
    """Pairs-only cap for more than three clusters, full powerset otherwise."""
    return 2 if C > 3 else C


@dataclass(frozen=True)
class EgmmConfig:
    C: int
    kappa: int | None = None
    tol: float = 1e-6
    max_iter: int = 500
    restarts: int = 10
    seed: int | None = 0
    ridge: float = DEFAULT_RIDGE

    @property
    def resolved_kappa(self) -> int:
        return default_kappa(self.C) if self.kappa is None else self.kappa

    def validate(self, N: int) -> None:
        if not 1 < self.C < N:
            raise ParameterError(f"need 1 < C < N, got C={self.C}, N={N}")
        if not 1 <= self.resolved_kappa <= self.C:
            raise ParameterError(f"kappa must lie in [1, C], got {self.kappa}")
        if not self.tol > 0:
            raise ParameterError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1 or self.restarts < 1:
            raise ParameterError("max_iter and restarts must be >= 1")
        if self.ridge < 0:
            raise ParameterError(f"ridge must be nonnegative, got {self.ridge}")


@dataclass(frozen=True)
class EgmmModel:
    """Fitted parameters: component weights, cluster means, shared covariance.

    ``loglik_trace[0]`` is the observed-data log-likelihood at the initial
    parameters and ``loglik_trace[s]`` the value after EM cycle ``s``.
    """

    structure: FocalStructure
    weights: np.ndarray
    means: np.ndarray
    covariance: np.ndarray
    loglik_trace: np.ndarray = field(default_factory=lambda: np.empty(0))
    iterations: int = 0
    converged: bool = False

    @property
    def C(self) -> int:
        return self.structure.C

    @property
    def D(self) -> int:
        return self.means.shape[1]

    @property
    def M(self) -> int:
        return self.structure.M

    @property
    def loglik(self) -> float:
        return float(self.loglik_trace[-1])

    @cached_property
    def component_means(self) -> np.ndarray:
        return component_means(self.means, self.structure)

    def to_dict(self) -> dict:
        s = self.structure
        return {
            "algorithm": "egmm",
            "C": s.C,
            "kappa": s.kappa,
            "D": self.D,
            "focal_sets": [list(s.members(j)) for j in range(s.M)],
            "weights": self.weights.tolist(),
            "means": self.means.tolist(),
            "covariance": self.covariance.tolist(),
            "loglik_trace": np.asarray(self.loglik_trace).tolist(),
            "iterations": int(self.iterations),
            "converged": bool(self.converged),
        }

    @classmethod
    def from_dict(cls, d: dict) -> EgmmModel:
        return cls(
            structure=enumerate_focal_sets(int(d["C"]), int(d["kappa"])),
            weights=np.asarray(d["weights"], dtype=float),
            means=np.asarray(d["means"], dtype=float),
            covariance=np.asarray(d["covariance"], dtype=float),
            loglik_trace=np.asarray(d.get("loglik_trace", []), dtype=float),
            iterations=int(d.get("iterations", 0)),
            converged=bool(d.get("converged", False)),
        )


def component_means(means: np.ndarray, structure: FocalStructure) -> np.ndarray:
    """Mean of each focal set: the average of its member cluster means, (M, D)."""
    means = np.atleast_2d(np.asarray(means, dtype=np.float64))
    if means.shape[0] != structure.C:
        raise ParameterError(f"expected {structure.C} cluster means, got {means.shape[0]}")
    share = structure.indicator / structure.cardinality
    return share.T @ means


def _log_joint(X, weights, comp_means, L, center=None):
    return log_density_chol(X, comp_means, L, center, offset=log_weights(weights))


def _check_X(X, D=None):
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if not np.all(np.isfinite(X)):
        raise ParameterError("data contain non-finite values")
    if D is not None and X.shape[1] != D:
        raise ParameterError(f"data have {X.shape[1]} features, model expects {D}")
    return X


def egmm_loglik(X: np.ndarray, model: EgmmModel) -> float:
    """Observed-data log-likelihood, summed over objects with log-sum-exp."""
    X = _check_X(X, model.D)
    L = cholesky(model.covariance)
    _, norm = normalize_log(_log_joint(X, model.weights, model.component_means, L))
    return float(norm.sum())


def e_step(X: np.ndarray, model: EgmmModel) -> np.ndarray:
    """Evidential memberships ``m_ij``: posterior of component j for object i."""
    X = _check_X(X, model.D)
    L = cholesky(model.covariance)
    post, _ = normalize_log(_log_joint(X, model.weights, model.component_means, L))
    return post


def m_step_mixing(m: np.ndarray) -> np.ndarray:
    """Component weights as the column means of the membership matrix."""
    m = np.atleast_2d(np.asarray(m, dtype=np.float64))
    return col_sums(m) / m.shape[0]


def mean_system(X: np.ndarray, m: np.ndarray, structure: FocalStructure):
    """Normal equations ``H @ means = B`` of the constrained mean update.

    ``H[k, l] = sum_ij m_ij I_kj I_lj / |A_j|^2`` and
    ``B[k] = sum_ij m_ij I_kj x_i / |A_j|``.
    """
    I = structure.indicator
    card = structure.cardinality
    w = col_sums(m)
    H = (I * (w / card**2)) @ I.T
    B = (I / card) @ (m.T @ X)
    return 0.5 * (H + H.T), B


def m_step_means(X: np.ndarray, m: np.ndarray, structure: FocalStructure) -> np.ndarray:
    """Cluster means maximizing the Q-function for fixed memberships, (C, D).

    Raises
    ------
    NumericError
        If H is singular at the scale ``1e-10 * tr(H) / C``, which happens
        when some cluster receives almost no mass through any focal set
        that could pin down its mean.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    H, B = mean_system(X, np.asarray(m, dtype=np.float64), structure)
    return _solve_means(H, B)


def _solve_means(H, B):
    C = H.shape[0]
    floor = H_RIDGE * np.trace(H) / C
    try:
        # succeeds exactly when the smallest eigenvalue exceeds the floor
        np.linalg.cholesky(H - floor * np.eye(C))
    except np.linalg.LinAlgError:
        evals, evecs = np.linalg.eigh(H)
        weak = evecs[:, evals <= max(floor, evals[0])]
        starving = (np.flatnonzero(np.abs(weak).max(axis=1) >= 0.1) + 1).tolist()
        raise NumericError(
            f"mean system is singular (min eigenvalue {evals[0]:.3g}); "
            f"clusters {starving} are not identifiable from the current memberships"
        )
    means = np.linalg.solve(H, B)
    resid = np.linalg.norm(H @ means - B)
    if resid > SOLVE_RTOL * max(np.linalg.norm(B), np.finfo(float).tiny):
        raise NumericError(f"mean system solved with residual {resid:.3g}")
    return means


def m_step_covariance(
    X: np.ndarray, m: np.ndarray, comp_means: np.ndarray, ridge: float = DEFAULT_RIDGE
) -> np.ndarray:
    """Shared covariance: membership-weighted scatter about the component means."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    S = weighted_scatter(X, np.asarray(m, dtype=np.float64), comp_means) / X.shape[0]
    return _regularize(S, X, ridge)[0]


def _regularize(S, X, ridge):
    L = _try_cholesky(S)
    if L is not None:
        return S, L
    # a vanishing scatter borrows its ridge unit from the spread of the data
    D = S.shape[0]
    data_scale = X.var(axis=0).sum() / D
    scale = np.trace(S) / D
    if not scale > 1e-12 * data_scale:
        scale = data_scale
    return regularize_spd_factor(S, ridge, scale)


def q_function(X, m, weights, means, covariance, structure) -> float:
    """Expected complete-data log-likelihood for fixed memberships ``m``."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    mu = component_means(means, structure)
    log_joint = _log_joint(X, np.asarray(weights, dtype=float), mu, cholesky(covariance))
    with np.errstate(invalid="ignore"):
        terms = np.where(m > 0, m * log_joint, 0.0)
    return float(terms.sum())


def m_step(X, m, structure, ridge=DEFAULT_RIDGE):
    """Full M-step: ``(weights, means, covariance)`` from memberships."""
    weights, means, cov, _ = _m_step(X, m, structure, ridge)
    return weights, means, cov


def _m_step(X, m, structure, ridge):
    weights = floor_weights(m_step_mixing(m))
    means = m_step_means(X, m, structure)
    mu = component_means(means, structure)
    cov, L = _regularize(weighted_scatter(X, m, mu) / X.shape[0], X, ridge)
    return weights, means, cov, L


def _loop_m_step(Xc, gram, X, m, structure, ridge):
    """M-step inside the EM loop, on data centred once.

    Rows of ``m`` are posteriors summing to one, so the scatter about the
    component means splits into the fixed ``gram = Xc.T @ Xc`` and terms
    built from the (M, D) moments ``m.T @ Xc``. Means come back centred.
    """
    N = Xc.shape[0]
    I, card = structure.indicator, structure.cardinality
    w = col_sums(m)
    weights = floor_weights(w / N)
    H = (I * (w / card**2)) @ I.T
    moments = m.T @ Xc
    share = I / card
    means = _solve_means(0.5 * (H + H.T), share @ moments)
    mu = share.T @ means
    cross = moments.T @ mu
    S = gram - cross - cross.T + (mu * w[:, None]).T @ mu
    cov, L = _regularize(0.5 * (S + S.T) / N, X, ridge)
    return weights, means, cov, L


def egmm_em(
    X,
    structure: FocalStructure,
    weights,
    means,
    covariance,
    tol: float = 1e-6,
    max_iter: int = 500,
    ridge: float = DEFAULT_RIDGE,
    callback=None,
) -> EgmmModel:
    """Alternate E- and M-steps from explicit initial parameters.

    Stops when the log-likelihood gain of a cycle drops below ``tol`` or
    after ``max_iter`` cycles (``converged`` is False in that case).
    ``callback(iteration, weights, means, covariance)`` runs after every cycle.
    """
    X = _check_X(X)
    weights = np.asarray(weights, dtype=float)
    means = np.asarray(means, dtype=float)
    covariance = regularize_spd(np.asarray(covariance, dtype=float), ridge)
    if weights.shape != (structure.M,):
        raise ParameterError(f"expected {structure.M} weights, got {weights.shape}")
    if means.shape != (structure.C, X.shape[1]):
        raise ParameterError(f"means must have shape {(structure.C, X.shape[1])}")

    center = X.mean(axis=0)
    Xc = X - center
    gram = Xc.T @ Xc
    share_t = (structure.indicator / structure.cardinality).T
    zero = np.zeros(X.shape[1])
    m, norm = normalize_log(
        _log_joint(Xc, weights, share_t @ (means - center), cholesky(covariance), zero)
    )
    trace = [float(norm.sum())]
    converged = False
    it = 0
    while it < max_iter:
        weights, means_c, covariance, L = _loop_m_step(Xc, gram, X, m, structure, ridge)
        it += 1
        m, norm = normalize_log(_log_joint(Xc, weights, share_t @ means_c, L, zero))
        trace.append(float(norm.sum()))
        means = means_c + center
        if callback is not None:
            callback(it, weights, means, covariance)
        if trace[-1] - trace[-2] < tol:
            converged = True
            break
    return EgmmModel(structure, weights, means, covariance, np.array(trace), it, converged)


def egmm_fit(X: np.ndarray, cfg: EgmmConfig) -> tuple[EgmmModel, EvidentialPartition]:
    """Fit an EGMM, keeping the restart with the highest final log-likelihood.

    Restart ``r`` seeds one Lloyd run from the r-th child of
    ``np.random.SeedSequence(cfg.seed)``; the c-means centers and pooled
    scatter initialize the cluster means and covariance, and the component
    weights start uniform. Restarts that hit a numeric failure are skipped.

    Returns
    -------
    model : EgmmModel
    partition : EvidentialPartition
        Memberships computed with the final parameters.
    """
    X = _check_X(X)
    cfg.validate(X.shape[0])
    structure = enumerate_focal_sets(cfg.C, cfg.resolved_kappa)
    best = None
    failures = []
    for child in seed_sequence(cfg.seed).spawn(cfg.restarts):
        try:
            km = kmeans_fit(X, cfg.C, restarts=1, seed=child)
            init = init_from_kmeans(km, structure.M, cfg.ridge)
            model = egmm_em(X, structure, *init, tol=cfg.tol, max_iter=cfg.max_iter, ridge=cfg.ridge)
        except NumericError as exc:
            failures.append(exc)
            continue
        if best is None or model.loglik > best.loglik:
            best = model
    if best is None:
        raise NumericError(
            f"all {cfg.restarts} restarts failed; last error: {failures[-1]}"
        ) from failures[-1]
    return best, EvidentialPartition(structure, e_step(X, best))
