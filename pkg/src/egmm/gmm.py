"""Classical Gaussian mixture baselines fitted by EM.

Two covariance models are supported: ``"free"`` (one covariance per
component, plain GMM) and ``"shared"`` (a single covariance common to all
components, often called CGMM).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._em import (
    floor_weights,
    log_weights,
    normalize_log,
    seed_sequence,
    weighted_scatter,
)
from .errors import NumericError, ParameterError
from .kmeans import kmeans_fit
from .mvn import DEFAULT_RIDGE, cholesky, log_density_chol, regularize_spd

MODES = ("free", "shared")


@dataclass(frozen=True)
class GmmModel:
    """Fitted GMM parameters.

    ``covariances`` has shape (C, D, D) in free mode and (D, D) in shared mode.
    ``loglik_trace[0]`` is the log-likelihood at the initial parameters.
    """

    weights: np.ndarray
    means: np.ndarray
    covariances: np.ndarray
    mode: str = "free"
    loglik_trace: np.ndarray = field(default_factory=lambda: np.empty(0))
    converged: bool = False
    iterations: int = 0

    @property
    def C(self) -> int:
        return self.means.shape[0]

    @property
    def D(self) -> int:
        return self.means.shape[1]

    @property
    def loglik(self) -> float:
        return float(self.loglik_trace[-1])

    def component_covariances(self) -> np.ndarray:
        if self.mode == "shared":
            return np.broadcast_to(self.covariances, (self.C, self.D, self.D))
        return self.covariances

    def to_dict(self) -> dict:
        return {
            "algorithm": "cgmm" if self.mode == "shared" else "gmm",
            "mode": self.mode,
            "C": self.C,
            "D": self.D,
            "weights": self.weights.tolist(),
            "means": self.means.tolist(),
            "covariances": self.covariances.tolist(),
            "loglik_trace": np.asarray(self.loglik_trace).tolist(),
            "converged": bool(self.converged),
            "iterations": int(self.iterations),
        }

    @classmethod
    def from_dict(cls, d: dict) -> GmmModel:
        return cls(
            weights=np.asarray(d["weights"], dtype=float),
            means=np.asarray(d["means"], dtype=float),
            covariances=np.asarray(d["covariances"], dtype=float),
            mode=d["mode"],
            loglik_trace=np.asarray(d.get("loglik_trace", []), dtype=float),
            converged=bool(d.get("converged", False)),
            iterations=int(d.get("iterations", 0)),
        )


def _log_joint(X, weights, means, covariances, mode):
    if mode == "shared":
        dens = log_density_chol(X, means, cholesky(covariances))
    else:
        dens = np.column_stack(
            [
                log_density_chol(X, means[k : k + 1], cholesky(covariances[k]))[:, 0]
                for k in range(means.shape[0])
            ]
        )
    return dens + log_weights(weights)


def gmm_responsibilities(X: np.ndarray, model: GmmModel) -> np.ndarray:
    """Posterior component probabilities, shape (N, C); rows sum to one."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    post, _ = normalize_log(
        _log_joint(X, model.weights, model.means, model.covariances, model.mode)
    )
    return post


def gmm_loglik(X: np.ndarray, model: GmmModel) -> float:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    _, norm = normalize_log(
        _log_joint(X, model.weights, model.means, model.covariances, model.mode)
    )
    return float(norm.sum())


def gmm_m_step(X, resp, mode, ridge=DEFAULT_RIDGE):
    """Closed-form M-step from a responsibility matrix.

    Covariances are computed about the updated means.
    """
    N = X.shape[0]
    nk = resp.sum(axis=0)
    if np.any(nk <= 0):
        starving = (np.flatnonzero(nk <= 0) + 1).tolist()
        raise NumericError(f"clusters {starving} received no responsibility")
    weights = floor_weights(nk / N)
    means = (resp.T @ X) / nk[:, None]
    if mode == "shared":
        cov = regularize_spd(weighted_scatter(X, resp, means) / N, ridge)
    else:
        cov = np.stack(
            [
                regularize_spd(weighted_scatter(X, resp[:, k : k + 1], means[k : k + 1]) / nk[k], ridge)
                for k in range(means.shape[0])
            ]
        )
    return weights, means, cov


def gmm_em(
    X,
    weights,
    means,
    covariances,
    mode="free",
    tol=1e-6,
    max_iter=500,
    ridge=DEFAULT_RIDGE,
    callback=None,
) -> GmmModel:
    """Run EM from explicit initial parameters.

    ``callback(iteration, weights, means, covariances)`` is invoked after
    every M-step when given.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if mode not in MODES:
        raise ParameterError(f"mode must be one of {MODES}, got {mode!r}")
    weights = np.asarray(weights, dtype=float)
    means = np.asarray(means, dtype=float)
    covariances = np.asarray(covariances, dtype=float)
    resp, norm = normalize_log(_log_joint(X, weights, means, covariances, mode))
    trace = [float(norm.sum())]
    converged = False
    it = 0
    while it < max_iter:
        weights, means, covariances = gmm_m_step(X, resp, mode, ridge)
        it += 1
        resp, norm = normalize_log(_log_joint(X, weights, means, covariances, mode))
        trace.append(float(norm.sum()))
        if callback is not None:
            callback(it, weights, means, covariances)
        if trace[-1] - trace[-2] < tol:
            converged = True
            break
    return GmmModel(weights, means, covariances, mode, np.array(trace), converged, it)


def _initial_params(X, C, mode, seed, ridge):
    N = X.shape[0]
    if C == 1:
        centers = X.mean(axis=0, keepdims=True)
        pooled = (X - centers).T @ (X - centers) / N
        labels = np.zeros(N, dtype=int)
    else:
        km = kmeans_fit(X, C, restarts=1, seed=seed)
        centers = km.centers
        pooled = km.pooled_covariance
        labels = km.assignment - 1
    weights = np.full(C, 1.0 / C)
    if mode == "shared":
        return weights, centers, regularize_spd(pooled, ridge)
    covs = []
    for k in range(C):
        members = X[labels == k] - centers[k]
        if members.shape[0] > X.shape[1]:
            covs.append(regularize_spd(members.T @ members / members.shape[0], ridge))
        else:
            covs.append(regularize_spd(pooled, ridge))
    return weights, centers, np.stack(covs)


def gmm_fit(
    X: np.ndarray,
    C: int,
    mode: str = "free",
    tol: float = 1e-6,
    max_iter: int = 500,
    seed: int | None = 0,
    restarts: int = 10,
    ridge: float = DEFAULT_RIDGE,
) -> GmmModel:
    """Fit a GMM by EM from c-means seeds; keep the best of ``restarts`` runs.

    Each restart seeds one Lloyd run from a child of
    ``np.random.SeedSequence(seed)``. In free mode each component starts
    from the scatter of its c-means cluster (pooled scatter if the cluster
    is too small); in shared mode from the pooled scatter.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    N = X.shape[0]
    if mode not in MODES:
        raise ParameterError(f"mode must be one of {MODES}, got {mode!r}")
    if not 1 <= C < N:
        raise ParameterError(f"need 1 <= C < N, got C={C}, N={N}")
    if restarts < 1 or max_iter < 1 or tol <= 0:
        raise ParameterError("restarts and max_iter must be >= 1 and tol > 0")
    best = None
    children = seed_sequence(seed).spawn(1 if C == 1 else restarts)
    errors = []
    for child in children:
        try:
            init = _initial_params(X, C, mode, child, ridge)
            model = gmm_em(X, *init, mode=mode, tol=tol, max_iter=max_iter, ridge=ridge)
        except NumericError as exc:
            errors.append(exc)
            continue
        if best is None or model.loglik > best.loglik:
            best = model
    if best is None:
        raise errors[-1]
    return best


def n_parameters(C: int, D: int, mode: str = "free") -> int:
    """Free parameter count: weights, means and covariance entries."""
    cov = D * (D + 1) // 2
    return (C - 1) + C * D + (C * cov if mode == "free" else cov)


def gmm_bic(model: GmmModel, N: int) -> float:
    """``BIC = logL - v/2 * log N`` (larger is better)."""
    v = n_parameters(model.C, model.D, model.mode)
    return model.loglik - 0.5 * v * np.log(N)
