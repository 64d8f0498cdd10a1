"""Multivariate normal log-densities through Cholesky factors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import NumericError, ParameterError

LOG_2PI = np.log(2.0 * np.pi)
DEFAULT_RIDGE = 1e-6
SYMMETRY_TOL = 1e-10


@dataclass(frozen=True)
class GaussianParam:
    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=np.float64))
        cov = np.atleast_2d(np.asarray(self.covariance, dtype=np.float64))
        if mean.ndim != 1 or cov.shape != (mean.size, mean.size):
            raise ParameterError(
                f"mean of shape {mean.shape} does not match covariance {cov.shape}"
            )
        if not np.allclose(cov, cov.T, rtol=0.0, atol=SYMMETRY_TOL):
            raise ParameterError("covariance is not symmetric")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)


def _try_cholesky(a: np.ndarray):
    try:
        L = np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        return None
    if not np.diag(L).min() > 0:
        return None
    return L


def regularize_spd_factor(
    cov: np.ndarray, ridge: float = DEFAULT_RIDGE, scale: float | None = None
):
    """Like :func:`regularize_spd`, also returning the lower Cholesky factor.

    ``scale`` replaces ``tr(cov) / D`` as the unit of the ridge when given.
    """
    cov = np.atleast_2d(np.asarray(cov, dtype=np.float64))
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise ParameterError(f"covariance must be square, got shape {cov.shape}")
    if not np.all(np.isfinite(cov)):
        raise NumericError("covariance contains non-finite entries")
    L = _try_cholesky(cov)
    if L is not None:
        return cov, L
    D = cov.shape[0]
    if scale is None:
        scale = np.trace(cov) / D
    eye = np.eye(D)
    for step in range(4):
        lam = ridge * 10.0**step * scale
        if lam > 0:
            candidate = cov + lam * eye
            L = _try_cholesky(candidate)
            if L is not None:
                return candidate, L
    raise NumericError(
        f"covariance is not positive definite even after ridge escalation "
        f"(trace={np.trace(cov):.3g})"
    )


def regularize_spd(cov: np.ndarray, ridge: float = DEFAULT_RIDGE) -> np.ndarray:
    """Return ``cov`` unchanged if it is positive definite, else a ridged copy.

    The ridge added is ``ridge * tr(cov) / D`` times the identity, escalated
    tenfold up to three times until the Cholesky factorization succeeds.

    Raises
    ------
    NumericError
        If no escalation yields a factorizable matrix (e.g. a zero matrix).
    """
    return regularize_spd_factor(cov, ridge)[0]


def cholesky(cov: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor, raising :class:`NumericError` on failure."""
    L = _try_cholesky(np.asarray(cov, dtype=np.float64))
    if L is None:
        raise NumericError("covariance is not positive definite")
    return L


def log_density_chol(
    X: np.ndarray,
    means: np.ndarray,
    L: np.ndarray,
    center: np.ndarray | None = None,
    offset: np.ndarray | None = None,
) -> np.ndarray:
    """Log-densities of every row of X under Gaussians sharing a Cholesky factor.

    Parameters
    ----------
    X : ndarray, shape (N, D)
    means : ndarray, shape (K, D)
    L : ndarray, shape (D, D)
        Lower Cholesky factor of the common covariance.
    center : ndarray, shape (D,), optional
        Origin for the distance expansion; defaults to the average mean.
        Any point near the data works, so EM loops pass the data mean once.
    offset : ndarray, shape (K,), optional
        Added to column k, e.g. log mixing weights.

    Returns
    -------
    ndarray, shape (N, K)
    """
    D = X.shape[1]
    # whiten once, then expand the squared distances; centring on the means
    # keeps the expansion free of large cancellations
    if center is None:
        center = means.mean(axis=0)
    N, K = X.shape[0], means.shape[0]
    Linv_t = solve_triangular(L, np.eye(D), lower=True, check_finite=False).T
    xw = (X - center) @ Linv_t
    mw = (means - center) @ Linv_t
    const = -0.5 * D * LOG_2PI - np.log(np.diag(L)).sum()
    # one product yields |x|^2 - 2 x.m + |m|^2 for all pairs, already scaled
    A = np.empty((N, D + 2))
    A[:, :D] = xw
    A[:, D] = (xw * xw) @ np.ones(D)
    A[:, D + 1] = 1.0
    B = np.empty((D + 2, K))
    B[:D] = mw.T
    B[D] = -0.5
    B[D + 1] = const - 0.5 * ((mw * mw) @ np.ones(D))
    top = np.full(K, const)
    if offset is not None:
        B[D + 1] += offset
        top += offset
    out = A @ B
    # rounding can push the squared distance below zero
    return np.minimum(out, top, out=out)


def log_density_shared(X: np.ndarray, means: np.ndarray, cov: np.ndarray) -> np.ndarray:
    """(N, K) log-densities for K means sharing one covariance matrix."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    means = np.atleast_2d(np.asarray(means, dtype=np.float64))
    if X.shape[1] != means.shape[1] or np.shape(cov) != (X.shape[1], X.shape[1]):
        raise ParameterError("dimension mismatch between data, means and covariance")
    return log_density_chol(X, means, cholesky(cov))


def log_density(x, p: GaussianParam) -> float | np.ndarray:
    """Log of the normal density ``N(x | p.mean, p.covariance)``.

    ``x`` may be a single D-vector (returns a float) or an (N, D) array
    (returns an (N,) array). The covariance is factorized, never inverted.
    """
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    X = np.atleast_2d(x)
    if X.shape[1] != p.mean.size:
        raise ParameterError(
            f"point dimension {X.shape[1]} differs from mean dimension {p.mean.size}"
        )
    L = cholesky(regularize_spd(p.covariance))
    out = log_density_chol(X, p.mean[None, :], L)[:, 0]
    return float(out[0]) if single else out
