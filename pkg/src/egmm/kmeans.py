"""Hard c-means (Lloyd) clustering, used as a baseline and as EM initializer."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._em import seed_sequence
from .errors import DataError, ParameterError
from .mvn import DEFAULT_RIDGE, regularize_spd

MAX_LLOYD_ITER = 300


@dataclass(frozen=True)
class KmeansResult:
    """Best Lloyd run.

    ``assignment`` holds 1-based cluster indices. Centers are sorted by
    ascending first coordinate (ties by the next ones) so that cluster
    numbering does not depend on the random initialization.
    """

    centers: np.ndarray
    assignment: np.ndarray
    inertia: float
    pooled_covariance: np.ndarray
    n_iter: int

    @property
    def C(self) -> int:
        return self.centers.shape[0]


def _sq_dists(X: np.ndarray, centers: np.ndarray) -> np.ndarray:
    diff = X[:, None, :] - centers[None, :, :]
    return np.einsum("nkd,nkd->nk", diff, diff)


def lloyd(X: np.ndarray, centers: np.ndarray, max_iter: int = MAX_LLOYD_ITER):
    """Run Lloyd iterations from ``centers``.

    Returns ``(centers, labels, inertia_trace)`` with 0-based labels. The
    trace holds the inertia after every center update; it is non-increasing.
    """
    centers = np.array(centers, dtype=np.float64)
    N, C = X.shape[0], centers.shape[0]
    rows = np.arange(N)
    labels = None
    trace = []
    for _ in range(max_iter):
        d2 = _sq_dists(X, centers)
        new_labels = d2.argmin(axis=1)
        point_d2 = d2[rows, new_labels]
        counts = np.bincount(new_labels, minlength=C)
        while np.any(counts == 0):
            k = int(np.flatnonzero(counts == 0)[0])
            # reseed to the point farthest from its own center
            movable = counts[new_labels] > 1
            far = int(np.where(movable, point_d2, -1.0).argmax())
            new_labels[far] = k
            point_d2[far] = 0.0
            counts = np.bincount(new_labels, minlength=C)
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for k in range(C):
            centers[k] = X[labels == k].mean(axis=0)
        trace.append(float(_sq_dists(X, centers)[rows, labels].sum()))
    return centers, labels, trace


def _pooled_covariance(X, centers, labels):
    resid = X - centers[labels]
    return resid.T @ resid / X.shape[0]


def kmeans_fit(
    X: np.ndarray,
    C: int,
    restarts: int = 10,
    seed: int | None = 0,
    max_iter: int = MAX_LLOYD_ITER,
) -> KmeansResult:
    """Best-inertia Lloyd clustering over several seeded restarts.

    Each restart draws C distinct data points uniformly at random as
    initial centers, using a child of ``np.random.SeedSequence(seed)``.
    Equal inertias keep the earliest restart.

    Raises
    ------
    ParameterError
        If ``C`` is not in ``(1, N)`` or ``restarts < 1``.
    DataError
        If X has fewer than C distinct rows.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    N = X.shape[0]
    if not 1 < C < N:
        raise ParameterError(f"need 1 < C < N, got C={C}, N={N}")
    if restarts < 1:
        raise ParameterError(f"restarts must be >= 1, got {restarts}")
    distinct = np.unique(X, axis=0)
    if distinct.shape[0] < C:
        raise DataError(f"only {distinct.shape[0]} distinct points for C={C} clusters")

    best = None
    for child in seed_sequence(seed).spawn(restarts):
        rng = np.random.default_rng(child)
        init = distinct[rng.choice(distinct.shape[0], size=C, replace=False)]
        centers, labels, trace = lloyd(X, init, max_iter)
        if best is None or trace[-1] < best[2][-1]:
            best = (centers, labels, trace)

    centers, labels, trace = best
    order = np.lexsort(centers.T[::-1])
    rank = np.empty(C, dtype=int)
    rank[order] = np.arange(C)
    centers = centers[order]
    labels = rank[labels]
    return KmeansResult(
        centers=centers,
        assignment=labels + 1,
        inertia=trace[-1],
        pooled_covariance=_pooled_covariance(X, centers, labels),
        n_iter=len(trace),
    )


def init_from_kmeans(r: KmeansResult, M: int, ridge: float = DEFAULT_RIDGE):
    """EM seeds ``(weights, means, covariance)`` from a c-means result.

    Weights are uniform over the M components, means are the c-means
    centers and the covariance is the pooled within-cluster scatter,
    ridged if it is singular.
    """
    if M < 1:
        raise ParameterError(f"M must be positive, got {M}")
    weights = np.full(M, 1.0 / M)
    return weights, r.centers.copy(), regularize_spd(r.pooled_covariance, ridge)
