"""Small numerical pieces shared by the GMM and EGMM EM loops."""

import numpy as np

from .errors import NumericError

WEIGHT_FLOOR = 1e-10


def log_weights(weights: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(weights)


def row_sums(a: np.ndarray) -> np.ndarray:
    # matrix-vector products beat ufunc reductions along short rows
    return a @ np.ones(a.shape[1])


def col_sums(a: np.ndarray) -> np.ndarray:
    return np.ones(a.shape[0]) @ a


def normalize_log(log_joint: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Row-normalize ``exp(log_joint)`` in the log domain.

    Returns ``(posterior, row_log_norm)``.
    """
    top = np.ascontiguousarray(log_joint.T).max(axis=0)
    if not np.isfinite(top.sum()):
        bad = np.flatnonzero(~np.isfinite(top))
        raise NumericError(
            f"all component densities vanish for {bad.size} object(s), first index {bad[0]}"
        )
    post = np.exp(log_joint - top[:, None])
    total = row_sums(post)
    post /= total[:, None]
    return post, top + np.log(total)


def floor_weights(weights: np.ndarray, floor: float = WEIGHT_FLOOR) -> np.ndarray:
    if np.any(weights < floor):
        weights = np.maximum(weights, floor)
        weights = weights / weights.sum()
    return weights


def weighted_scatter(X: np.ndarray, resp: np.ndarray, means: np.ndarray) -> np.ndarray:
    """``sum_i sum_j resp[i, j] (x_i - means_j)(x_i - means_j)^T``, shape (D, D)."""
    center = means.mean(axis=0)
    Xc = X - center
    mc = means - center
    r = row_sums(resp)
    cross = Xc.T @ (resp @ mc)
    S = (Xc * r[:, None]).T @ Xc - cross - cross.T + (mc * col_sums(resp)[:, None]).T @ mc
    return 0.5 * (S + S.T)


def is_monotone(trace, rtol: float = 1e-8) -> bool:
    t = np.asarray(trace, dtype=float)
    return bool(np.all(t[1:] >= t[:-1] - rtol * (1.0 + np.abs(t[:-1]))))


def seed_sequence(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)
