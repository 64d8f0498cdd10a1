"""External clustering criteria: purity, NMI and the pair-counting ARI."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError


@dataclass(frozen=True)
class ContingencyTable:
    """``counts[k, j] = |cluster k & class j|`` with the label values on each axis."""

    counts: np.ndarray
    clusters: np.ndarray
    classes: np.ndarray

    @property
    def N(self) -> int:
        return int(self.counts.sum())

    @property
    def cluster_sizes(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def class_sizes(self) -> np.ndarray:
        return self.counts.sum(axis=0)


def contingency(pred, truth) -> ContingencyTable:
    pred = np.asarray(pred).ravel()
    truth = np.asarray(truth).ravel()
    if pred.size != truth.size:
        raise ParameterError(f"length mismatch: {pred.size} predictions, {truth.size} labels")
    if pred.size == 0:
        raise ParameterError("empty label vectors")
    clusters, ci = np.unique(pred, return_inverse=True)
    classes, qi = np.unique(truth, return_inverse=True)
    counts = np.zeros((clusters.size, classes.size), dtype=np.int64)
    np.add.at(counts, (ci, qi), 1)
    return ContingencyTable(counts, clusters, classes)


def purity(pred, truth) -> float:
    """Fraction of objects whose cluster's majority class is their own class."""
    t = contingency(pred, truth)
    return float(t.counts.max(axis=1).sum() / t.N)


def _entropy(sizes: np.ndarray, n: int) -> float:
    p = sizes[sizes > 0] / n
    return float(-(p * np.log(p)).sum())


def mutual_information(t: ContingencyTable) -> float:
    n = t.N
    nz = t.counts > 0
    joint = t.counts[nz] / n
    outer = np.outer(t.cluster_sizes, t.class_sizes)[nz] / n**2
    return float((joint * np.log(joint / outer)).sum())


def nmi(pred, truth) -> float:
    """Mutual information over the arithmetic mean of the two entropies.

    Two single-group partitions (both entropies zero) score 1.
    """
    t = contingency(pred, truth)
    h = _entropy(t.cluster_sizes, t.N) + _entropy(t.class_sizes, t.N)
    if h == 0.0:
        return 1.0
    return float(min(max(mutual_information(t) / (h / 2.0), 0.0), 1.0))


@dataclass(frozen=True)
class PairCounts:
    """Object pairs classified by (same cluster?, same class?)."""

    tp: int
    tn: int
    fp: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn


def _pairs(n):
    return n * (n - 1) // 2


def pair_counts(pred, truth) -> PairCounts:
    t = contingency(pred, truth)
    tp = int(_pairs(t.counts).sum())
    same_cluster = int(_pairs(t.cluster_sizes).sum())
    same_class = int(_pairs(t.class_sizes).sum())
    fp = same_cluster - tp
    fn = same_class - tp
    tn = _pairs(t.N) - tp - fp - fn
    return PairCounts(tp, tn, fp, fn)


def ari(pred, truth) -> float:
    """Pair-counting index ``2(TP*TN - FP*FN) / ((TN+FP)(FP+TP) + (TN+FN)(FN+TP))``.

    Returns 1 when the denominator vanishes, which only happens when both
    partitions are identical up to relabeling (all one group, or all singletons).
    """
    pred = np.asarray(pred).ravel()
    if pred.size < 2:
        raise ParameterError("ARI needs at least two objects")
    c = pair_counts(pred, truth)
    num = 2 * (c.tp * c.tn - c.fp * c.fn)
    den = (c.tn + c.fp) * (c.fp + c.tp) + (c.tn + c.fn) * (c.fn + c.tp)
    if den == 0:
        return 1.0
    return float(num / den)


def evaluate(pred, truth) -> dict[str, float]:
    return {"purity": purity(pred, truth), "nmi": nmi(pred, truth), "ari": ari(pred, truth)}
