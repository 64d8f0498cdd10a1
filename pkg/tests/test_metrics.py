"""Clustering criteria against brute-force oracles."""

import itertools
from collections import Counter

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from egmm.errors import ParameterError
from egmm.metrics import ari, evaluate, nmi, pair_counts, purity


def oracle_purity(pred, truth):
    hits = 0
    for k in set(pred):
        hits += max(Counter(t for p, t in zip(pred, truth) if p == k).values())
    return hits / len(pred)


def oracle_nmi(pred, truth):
    n = len(pred)
    cp, ct, joint = Counter(pred), Counter(truth), Counter(zip(pred, truth))
    I = sum(c / n * np.log(c * n / (cp[a] * ct[b])) for (a, b), c in joint.items())
    H = -sum(c / n * np.log(c / n) for c in cp.values()) - sum(
        c / n * np.log(c / n) for c in ct.values()
    )
    return 1.0 if H == 0 else I / (H / 2)


def oracle_pairs(pred, truth):
    tp = tn = fp = fn = 0
    for i, j in itertools.combinations(range(len(pred)), 2):
        same_p, same_t = pred[i] == pred[j], truth[i] == truth[j]
        tp += same_p and same_t
        fp += same_p and not same_t
        fn += same_t and not same_p
        tn += not (same_p or same_t)
    return tp, tn, fp, fn


def oracle_ari(pred, truth):
    tp, tn, fp, fn = oracle_pairs(pred, truth)
    den = (tn + fp) * (fp + tp) + (tn + fn) * (fn + tp)
    return 1.0 if den == 0 else 2 * (tp * tn - fp * fn) / den


class TestExamples:
    def test_identity(self):
        y = [1, 1, 2, 3, 3]
        assert evaluate(y, y) == {"purity": 1.0, "nmi": 1.0, "ari": 1.0}

    def test_purity(self):
        assert purity([1] * 6, [1, 1, 2, 2, 3, 3]) == pytest.approx(1 / 3)
        assert purity([1, 1, 2, 2, 2], list("aaabb")) == pytest.approx(0.8)

    def test_nmi_independent(self):
        assert nmi([1, 1, 2, 2], list("abab")) == pytest.approx(0.0, abs=1e-12)

    def test_ari_crossed_pairs(self):
        # pairs (0,2),(1,3) share a cluster, (0,1),(2,3) share a class, (0,3),(1,2) share neither
        c = pair_counts([1, 2, 1, 2], list("aabb"))
        assert (c.tp, c.tn, c.fp, c.fn) == (0, 2, 2, 2)
        assert ari([1, 2, 1, 2], list("aabb")) == pytest.approx(-0.5)

    def test_errors(self):
        with pytest.raises(ParameterError):
            purity([1, 2], [1])
        with pytest.raises(ParameterError):
            nmi([], [])


def test_random_against_oracles(rng):
    for _ in range(200):
        n = int(rng.integers(2, 11))
        pred = rng.integers(1, 4, n).tolist()
        truth = rng.integers(1, 4, n).tolist()
        assert purity(pred, truth) == oracle_purity(pred, truth)
        assert ari(pred, truth) == oracle_ari(pred, truth)
        c = pair_counts(pred, truth)
        assert (c.tp, c.tn, c.fp, c.fn) == oracle_pairs(pred, truth)
        assert nmi(pred, truth) == pytest.approx(oracle_nmi(pred, truth), abs=1e-12)


@given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3)), min_size=2, max_size=30))
def test_bounds_and_symmetry(pairs):
    pred, truth = map(list, zip(*pairs))
    assert 0 <= nmi(pred, truth) <= 1
    assert nmi(pred, truth) == pytest.approx(nmi(truth, pred), abs=1e-12)
    assert ari(pred, truth) == pytest.approx(ari(truth, pred), abs=1e-12)
    assert ari(pred, truth) <= 1


def test_relabel_invariance(rng):
    pred, truth = rng.integers(0, 4, 50), rng.integers(0, 3, 50)
    perm = np.array([7, 3, 9, 1])[pred]
    a, b = evaluate(pred, truth), evaluate(perm, truth)
    assert a["purity"] == b["purity"] and a["ari"] == b["ari"]
    assert a["nmi"] == pytest.approx(b["nmi"], abs=1e-14)


def test_sklearn_agreement(rng):
    sk = pytest.importorskip("sklearn.metrics")
    for _ in range(50):
        pred, truth = rng.integers(0, 4, 40), rng.integers(0, 3, 40)
        assert ari(pred, truth) == pytest.approx(sk.adjusted_rand_score(truth, pred), abs=1e-12)
        assert nmi(pred, truth) == pytest.approx(
            sk.normalized_mutual_info_score(truth, pred, average_method="arithmetic"), abs=1e-12
        )
