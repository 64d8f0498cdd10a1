"""Mass functions over a finite frame of clusters.

Subsets of the frame ``{w_1, ..., w_C}`` are encoded as integer bitmasks:
bit ``k - 1`` is set when cluster ``k`` (1-based) belongs to the subset.
Functions that take a subset accept either such a bitmask or an iterable
of 1-based cluster indices.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np

from .errors import ConflictError, ParameterError

MAX_CLUSTERS = 24
MASS_TOL = 1e-9
CONFLICT_TOL = 1e-12
CLAMP_TOL = 1e-15


def _popcount(masks: np.ndarray) -> np.ndarray:
    counts = np.zeros(masks.shape, dtype=np.int64)
    m = masks.copy()
    while np.any(m):
        counts += m & 1
        m >>= 1
    return counts


def as_mask(subset, C: int) -> int:
    """Convert ``subset`` (bitmask or iterable of 1-based indices) to a bitmask."""
    if isinstance(subset, (int, np.integer)):
        mask = int(subset)
    elif isinstance(subset, Iterable):
        mask = 0
        for k in subset:
            k = int(k)
            if not 1 <= k <= C:
                raise ParameterError(f"cluster index {k} outside 1..{C}")
            mask |= 1 << (k - 1)
    else:
        raise ParameterError(f"cannot interpret {subset!r} as a subset")
    if mask < 0 or mask >= 1 << C:
        raise ParameterError(f"subset mask {mask} outside the frame of size {C}")
    return mask


def mask_members(mask: int) -> tuple[int, ...]:
    """1-based cluster indices contained in ``mask``."""
    return tuple(k + 1 for k in range(mask.bit_length()) if mask >> k & 1)


def mask_label(mask: int) -> str:
    return "{" + ",".join(str(k) for k in mask_members(mask)) + "}"


@dataclass(frozen=True)
class FocalStructure:
    """Ordered list of the evidential components ``A_j`` for a frame of size C.

    The focal sets are every non-empty subset with at most ``kappa``
    clusters, in increasing bitmask order. ``kappa == C`` gives the full
    powerset (``2**C - 1`` sets). Build instances with
    :func:`enumerate_focal_sets`, which caches them.
    """

    C: int
    kappa: int
    sets: tuple[int, ...] = field(repr=False)

    @property
    def M(self) -> int:
        return len(self.sets)

    @property
    def is_full(self) -> bool:
        return self.kappa == self.C

    @cached_property
    def masks(self) -> np.ndarray:
        return np.asarray(self.sets, dtype=np.int64)

    @cached_property
    def cardinality(self) -> np.ndarray:
        """``|A_j|`` for every focal set, shape (M,)."""
        out = _popcount(self.masks)
        out.setflags(write=False)
        return out

    @cached_property
    def indicator(self) -> np.ndarray:
        """``I[k, j] = 1`` if cluster k belongs to ``A_j``; shape (C, M)."""
        bits = (self.masks[None, :] >> np.arange(self.C)[:, None]) & 1
        out = bits.astype(np.float64)
        out.setflags(write=False)
        return out

    @cached_property
    def _index(self) -> dict[int, int]:
        return {mask: j for j, mask in enumerate(self.sets)}

    @cached_property
    def singletons(self) -> np.ndarray:
        """Positions of ``{w_1}, ..., {w_C}`` in the focal-set list."""
        return np.array([self._index[1 << k] for k in range(self.C)])

    @property
    def omega(self) -> int:
        return (1 << self.C) - 1

    def index(self, subset) -> int:
        """Position ``j`` of ``subset`` in the focal-set list."""
        mask = as_mask(subset, self.C)
        try:
            return self._index[mask]
        except KeyError:
            raise ParameterError(
                f"subset {mask_label(mask)} is not a focal set (kappa={self.kappa})"
            ) from None

    def contains(self, subset) -> bool:
        return as_mask(subset, self.C) in self._index

    def members(self, j: int) -> tuple[int, ...]:
        return mask_members(self.sets[j])

    def label(self, j: int) -> str:
        return mask_label(self.sets[j])

    def labels(self) -> list[str]:
        return [mask_label(s) for s in self.sets]


@lru_cache(maxsize=128)
def enumerate_focal_sets(C: int, kappa: int | None = None) -> FocalStructure:
    """Enumerate the non-empty subsets of a C-cluster frame with size <= kappa.

    Parameters
    ----------
    C : int
        Number of singleton clusters, ``1 <= C <= 24``.
    kappa : int, optional
        Cardinality cap in ``[1, C]``; defaults to ``C`` (full powerset).

    Returns
    -------
    FocalStructure
        Subsets listed in increasing bitmask order.
    """
    if kappa is None:
        kappa = C
    if isinstance(C, bool) or not isinstance(C, (int, np.integer)):
        raise ParameterError(f"C must be an integer, got {C!r}")
    if not 1 <= C <= MAX_CLUSTERS:
        raise ParameterError(f"C must lie in [1, {MAX_CLUSTERS}], got {C}")
    if not 1 <= kappa <= C:
        raise ParameterError(f"kappa must lie in [1, C={C}], got {kappa}")
    masks = np.arange(1, 1 << C, dtype=np.int64)
    if kappa < C:
        masks = masks[_popcount(masks) <= kappa]
    return FocalStructure(int(C), int(kappa), tuple(int(m) for m in masks))


@dataclass(frozen=True)
class MassFunction:
    """Masses ``m(A_j)`` over the focal sets of a structure.

    The empty set is never enumerated, so ``m(empty) = 0`` holds by
    construction. Masses must be nonnegative and sum to one within 1e-9.
    """

    structure: FocalStructure
    masses: np.ndarray

    def __post_init__(self):
        masses = np.array(self.masses, dtype=np.float64).reshape(-1)
        if masses.shape != (self.structure.M,):
            raise ParameterError(
                f"expected {self.structure.M} masses, got {masses.shape[0]}"
            )
        if not np.all(np.isfinite(masses)) or np.any(masses < 0):
            raise ParameterError("masses must be finite and nonnegative")
        if abs(masses.sum() - 1.0) > MASS_TOL:
            raise ParameterError(f"masses sum to {masses.sum():.12g}, not 1")
        masses.setflags(write=False)
        object.__setattr__(self, "masses", masses)

    @property
    def C(self) -> int:
        return self.structure.C

    def __getitem__(self, subset) -> float:
        s = self.structure
        mask = as_mask(subset, s.C)
        j = s._index.get(mask)
        return 0.0 if j is None else float(self.masses[j])

    @classmethod
    def from_dict(cls, masses: Mapping, C: int, kappa: int | None = None):
        """Build from ``{subset: mass}``; unlisted focal sets get zero."""
        s = enumerate_focal_sets(C, kappa)
        vec = np.zeros(s.M)
        for subset, value in masses.items():
            vec[s.index(subset)] += value
        return cls(s, vec)

    @classmethod
    def vacuous(cls, C: int, kappa: int | None = None):
        s = enumerate_focal_sets(C, C if kappa is None else kappa)
        return cls.from_dict({s.omega: 1.0}, C, s.kappa)

    @classmethod
    def certain(cls, C: int, k: int, kappa: int | None = None):
        return cls.from_dict({(k,): 1.0}, C, kappa)

    def to_dict(self) -> dict:
        """JSON-ready form: ``{"C", "kappa", "masses": [{"set", "mass"}]}``."""
        s = self.structure
        return {
            "C": s.C,
            "kappa": s.kappa,
            "masses": [
                {"set": list(s.members(j)), "mass": float(v)}
                for j, v in enumerate(self.masses)
                if v != 0.0
            ],
        }

    @classmethod
    def from_json_dict(cls, d: Mapping):
        try:
            entries = {tuple(e["set"]): float(e["mass"]) for e in d["masses"]}
            return cls.from_dict(entries, int(d["C"]), int(d["kappa"]))
        except (KeyError, TypeError) as exc:
            raise ParameterError(f"malformed mass function: {exc}") from exc


def _nonempty_mask(A, C: int) -> int:
    mask = as_mask(A, C)
    if mask == 0:
        raise ParameterError("the empty set is not a valid argument")
    return mask


def bel(m: MassFunction, A) -> float:
    """Belief ``Bel(A) = sum of m(B) over B subset of A``."""
    mask = _nonempty_mask(A, m.C)
    sel = (m.structure.masks & ~mask) == 0
    return float(m.masses[sel].sum())


def pl(m: MassFunction, A) -> float:
    """Plausibility ``Pl(A) = sum of m(B) over B intersecting A``."""
    mask = _nonempty_mask(A, m.C)
    sel = (m.structure.masks & mask) != 0
    return float(m.masses[sel].sum())


def pignistic_matrix(masses: np.ndarray, structure: FocalStructure) -> np.ndarray:
    """Row-wise pignistic transform of an (N, M) mass matrix into (N, C)."""
    share = structure.indicator / structure.cardinality
    return np.asarray(masses) @ share.T


def betp(m: MassFunction) -> np.ndarray:
    """Pignistic probabilities ``BetP(w_k) = sum over A containing w_k of m(A)/|A|``."""
    return pignistic_matrix(m.masses[None, :], m.structure)[0]


def combine_rows(
    m1: np.ndarray,
    s1: FocalStructure,
    m2: np.ndarray,
    s2: FocalStructure,
) -> tuple[np.ndarray, np.ndarray]:
    """Unnormalized conjunctive combination of paired rows.

    Parameters
    ----------
    m1, m2 : ndarray, shape (N, M1) and (N, M2)
        Mass rows over ``s1`` and ``s2`` (same frame).

    Returns
    -------
    joint : ndarray, shape (N, 2**C - 1)
        Conjunctive masses over the full powerset, not yet normalized.
    conflict : ndarray, shape (N,)
        Mass ``K`` falling on the empty set.
    """
    if s1.C != s2.C:
        raise ParameterError(f"frames differ: C={s1.C} vs C={s2.C}")
    m1 = np.atleast_2d(np.asarray(m1, dtype=np.float64))
    m2 = np.atleast_2d(np.asarray(m2, dtype=np.float64))
    if m1.shape[0] != m2.shape[0]:
        raise ParameterError(f"row counts differ: {m1.shape[0]} vs {m2.shape[0]}")
    n = m1.shape[0]
    joint = np.zeros((n, (1 << s1.C) - 1))
    conflict = np.zeros(n)
    live1 = np.flatnonzero(np.any(m1 != 0, axis=0))
    live2 = np.flatnonzero(np.any(m2 != 0, axis=0))
    for j1 in live1:
        a = s1.sets[j1]
        col = m1[:, j1]
        for j2 in live2:
            inter = a & s2.sets[j2]
            prod = col * m2[:, j2]
            if inter:
                # full powerset in bitmask order: index = mask - 1
                joint[:, inter - 1] += prod
            else:
                conflict += prod
    return joint, conflict


def normalize_combination(joint: np.ndarray, conflict: np.ndarray) -> np.ndarray:
    """Dempster normalization of rows whose conflict is below ``1 - 1e-12``.

    Rows in total conflict are left as NaN; callers decide how to handle them.
    """
    out = np.full_like(joint, np.nan)
    ok = conflict < 1.0 - CONFLICT_TOL
    rows = joint[ok] / (1.0 - conflict[ok])[:, None]
    rows[rows < CLAMP_TOL] = 0.0
    out[ok] = rows / rows.sum(axis=1, keepdims=True)
    return out


def dempster_combine(m1: MassFunction, m2: MassFunction) -> MassFunction:
    """Combine two mass functions with Dempster's normalized conjunctive rule.

    The result lives on the full powerset of the shared frame, since
    intersections of capped focal sets can be arbitrary subsets.

    Raises
    ------
    ConflictError
        If the conflict ``K`` is at least ``1 - 1e-12``.
    """
    joint, conflict = combine_rows(
        m1.masses[None, :], m1.structure, m2.masses[None, :], m2.structure
    )
    K = float(conflict[0])
    if K >= 1.0 - CONFLICT_TOL:
        raise ConflictError(f"total conflict between sources (K={K:.15g})")
    masses = normalize_combination(joint, conflict)[0]
    return MassFunction(enumerate_focal_sets(m1.C), masses)


def conflict(m1: MassFunction, m2: MassFunction) -> float:
    """Degree of conflict ``K`` between two mass functions."""
    _, K = combine_rows(m1.masses[None, :], m1.structure, m2.masses[None, :], m2.structure)
    return float(K[0])
