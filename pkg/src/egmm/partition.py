"""Evidential partitions and the crisp or rough views derived from them."""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from .belief import (
    MASS_TOL,
    FocalStructure,
    MassFunction,
    as_mask,
    combine_rows,
    enumerate_focal_sets,
    normalize_combination,
    pignistic_matrix,
)
from .errors import ParameterError


@dataclass(frozen=True)
class EvidentialPartition:
    """One mass function per object, stacked as an (N, M) matrix."""

    structure: FocalStructure
    masses: np.ndarray

    def __post_init__(self):
        masses = np.array(self.masses, dtype=np.float64, ndmin=2)
        if masses.shape[1] != self.structure.M:
            raise ParameterError(
                f"expected {self.structure.M} mass columns, got {masses.shape[1]}"
            )
        if not np.all(np.isfinite(masses)) or np.any(masses < 0):
            raise ParameterError("masses must be finite and nonnegative")
        bad = np.flatnonzero(np.abs(masses.sum(axis=1) - 1.0) > MASS_TOL)
        if bad.size:
            raise ParameterError(f"row {bad[0]} of the partition does not sum to 1")
        masses.setflags(write=False)
        object.__setattr__(self, "masses", masses)

    @property
    def N(self) -> int:
        return self.masses.shape[0]

    @property
    def C(self) -> int:
        return self.structure.C

    def __len__(self) -> int:
        return self.N

    def mass_function(self, i: int) -> MassFunction:
        return MassFunction(self.structure, self.masses[i])

    def betp(self) -> np.ndarray:
        """Pignistic probabilities, shape (N, C)."""
        return pignistic_matrix(self.masses, self.structure)

    def to_dict(self) -> dict:
        s = self.structure
        return {
            "C": s.C,
            "kappa": s.kappa,
            "focal_sets": [list(s.members(j)) for j in range(s.M)],
            "masses": self.masses.tolist(),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> EvidentialPartition:
        try:
            s = enumerate_focal_sets(int(d["C"]), int(d["kappa"]))
            masses = np.asarray(d["masses"], dtype=float).reshape(-1, s.M)
            listed = [as_mask(f, s.C) for f in d.get("focal_sets", [])]
        except (KeyError, TypeError, ValueError) as exc:
            raise ParameterError(f"malformed partition: {exc}") from exc
        if listed and tuple(listed) != s.sets:
            # reorder columns into canonical bitmask order
            cols = [s.index(m) for m in listed]
            canon = np.zeros_like(masses)
            canon[:, cols] = masses
            masses = canon
        return cls(s, masses)


@dataclass(frozen=True)
class HardEvidentialView:
    """Hard credal assignment with lower/upper cluster approximations.

    ``best`` holds, for each object, the index j of its highest-mass focal
    set. ``lower[k]`` and ``upper[k]`` are sorted 0-based object indices for
    cluster ``k + 1``.
    """

    structure: FocalStructure
    best: np.ndarray
    lower: tuple[np.ndarray, ...]
    upper: tuple[np.ndarray, ...]

    @property
    def N(self) -> int:
        return self.best.shape[0]

    def members(self, j: int) -> np.ndarray:
        """``X(A_j)``: objects whose best focal set is ``A_j``."""
        return np.flatnonzero(self.best == j)

    def lower_matrix(self) -> np.ndarray:
        """Boolean (N, C) membership in the lower approximations."""
        out = np.zeros((self.N, self.structure.C), dtype=bool)
        for k, idx in enumerate(self.lower):
            out[idx, k] = True
        return out

    def upper_matrix(self) -> np.ndarray:
        out = np.zeros((self.N, self.structure.C), dtype=bool)
        for k, idx in enumerate(self.upper):
            out[idx, k] = True
        return out

    def to_dict(self) -> dict:
        s = self.structure
        return {
            "C": s.C,
            "kappa": s.kappa,
            "best_focal_set": [list(s.members(int(j))) for j in self.best],
            "lower": [(idx + 1).tolist() for idx in self.lower],
            "upper": [(idx + 1).tolist() for idx in self.upper],
            "ambiguity_count": ambiguity_count(self),
        }


def hard_credal(p: EvidentialPartition) -> HardEvidentialView:
    """Assign each object to its highest-mass focal set (ties to lowest j)."""
    s = p.structure
    best = p.masses.argmax(axis=1)
    member = s.indicator[:, best].astype(bool)  # (C, N)
    lower = tuple(np.flatnonzero(best == s.singletons[k]) for k in range(s.C))
    upper = tuple(np.flatnonzero(member[k]) for k in range(s.C))
    return HardEvidentialView(s, best, lower, upper)


def harden_betp(p: EvidentialPartition) -> np.ndarray:
    """Crisp 1-based labels by maximum pignistic probability (ties to lowest k)."""
    return p.betp().argmax(axis=1) + 1


def ambiguity_count(view: HardEvidentialView) -> int:
    """Number of objects whose best focal set holds two or more clusters."""
    return int(np.count_nonzero(view.structure.cardinality[view.best] >= 2))


def parse_cluster_map(spec: str) -> dict[int, tuple[int, ...]]:
    """Parse ``"1=1;2=2,3"`` into ``{1: (1,), 2: (2, 3)}``."""
    out = {}
    for part in filter(None, (p.strip() for p in spec.split(";"))):
        try:
            local, targets = part.split("=")
            out[int(local)] = tuple(int(t) for t in targets.split(",") if t.strip())
        except ValueError as exc:
            raise ParameterError(f"cannot parse cluster map entry {part!r}") from exc
    if not out:
        raise ParameterError(f"empty cluster map {spec!r}")
    return out


def embed_partition(
    p: EvidentialPartition,
    mapping: Mapping[int, Sequence[int]],
    C_global: int,
) -> EvidentialPartition:
    """Carry a partition over to a finer frame of ``C_global`` clusters.

    ``mapping`` sends each local cluster (1-based) to a non-empty set of
    global clusters; a local focal set goes to the union of the images of
    its members. The result lives on the full powerset of the global frame.
    """
    s = p.structure
    missing = set(range(1, s.C + 1)) - set(mapping)
    if missing:
        raise ParameterError(f"cluster map lacks local clusters {sorted(missing)}")
    images = {}
    for k, targets in mapping.items():
        if not 1 <= k <= s.C:
            raise ParameterError(f"cluster map names local cluster {k} outside 1..{s.C}")
        mask = as_mask(targets, C_global)
        if mask == 0:
            raise ParameterError(f"local cluster {k} maps to the empty set")
        images[k] = mask
    target = enumerate_focal_sets(C_global)
    out = np.zeros((p.N, target.M))
    for j in range(s.M):
        mask = 0
        for k in s.members(j):
            mask |= images[k]
        out[:, mask - 1] += p.masses[:, j]
    return EvidentialPartition(target, out)


@dataclass(frozen=True)
class FusionResult:
    partition: EvidentialPartition
    conflict: np.ndarray
    total_conflict: np.ndarray


def fuse_partitions(partitions: Sequence[EvidentialPartition]) -> FusionResult:
    """Object-wise Dempster combination of several partitions over one frame.

    Objects in total conflict (``K >= 1 - 1e-12``) receive the vacuous mass
    and are flagged in ``total_conflict``; ``conflict`` holds the degree of
    conflict of the last pairwise combination step that involved each object.
    """
    if len(partitions) < 2:
        raise ParameterError("need at least two partitions to fuse")
    C = partitions[0].C
    N = partitions[0].N
    for q in partitions[1:]:
        if q.C != C:
            raise ParameterError(f"frames differ: C={C} vs C={q.C}")
        if q.N != N:
            raise ParameterError(f"object counts differ: N={N} vs N={q.N}")
    full = enumerate_focal_sets(C)
    acc, s_acc = partitions[0].masses, partitions[0].structure
    conflict = np.zeros(N)
    dead = np.zeros(N, dtype=bool)
    for q in partitions[1:]:
        joint, K = combine_rows(acc, s_acc, q.masses, q.structure)
        combined = normalize_combination(joint, K)
        bad = ~np.isfinite(combined[:, 0])
        combined[bad] = 0.0
        combined[bad, full.M - 1] = 1.0
        dead |= bad
        conflict = K
        acc, s_acc = combined, full
    return FusionResult(EvidentialPartition(full, acc), conflict, dead)
