"""Choosing the number of clusters with the evidential BIC."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .core import EgmmConfig, EgmmModel, egmm_fit
from .errors import EgmmError, NumericError, ParameterError
from .partition import EvidentialPartition


def n_parameters(model: EgmmModel) -> int:
    """Free parameters: ``M - 1`` weights, ``C * D`` means, ``D(D+1)/2`` covariance."""
    D = model.D
    return (model.M - 1) + model.C * D + D * (D + 1) // 2


def ebic_from(loglik: float, n_params: int, N: int) -> float:
    return loglik - 0.5 * n_params * np.log(N)


def ebic(model: EgmmModel, N: int) -> float:
    """Evidential BIC of a fitted model (larger is better)."""
    return ebic_from(model.loglik, n_parameters(model), N)


@dataclass(frozen=True)
class SweepRecord:
    C: int
    ebic: float
    loglik: float
    n_params: int
    iterations: int
    converged: bool
    model: EgmmModel | None = None
    partition: EvidentialPartition | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass(frozen=True)
class SweepResult:
    records: tuple[SweepRecord, ...]
    best_C: int

    @property
    def best(self) -> SweepRecord:
        return next(r for r in self.records if r.C == self.best_C)

    def criterion(self) -> dict[int, float]:
        return {r.C: r.ebic for r in self.records if r.ok}

    def to_rows(self) -> list[dict]:
        return [
            {
                "C": r.C,
                "ebic": r.ebic,
                "loglik": r.loglik,
                "n_params": r.n_params,
                "iterations": r.iterations,
                "converged": r.converged,
            }
            for r in self.records
        ]


def select(records) -> int:
    """Argmax of EBIC over successful records, ties to the smallest C."""
    ok = sorted((r for r in records if r.ok), key=lambda r: r.C)
    if not ok:
        raise NumericError("no cluster number could be fitted")
    top = max(r.ebic for r in ok)
    return next(r.C for r in ok if r.ebic == top)


def sweep(
    X: np.ndarray,
    C_min: int,
    C_max: int,
    template: EgmmConfig | None = None,
    keep_models: bool = True,
) -> SweepResult:
    """Fit an EGMM for every C in ``[C_min, C_max]`` and pick the EBIC maximum.

    The template's ``kappa`` applies to every C when set; when it is None,
    each C gets the default cap. Each C is fitted with the seed
    ``SeedSequence([template.seed, C])`` so runs are reproducible and
    independent of the range. A C whose fit fails is recorded with its
    error and excluded from the selection.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    N = X.shape[0]
    if not 1 < C_min <= C_max < N:
        raise ParameterError(f"need 1 < C_min <= C_max < N, got {C_min}..{C_max}, N={N}")
    template = template or EgmmConfig(C=C_min)
    base_seed = 0 if template.seed is None else template.seed
    records = []
    for C in range(C_min, C_max + 1):
        kappa = None if template.kappa is None else min(template.kappa, C)
        cfg = replace(template, C=C, kappa=kappa, seed=np.random.SeedSequence([base_seed, C]))
        try:
            model, part = egmm_fit(X, cfg)
        except EgmmError as exc:
            records.append(SweepRecord(C, -np.inf, np.nan, 0, 0, False, error=str(exc)))
            continue
        records.append(
            SweepRecord(
                C,
                ebic(model, N),
                model.loglik,
                n_parameters(model),
                model.iterations,
                model.converged,
                model if keep_models else None,
                part if keep_models else None,
            )
        )
    return SweepResult(tuple(records), select(records))
