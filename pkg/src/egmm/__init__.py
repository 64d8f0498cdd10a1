"""Evidential Gaussian mixture models.

Clustering in which every object receives a mass function over sets of
clusters, fitted by a constrained EM algorithm, together with the classical
GMM baselines, EBIC model selection, partition summaries, external
clustering metrics and Dempster fusion of partitions.
"""

from .belief import (
    FocalStructure,
    MassFunction,
    bel,
    betp,
    conflict,
    dempster_combine,
    enumerate_focal_sets,
    pl,
)
from .core import EgmmConfig, EgmmModel, e_step, egmm_em, egmm_fit, egmm_loglik
from .datagen import (
    LabeledDataset,
    gen_diamond,
    gen_four_class,
    gen_phantom,
    gen_two_class,
)
from .errors import ConflictError, DataError, EgmmError, NumericError, ParameterError
from .gmm import GmmModel, gmm_bic, gmm_em, gmm_fit, gmm_responsibilities
from .kmeans import KmeansResult, kmeans_fit
from .metrics import ari, evaluate, nmi, purity
from .mvn import GaussianParam, log_density, regularize_spd
from .partition import (
    EvidentialPartition,
    HardEvidentialView,
    ambiguity_count,
    embed_partition,
    fuse_partitions,
    hard_credal,
    harden_betp,
)
from .selection import SweepResult, ebic, sweep

__all__ = [
    "ConflictError",
    "DataError",
    "EgmmConfig",
    "EgmmError",
    "EgmmModel",
    "EvidentialPartition",
    "FocalStructure",
    "GaussianParam",
    "GmmModel",
    "HardEvidentialView",
    "KmeansResult",
    "LabeledDataset",
    "MassFunction",
    "NumericError",
    "ParameterError",
    "SweepResult",
    "ambiguity_count",
    "ari",
    "bel",
    "betp",
    "conflict",
    "dempster_combine",
    "e_step",
    "ebic",
    "egmm_em",
    "egmm_fit",
    "egmm_loglik",
    "embed_partition",
    "enumerate_focal_sets",
    "evaluate",
    "fuse_partitions",
    "gen_diamond",
    "gen_four_class",
    "gen_phantom",
    "gen_two_class",
    "gmm_bic",
    "gmm_em",
    "gmm_fit",
    "gmm_responsibilities",
    "hard_credal",
    "harden_betp",
    "kmeans_fit",
    "log_density",
    "nmi",
    "pl",
    "purity",
    "regularize_spd",
    "sweep",
]
