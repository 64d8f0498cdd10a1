"""Seeded synthetic datasets: Gaussian classes, a diamond toy set, an image phantom.

Gaussian samples are drawn as ``mean + z @ chol(cov).T`` with ``z`` from
``numpy.random.Generator(PCG64(seed))`` standard normals, one class after
another, so a given seed reproduces the same dataset on any platform that
ships NumPy's PCG64 and its normal sampler.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError

TWO_CLASS_MEANS = np.array([[2.0, 4.0], [2.0, 0.0]])
TWO_CLASS_COV = np.array([[3.0, 2.0], [2.0, 3.0]])
FOUR_CLASS_MEANS = np.array([[0.0, 0.0], [0.0, 4.0], [4.0, 4.0], [4.0, 0.0]])
FOUR_CLASS_COV = 2.0 * np.eye(2)

PHANTOM_SHAPE = (64, 64)
PHANTOM_FRACTIONS = (0.4, 0.3, 0.3)
PHANTOM_REGIONS = ("tissue", "fluid", "lesion")
PHANTOM_CHANNEL_MEANS = (
    np.array([0.8, 0.2, 0.2]),  # T1-like: tissue vs the rest
    np.array([0.3, 0.3, 0.9]),  # T2-like: lesion vs the rest
)
PHANTOM_NOISE = 0.08


@dataclass(frozen=True)
class LabeledDataset:
    """Feature matrix with optional integer labels (``0`` = unlabeled/boundary)."""

    X: np.ndarray
    labels: np.ndarray | None = None
    feature_names: tuple[str, ...] = ()
    label_name: str = "label"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=np.float64))
        object.__setattr__(self, "X", X)
        if not self.feature_names:
            names = ("x", "y", "z") if X.shape[1] <= 3 else ()
            names = names[: X.shape[1]] or tuple(f"f{i + 1}" for i in range(X.shape[1]))
            object.__setattr__(self, "feature_names", names)
        if self.labels is not None:
            labels = np.asarray(self.labels)
            if labels.shape != (X.shape[0],):
                raise ParameterError("labels must have one entry per row")
            object.__setattr__(self, "labels", labels)

    @property
    def N(self) -> int:
        return self.X.shape[0]

    @property
    def D(self) -> int:
        return self.X.shape[1]


def sample_gaussian_classes(means, cov, counts, rng: np.random.Generator) -> LabeledDataset:
    """Stack ``counts[k]`` draws from ``N(means[k], cov)`` for each class k."""
    means = np.atleast_2d(np.asarray(means, dtype=float))
    L = np.linalg.cholesky(np.asarray(cov, dtype=float))
    blocks, labels = [], []
    for k, (mu, n) in enumerate(zip(means, counts)):
        if n < 1:
            raise ParameterError("class counts must be >= 1")
        z = rng.standard_normal((n, means.shape[1]))
        blocks.append(mu + z @ L.T)
        labels.append(np.full(n, k + 1))
    return LabeledDataset(np.vstack(blocks), np.concatenate(labels))


def gen_two_class(seed: int = 0, n_per_class: int = 400) -> LabeledDataset:
    """Two correlated Gaussian classes sharing the covariance [[3, 2], [2, 3]]."""
    rng = np.random.default_rng(seed)
    return sample_gaussian_classes(TWO_CLASS_MEANS, TWO_CLASS_COV, [n_per_class] * 2, rng)


def gen_four_class(seed: int = 0, n_per_class: int = 200) -> LabeledDataset:
    """Four isotropic Gaussian classes (covariance 2I) on the corners of a square."""
    rng = np.random.default_rng(seed)
    return sample_gaussian_classes(FOUR_CLASS_MEANS, FOUR_CLASS_COV, [n_per_class] * 4, rng)


def gen_diamond() -> LabeledDataset:
    """Eleven points: two mirrored five-point diamonds joined by a bridge point.

    Object 6 (row index 5) is the bridge at the origin, labeled 0.
    """
    left = [(-3, 0), (-2, 1), (-2, -1), (-1, 0), (-2, 0)]
    right = [(1, 0), (2, 1), (2, -1), (3, 0), (2, 0)]
    X = np.array(left + [(0, 0)] + right, dtype=float)
    labels = np.array([1] * 5 + [0] + [2] * 5)
    return LabeledDataset(X, labels)


@dataclass(frozen=True)
class Phantom:
    """Two single-feature channels over one pixel grid with 3-region truth."""

    channels: tuple[LabeledDataset, LabeledDataset]
    regions: np.ndarray
    shape: tuple[int, int]

    def image(self, channel: int) -> np.ndarray:
        return self.channels[channel].X[:, 0].reshape(self.shape)


def phantom_regions(shape=PHANTOM_SHAPE, fractions=PHANTOM_FRACTIONS) -> np.ndarray:
    """Region map (values 1, 2, 3) of the phantom.

    Region 2 is the central disc holding ``fractions[1]`` of the pixels,
    region 3 the rightmost remaining pixels holding ``fractions[2]``, and
    region 1 everything else. Pixel counts are rounded to integers.
    """
    h, w = shape
    n = h * w
    rr, cc = np.mgrid[0:h, 0:w]
    radius = np.hypot(rr - (h - 1) / 2, cc - (w - 1) / 2).ravel()
    col = cc.ravel().astype(float)
    idx = np.arange(n)
    n_fluid = int(round(fractions[1] * n))
    n_lesion = int(round(fractions[2] * n))
    regions = np.ones(n, dtype=int)
    fluid = np.lexsort((idx, radius))[:n_fluid]
    regions[fluid] = 2
    rest = np.flatnonzero(regions == 1)
    # rightmost columns first, then nearest the vertical centre line
    order = np.lexsort((np.abs(rr.ravel()[rest] - (h - 1) / 2), -col[rest]))
    regions[rest[order[:n_lesion]]] = 3
    return regions.reshape(shape)


def gen_phantom(seed: int = 0, shape=PHANTOM_SHAPE, noise: float = PHANTOM_NOISE) -> Phantom:
    """Two-channel image phantom; each channel sees only part of the structure.

    Channel 1 separates region 1 (mean 0.8) from regions 2 and 3 (0.2);
    channel 2 separates region 3 (0.9) from regions 1 and 2 (0.3). Both add
    independent Gaussian noise of standard deviation ``noise``.
    """
    regions = phantom_regions(shape)
    truth = regions.ravel()
    rng = np.random.default_rng(seed)
    channels = []
    for c, means in enumerate(PHANTOM_CHANNEL_MEANS):
        values = means[truth - 1] + noise * rng.standard_normal(truth.size)
        channels.append(
            LabeledDataset(
                values[:, None],
                truth.copy(),
                feature_names=(f"intensity_t{c + 1}",),
                meta={"shape": list(shape), "channel": c + 1},
            )
        )
    return Phantom(tuple(channels), regions, tuple(shape))


PRESETS = {
    "diamond": lambda seed: gen_diamond(),
    "two-class": gen_two_class,
    "four-class": gen_four_class,
}
