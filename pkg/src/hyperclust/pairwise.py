"""Gaussian-kernel pairwise similarity and the sigma tuning grid."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .core import (
    Dataset,
    DegenerateScaleError,
    HypergraphIncidence,
    InvalidInputError,
    InvalidParameterError,
    check_symmetric,
    symmetrize,
)

UNDERFLOW = 1e-300
DEFAULT_GRID_INDEX = 8  # lambda, 1-based


@dataclass(frozen=True)
class KernelSpec:
    sigma: float
    kind: str = "gaussian"

    def __post_init__(self):
        if self.kind != "gaussian":
            raise InvalidParameterError(f"unsupported kernel {self.kind!r}")
        if not (np.isfinite(self.sigma) and self.sigma > 0):
            raise InvalidParameterError(f"sigma must be positive and finite, got {self.sigma}")


def gaussian_kernel(zi, zj, sigma: float) -> float:
    zi = np.asarray(zi, dtype=float)
    zj = np.asarray(zj, dtype=float)
    if zi.shape != zj.shape:
        raise InvalidInputError(f"vector shapes differ: {zi.shape} vs {zj.shape}")
    KernelSpec(sigma)
    d2 = float(np.sum((zi - zj) ** 2))
    value = float(np.exp(-d2 / (2.0 * sigma * sigma)))
    return 0.0 if value < UNDERFLOW else value


def mean_distance(dataset: Dataset) -> float:
    """Average over samples of the mean Euclidean distance to every other sample."""
    n = dataset.n_samples
    return float(2.0 * pdist(dataset.features).sum() / (n * (n - 1)))


def sigma_grid(dataset: Dataset, steps: int = 15) -> np.ndarray:
    """Candidate scales ``lambda * 0.2 * mean_distance`` for ``lambda = 1..steps``."""
    if steps < 1:
        raise InvalidParameterError("steps must be >= 1")
    rho = mean_distance(dataset)
    if rho <= 0:
        raise DegenerateScaleError("all samples are identical; no distance scale")
    return 0.2 * rho * np.arange(1, steps + 1)


def default_sigma(dataset: Dataset) -> float:
    return float(sigma_grid(dataset)[DEFAULT_GRID_INDEX - 1])


def pairwise_similarity(dataset: Dataset, kernel: KernelSpec | float) -> np.ndarray:
    """Kernel matrix A with unit diagonal. This is also the pairwise hypergraph similarity."""
    if not isinstance(kernel, KernelSpec):
        kernel = KernelSpec(float(kernel))
    d2 = squareform(pdist(dataset.features, "sqeuclidean"))
    A = np.exp(-d2 / (2.0 * kernel.sigma**2))
    A[A < UNDERFLOW] = 0.0
    np.fill_diagonal(A, 1.0)
    return symmetrize(A)


def pairwise_incidence(A) -> HypergraphIncidence:
    """One binary hyperedge per unordered vertex pair, weighted by its kernel value.

    Memory is O(N^3); intended for inspection and testing rather than the pipeline.
    """
    A = check_symmetric(A, "A")
    n = A.shape[0]
    edges = tuple(combinations(range(n), 2))
    H = np.zeros((n, len(edges)))
    cols = np.arange(len(edges))
    if edges:
        m, q = np.array(edges).T
        H[m, cols] = 1.0
        H[q, cols] = 1.0
        weights = A[m, q]
    else:
        weights = np.zeros(0)
    return HypergraphIncidence(n, edges, H, weights)
