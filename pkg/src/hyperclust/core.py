"""Domain types, validation and shared matrix helpers.

Similarity, degree and Laplacian matrices are plain dense ``numpy`` arrays.
Anything built here passes through :func:`symmetrize`, so ``M == M.T`` holds
bit for bit.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np


class HyperclustError(Exception):
    """Base class for library errors."""


class InvalidInputError(HyperclustError, ValueError):
    pass


class InvalidParameterError(HyperclustError, ValueError):
    pass


class DegenerateGraphError(HyperclustError):
    """A vertex has zero degree where a positive one is required."""


class DegenerateScaleError(HyperclustError):
    """The data carry no distance scale (all samples identical)."""


class NumericalError(HyperclustError):
    pass


class ConvergenceWarning(UserWarning):
    pass


# ---------------------------------------------------------------------------
# matrix helpers


def symmetrize(M) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    return (M + M.T) / 2.0


def check_symmetric(M, name: str = "matrix", *, atol: float = 0.0) -> np.ndarray:
    """Return ``M`` as a float array after checking shape, finiteness and symmetry."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InvalidInputError(f"{name} must be square, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InvalidInputError(f"{name} has non-finite entries")
    scale = max(1.0, float(np.max(np.abs(M)))) if M.size else 1.0
    if np.max(np.abs(M - M.T), initial=0.0) > atol * scale:
        raise InvalidInputError(f"{name} is not symmetric")
    return M


def degree_matrix(S) -> np.ndarray:
    """Diagonal matrix of row sums of ``S``."""
    S = check_symmetric(S, "S")
    return np.diag(S.sum(axis=1))


def laplacian(S) -> np.ndarray:
    """Unnormalized graph Laplacian ``D - S``."""
    S = check_symmetric(S, "S")
    Q = np.diag(S.sum(axis=1)) - S
    return symmetrize(Q)


def cosine_similarity(F) -> np.ndarray:
    """Row-wise cosine similarity of a nonnegative feature matrix.

    A zero row is similar only to itself.
    """
    F = np.asarray(F, dtype=float)
    norms = np.linalg.norm(F, axis=1)
    safe = np.where(norms > 0, norms, 1.0)
    G = F / safe[:, None]
    S = np.clip(G @ G.T, 0.0, 1.0)
    np.fill_diagonal(S, 1.0)
    return symmetrize(S)


# ---------------------------------------------------------------------------
# domain types


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray
    labels: Optional[np.ndarray] = None
    ids: Optional[Sequence[str]] = None
    label_names: Optional[Sequence[str]] = None

    def __post_init__(self):
        X = np.asarray(self.features, dtype=float)
        if X.ndim != 2:
            raise InvalidInputError(f"features must be 2-D, got shape {X.shape}")
        n, d = X.shape
        if n < 2 or d < 1:
            raise InvalidInputError(f"need N >= 2 samples and d >= 1 features, got {X.shape}")
        if not np.all(np.isfinite(X)):
            raise InvalidInputError("features contain non-finite values")
        X.setflags(write=False)
        object.__setattr__(self, "features", X)

        if self.labels is not None:
            y = np.asarray(self.labels)
            if y.shape != (n,) or not np.issubdtype(y.dtype, np.integer):
                raise InvalidInputError("labels must be a length-N integer vector")
            if y.min() < 0:
                raise InvalidInputError("labels must be nonnegative")
            missing = set(range(int(y.max()) + 1)) - set(np.unique(y).tolist())
            if missing:
                raise InvalidInputError(f"label indices {sorted(missing)} never occur")
            y = y.astype(np.int64)
            y.setflags(write=False)
            object.__setattr__(self, "labels", y)
        if self.ids is not None and len(self.ids) != n:
            raise InvalidInputError("ids must have one entry per sample")

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> Optional[int]:
        if self.labels is None:
            return None
        return int(self.labels.max()) + 1

    def with_features(self, features) -> "Dataset":
        return Dataset(features, self.labels, self.ids, self.label_names)


@dataclass(frozen=True)
class HypergraphIncidence:
    """Vertex-by-hyperedge incidence ``H`` with hyperedge weights (the diagonal of Sigma)."""

    n_vertices: int
    hyperedges: tuple
    incidence: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        H = np.asarray(self.incidence, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if H.shape != (self.n_vertices, len(self.hyperedges)) or w.shape != (len(self.hyperedges),):
            raise InvalidInputError("incidence/weights shape does not match hyperedge list")
        if not (np.all(np.isfinite(H)) and np.all(np.isfinite(w))):
            raise InvalidInputError("incidence and weights must be finite")
        if np.any(H < 0) or np.any(w < 0):
            raise InvalidInputError("incidence and weights must be nonnegative")
        member = np.zeros(H.shape, dtype=bool)
        for l, edge in enumerate(self.hyperedges):
            member[list(edge), l] = True
        if np.any(H[~member] != 0):
            raise InvalidInputError("nonzero incidence for a vertex outside its hyperedge")
        object.__setattr__(self, "incidence", H)
        object.__setattr__(self, "weights", w)

    @property
    def n_edges(self) -> int:
        return len(self.hyperedges)

    def similarity(self) -> np.ndarray:
        """``H Sigma H^T``."""
        H = self.incidence
        return symmetrize((H * self.weights) @ H.T)

    def normalization(self) -> np.ndarray:
        """Per-vertex ``sum_l w_l h(i, l)^2``."""
        return (self.incidence**2) @ self.weights


@dataclass(frozen=True)
class PartitionCandidate:
    P: np.ndarray
    rho: float
    iterations: int = 0
    constraint: str = "orthonormal"  # or "degree" for Z^T D Z = I


@dataclass(frozen=True)
class Partition:
    X: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X)
        if X.ndim != 2:
            raise InvalidInputError("partition matrix must be 2-D")
        if not np.all((X == 0) | (X == 1)) or not np.all(X.sum(axis=1) == 1):
            raise InvalidInputError("partition rows must be one-hot")
        X = X.astype(np.int8)
        X.setflags(write=False)
        object.__setattr__(self, "X", X)

    @classmethod
    def from_labels(cls, labels, n_clusters: Optional[int] = None) -> "Partition":
        labels = np.asarray(labels, dtype=np.int64)
        k = int(labels.max()) + 1 if n_clusters is None else n_clusters
        X = np.zeros((labels.size, k), dtype=np.int8)
        X[np.arange(labels.size), labels] = 1
        return cls(X)

    @property
    def labels(self) -> np.ndarray:
        return np.argmax(self.X, axis=1)

    @property
    def n_clusters(self) -> int:
        return self.X.shape[1]

    def sizes(self) -> np.ndarray:
        return self.X.sum(axis=0).astype(np.int64)


@dataclass(frozen=True)
class HyperParams:
    kappa: int
    sigma: Optional[float] = None  # None: grid default
    k: int = 3
    alpha: float = 0.4
    beta: float = 0.4
    communities_per_method: Optional[int] = None  # None: 2 * kappa
    neighbor_set_size: int = 3
    epsilon: float = 1e-6
    seed: int = 0
    extra: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if self.kappa < 2:
            raise InvalidParameterError("kappa must be >= 2")
        if self.sigma is not None and not (np.isfinite(self.sigma) and self.sigma > 0):
            raise InvalidParameterError("sigma must be positive and finite")
        if self.k < 1:
            raise InvalidParameterError("k must be >= 1")
        check_weights(self.alpha, self.beta)
        if self.communities_per_method is not None and self.communities_per_method < 1:
            raise InvalidParameterError("communities_per_method must be >= 1")
        if self.neighbor_set_size < 1:
            raise InvalidParameterError("neighbor_set_size must be >= 1")
        if not self.epsilon > 0:
            raise InvalidParameterError("epsilon must be positive")

    @property
    def n_communities(self) -> int:
        return self.communities_per_method or 2 * self.kappa

    def check_against(self, n_samples: int) -> None:
        if self.k >= n_samples:
            raise InvalidParameterError(f"k={self.k} must be < N={n_samples}")
        if self.kappa > n_samples:
            raise InvalidParameterError(f"kappa={self.kappa} exceeds N={n_samples}")


def check_weights(alpha: float, beta: float) -> None:
    if not (alpha >= 0 and beta >= 0 and alpha + beta <= 1 + 1e-12):
        raise InvalidParameterError(
            f"fusion weights need alpha, beta >= 0 and alpha + beta <= 1, got ({alpha}, {beta})"
        )
