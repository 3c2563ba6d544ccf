"""Over-clustering hypergraph: vertex communities from base clusterers as hyperedges.

Also home of the base clusterers themselves (k-means++, Ng-Jordan-Weiss
spectral clustering, multiclass spectral clustering); the first two double
as the classic spectral clustering baseline.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (
    DegenerateGraphError,
    HypergraphIncidence,
    InvalidInputError,
    InvalidParameterError,
    Partition,
    check_symmetric,
    cosine_similarity,
    symmetrize,
)
from .partitioning import cluster, sym_eig

KMEANS_MAX_ITER = 300
SPECTRAL_RESTARTS = 10
METHODS = ("classic", "multiclass")


# ---------------------------------------------------------------------------
# k-means


def _sq_dists(X: np.ndarray, C: np.ndarray) -> np.ndarray:
    d = (X**2).sum(axis=1)[:, None] - 2.0 * X @ C.T + (C**2).sum(axis=1)[None, :]
    return np.maximum(d, 0.0)


def _kmeanspp(X: np.ndarray, k: int, rng) -> np.ndarray:
    n = X.shape[0]
    chosen = [int(rng.integers(n))]
    closest = _sq_dists(X, X[chosen])[:, 0]
    for _ in range(1, k):
        total = closest.sum()
        if total > 0:
            idx = int(rng.choice(n, p=closest / total))
        else:  # remaining points coincide with centers
            idx = int(rng.choice(np.setdiff1d(np.arange(n), chosen)))
        chosen.append(idx)
        closest = np.minimum(closest, _sq_dists(X, X[idx : idx + 1])[:, 0])
    return X[chosen].copy()


def _lloyd(X: np.ndarray, k: int, rng, max_iter: int):
    C = _kmeanspp(X, k, rng)
    labels = None
    for _ in range(max_iter):
        d = _sq_dists(X, C)
        new = np.argmin(d, axis=1)
        counts = np.bincount(new, minlength=k)
        for c in np.flatnonzero(counts == 0):
            # reseed an empty cluster with the point farthest from its center,
            # taken from a cluster that can spare it
            own = d[np.arange(len(X)), new]
            own[counts[new] <= 1] = -1.0
            far = int(np.argmax(own))
            counts[new[far]] -= 1
            new[far] = c
            counts[c] = 1
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        C = np.array([X[labels == c].mean(axis=0) for c in range(k)])
    inertia = float(_sq_dists(X, C)[np.arange(len(X)), labels].sum())
    return labels, C, inertia


@dataclass
class KMeansResult:
    labels: np.ndarray
    centers: np.ndarray
    inertia: float

    @property
    def partition(self) -> Partition:
        return Partition.from_labels(self.labels, len(self.centers))


def kmeans(points, kappa: int, seed: int = 0, *, n_init: int = 1, max_iter: int = KMEANS_MAX_ITER) -> KMeansResult:
    """Lloyd's algorithm from k-means++ seeds; the lowest-inertia of ``n_init`` runs wins."""
    X = np.asarray(points, dtype=float)
    if X.ndim != 2:
        raise InvalidInputError("points must be 2-D")
    if not 1 <= kappa <= X.shape[0]:
        raise InvalidParameterError(f"kappa={kappa} must be in [1, {X.shape[0]}]")
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(n_init):
        labels, C, inertia = _lloyd(X, kappa, rng, max_iter)
        if best is None or inertia < best.inertia:
            best = KMeansResult(labels, C, inertia)
    return best


# ---------------------------------------------------------------------------
# spectral base clusterers


def spectral_embedding(S, kappa: int) -> np.ndarray:
    """Rows of the top eigenvectors of ``D^{-1/2} S D^{-1/2}``, scaled to unit length."""
    S = check_symmetric(S, "S")
    d = S.sum(axis=1)
    if np.any(d <= 0):
        raise DegenerateGraphError(f"vertex {int(np.flatnonzero(d <= 0)[0])} has zero degree")
    r = 1.0 / np.sqrt(d)
    _, V = sym_eig(symmetrize(S * r[:, None] * r[None, :]), kappa)
    norms = np.linalg.norm(V, axis=1)
    return V / np.where(norms > 0, norms, 1.0)[:, None]


def classic_spectral(S, kappa: int, seed: int = 0, *, n_init: int = SPECTRAL_RESTARTS) -> Partition:
    return kmeans(spectral_embedding(S, kappa), kappa, seed, n_init=n_init).partition


def multiclass_spectral(S, kappa: int, seed: int = 0) -> Partition:
    """Normalized-cut relaxation, discretized by rotation refinement."""
    S = check_symmetric(S, "S")
    if np.any(S.sum(axis=1) <= 0):
        raise DegenerateGraphError("zero-degree vertex")
    return cluster(S, kappa, criterion="nc", seed=seed).partition


# ---------------------------------------------------------------------------
# communities and the hypergraph


@dataclass(frozen=True)
class CommunitySet:
    n_vertices: int
    communities: tuple  # tuple of sorted index arrays
    methods: tuple  # method tag per community

    def __post_init__(self):
        if len(self.communities) != len(self.methods):
            raise InvalidInputError("one method tag per community required")
        for c in self.communities:
            if len(c) == 0:
                raise InvalidInputError("empty community")

    def __len__(self) -> int:
        return len(self.communities)

    @classmethod
    def from_partitions(cls, partitions: Sequence[Partition], tags: Sequence[str]) -> "CommunitySet":
        comms, methods = [], []
        n = None
        for part, tag in zip(partitions, tags):
            labels = part.labels
            n = labels.size
            for c in range(part.n_clusters):
                members = np.flatnonzero(labels == c)
                if members.size:
                    comms.append(members)
                    methods.append(tag)
        return cls(n, tuple(comms), tuple(methods))

    def membership(self) -> np.ndarray:
        M = np.zeros((self.n_vertices, len(self)), dtype=bool)
        for l, c in enumerate(self.communities):
            M[c, l] = True
        return M


def build_communities(A, n_communities: int, seed: int = 0, methods: Sequence[str] = METHODS) -> CommunitySet:
    """Over-cluster ``A`` once per base method and pool the resulting communities."""
    A = check_symmetric(A, "A")
    if n_communities > A.shape[0]:
        raise InvalidParameterError(f"{n_communities} communities for {A.shape[0]} vertices")
    parts = []
    for offset, method in enumerate(methods):
        if method == "classic":
            parts.append(classic_spectral(A, n_communities, seed + offset))
        elif method == "multiclass":
            parts.append(multiclass_spectral(A, n_communities, seed + offset))
        else:
            raise InvalidParameterError(f"unknown over-clustering method {method!r}")
    return CommunitySet.from_partitions(parts, methods)


def _context_terms(A: np.ndarray, comms: CommunitySet, neighbor_set_size: int):
    """``g[i, l] = 1 + mean similarity of i to its nearest co-members in l`` (0 outside l) and weights mu."""
    n = comms.n_vertices
    g = np.zeros((n, len(comms)))
    mu = np.zeros(len(comms))
    for l, members in enumerate(comms.communities):
        r = min(neighbor_set_size, len(members) - 1)
        if r == 0:
            avg = np.zeros(1)
        else:
            sub = A[np.ix_(members, members)].copy()
            np.fill_diagonal(sub, -np.inf)
            avg = np.sort(sub, axis=1)[:, -r:].mean(axis=1)
        g[members, l] = 1.0 + avg
        mu[l] = 0.5 * (1.0 + avg.mean())
    return g, mu


def overclustering_features(A, comms: CommunitySet, neighbor_set_size: int = 3) -> np.ndarray:
    """Row q is ``y_q[l] = sqrt(mu_l I(q, l) g[q, l])``."""
    A = check_symmetric(A, "A")
    g, mu = _context_terms(A, comms, neighbor_set_size)
    return np.sqrt(mu[None, :] * g)


def overclustering_incidence(A, comms: CommunitySet, neighbor_set_size: int = 3) -> HypergraphIncidence:
    A = check_symmetric(A, "A")
    g, mu = _context_terms(A, comms, neighbor_set_size)
    denom = np.sqrt(g @ mu)
    H = np.sqrt(g) / np.where(denom > 0, denom, 1.0)[:, None]
    edges = tuple(tuple(int(v) for v in c) for c in comms.communities)
    return HypergraphIncidence(comms.n_vertices, edges, H, mu)


def overclustering_similarity(A, comms: CommunitySet, neighbor_set_size: int = 3) -> np.ndarray:
    """Over-clustering hypergraph similarity C as the cosine of context vectors."""
    return cosine_similarity(overclustering_features(A, comms, neighbor_set_size))
