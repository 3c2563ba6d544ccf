"""kNN hypergraph: one hyperedge per vertex holding the vertex and its k nearest neighbours."""
from __future__ import annotations

import numpy as np

from .core import (
    HypergraphIncidence,
    InvalidParameterError,
    NumericalError,
    check_symmetric,
    cosine_similarity,
)


def nearest_neighbors(A, k: int) -> np.ndarray:
    """Indices of the ``k`` most similar other vertices per row, ties to the lower index."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if not 1 <= k < n:
        raise InvalidParameterError(f"need 1 <= k < N, got k={k}, N={n}")
    M = A.copy()
    np.fill_diagonal(M, -np.inf)
    return np.argsort(-M, axis=1, kind="stable")[:, :k]


def knn_hyperedges(A, k: int) -> HypergraphIncidence:
    """Hyperedge structure with cohesion weights; incidence is the 0/1 membership."""
    A = check_symmetric(A, "A")
    n = A.shape[0]
    nbrs = nearest_neighbors(A, k)
    members = np.concatenate([np.arange(n)[:, None], nbrs], axis=1)  # row l = e_l
    delta = np.take_along_axis(A, members, axis=1).mean(axis=1)
    member = np.zeros((n, n))
    member[members.ravel(), np.repeat(np.arange(n), k + 1)] = 1.0
    edges = tuple(tuple(int(v) for v in row) for row in members)
    return HypergraphIncidence(n, edges, member, delta)


def knn_features(A, edges: HypergraphIncidence) -> np.ndarray:
    """Row m is the vertex-to-hyperedge vector ``x_m[l] = a_lm sqrt(I(m, l) delta_l)``."""
    A = np.asarray(A, dtype=float)
    member = (edges.incidence > 0).astype(float)
    # A is symmetric, so a_{l m} = A[m, l]
    return A * member * np.sqrt(edges.weights)[None, :]


def knn_incidence(A, edges: HypergraphIncidence) -> HypergraphIncidence:
    """Soft incidence ``h(i, l) = a_li I(i, l) / sqrt(sum_t delta_t I(i, t) a_ti^2)``."""
    A = check_symmetric(A, "A")
    member = (edges.incidence > 0).astype(float)
    denom = np.sqrt((member * A**2) @ edges.weights)
    if np.any(denom <= 0):
        bad = int(np.flatnonzero(denom <= 0)[0])
        raise NumericalError(f"vertex {bad} has no weighted hyperedge membership")
    H = A * member / denom[:, None]
    return HypergraphIncidence(edges.n_vertices, edges.hyperedges, H, edges.weights)


def knn_similarity(A, k: int = 3) -> np.ndarray:
    """kNN hypergraph similarity B, computed as the cosine of vertex-to-hyperedge vectors."""
    edges = knn_hyperedges(A, k)
    return cosine_similarity(knn_features(A, edges))
