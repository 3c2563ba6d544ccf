"""Discriminative trace-ratio partitioning and the normalized-cut baseline.

The continuous problem ``max tr(P^T S P) / tr(P^T Q P)`` over orthonormal
``P`` is solved by the Newton iteration on the ratio: given ``rho``, take the
top eigenvectors of ``S - rho Q``, recompute ``rho``, repeat.  The continuous
solution is row-normalized and discretized by alternating argmax assignment
and orthogonal Procrustes rotation.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.optimize import linear_sum_assignment

from .core import (
    ConvergenceWarning,
    DegenerateGraphError,
    InvalidInputError,
    InvalidParameterError,
    NumericalError,
    Partition,
    PartitionCandidate,
    check_symmetric,
    degree_matrix,
    laplacian,
    symmetrize,
)


class DegenerateRowError(NumericalError):
    def __init__(self, vertex: int):
        super().__init__(f"row {vertex} of the membership matrix is (numerically) zero")
        self.vertex = vertex


# ---------------------------------------------------------------------------
# eigensolvers


def fix_signs(V: np.ndarray) -> np.ndarray:
    """Flip each column so its largest-magnitude entry is positive."""
    V = np.array(V, dtype=float, copy=True)
    if V.size == 0:
        return V
    idx = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[idx, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return V * signs


def _dense_topk(M: np.ndarray, k: int):
    n = M.shape[0]
    vals, vecs = scipy.linalg.eigh(M, subset_by_index=[n - k, n - 1])
    return vals[::-1], vecs[:, ::-1]


def lanczos_topk(M, k: int, *, tol: float = 1e-10, seed: int = 0, check_every: int = 10):
    """Top-``k`` eigenpairs of symmetric ``M`` by Lanczos with full reorthogonalization.

    Stops once every wanted Ritz pair has residual below ``tol * ||M||_F``;
    at ``N`` steps the tridiagonalization is complete, so the result is exact
    up to rounding.
    """
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    rng = np.random.default_rng(seed)
    scale = max(np.linalg.norm(M), np.finfo(float).tiny)
    V = np.zeros((n, n))
    alpha = np.zeros(n)
    beta = np.zeros(n)

    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    for j in range(n):
        V[:, j] = v
        w = M @ v
        alpha[j] = v @ w
        basis = V[:, : j + 1]
        for _ in range(2):  # classical Gram-Schmidt, twice
            w -= basis @ (basis.T @ w)
        b = np.linalg.norm(w)
        steps = j + 1
        if steps >= k and (steps % check_every == 0 or steps == n or b <= 1e-12 * scale):
            T = np.diag(alpha[:steps]) + np.diag(beta[: steps - 1], 1) + np.diag(beta[: steps - 1], -1)
            theta, s = np.linalg.eigh(T)
            theta, s = theta[::-1][:k], s[:, ::-1][:, :k]
            X = basis @ s
            resid = np.linalg.norm(M @ X - X * theta, axis=0)
            if steps == n or np.all(resid <= tol * scale):
                return theta, X
        if steps == n:
            break
        if b <= 1e-12 * scale:
            # invariant subspace found: continue from a fresh direction
            w = rng.standard_normal(n)
            for _ in range(2):
                w -= basis @ (basis.T @ w)
            b_new = np.linalg.norm(w)
            beta[j] = 0.0
            v = w / b_new
        else:
            beta[j] = b
            v = w / b
    raise NumericalError("Lanczos iteration failed to produce eigenpairs")  # pragma: no cover


def sym_eig(M, top_k: int, *, backend: str = "dense", seed: int = 0):
    """Largest ``top_k`` eigenvalues (descending) and orthonormal eigenvectors of symmetric ``M``."""
    M = check_symmetric(M, "M", atol=1e-12)
    n = M.shape[0]
    if not 1 <= top_k <= n:
        raise InvalidParameterError(f"top_k must be in [1, {n}], got {top_k}")
    if backend == "dense":
        vals, vecs = _dense_topk(M, top_k)
    elif backend == "lanczos":
        vals, vecs = lanczos_topk(M, top_k, seed=seed)
    else:
        raise InvalidParameterError(f"unknown eigensolver backend {backend!r}")
    return vals, fix_signs(vecs)


def generalized_eig(S, D, top_k: int, *, backend: str = "dense") -> PartitionCandidate:
    """Top generalized eigenvectors of ``(S, D)`` for diagonal positive ``D``, normalized so ``Z^T D Z = I``."""
    S = check_symmetric(S, "S")
    d = np.diag(np.asarray(D, dtype=float)).copy()
    if np.any(d <= 0):
        bad = int(np.flatnonzero(d <= 0)[0])
        raise DegenerateGraphError(f"vertex {bad} has nonpositive degree")
    inv_sqrt = 1.0 / np.sqrt(d)
    N = symmetrize(S * inv_sqrt[:, None] * inv_sqrt[None, :])
    vals, V = sym_eig(N, top_k, backend=backend)
    Z = V * inv_sqrt[:, None]
    return PartitionCandidate(Z, float(vals.sum() / top_k), 0, constraint="degree")


# ---------------------------------------------------------------------------
# trace ratio


ROUNDING_SLACK = 1e-12  # tolerated decrease of rho between accepted iterates


def trace_ratio(P, S, Q, epsilon: float = 0.0) -> float:
    """``tr(P^T S P) / tr(P^T Q P)``; the denominator gains ``epsilon * K`` when below ``epsilon``."""
    num = float(np.einsum("ij,ij->", P, S @ P))
    den = float(np.einsum("ij,ij->", P, Q @ P))
    if den < epsilon:
        den += epsilon * P.shape[1]
    if den == 0:
        return np.inf if num > 0 else 0.0
    return num / den


@dataclass
class TraceRatioState:
    rho: float
    candidate: PartitionCandidate
    history: list = field(default_factory=list)
    converged: bool = False
    eig_sum: float = np.nan  # sum of the top eigenvalues of S - rho Q at the last step

    @property
    def P(self) -> np.ndarray:
        return self.candidate.P

    @property
    def iterations(self) -> int:
        return self.candidate.iterations


def newton_lanczos(
    S,
    Q,
    kappa: int,
    *,
    epsilon: float = 1e-6,
    tol: float = 1e-8,
    max_iter: int = 100,
    backend: str = "dense",
    callback=None,
) -> TraceRatioState:
    """Maximize ``tr(P^T S P) / tr(P^T Q P)`` subject to ``P^T P = I``.

    ``callback(iteration, P, rho)`` sees every accepted iterate, the start included.
    """
    S = check_symmetric(S, "S")
    Q = check_symmetric(Q, "Q")
    n = S.shape[0]
    if Q.shape != S.shape:
        raise InvalidInputError("S and Q must have the same shape")
    if not 1 <= kappa <= n:
        raise InvalidParameterError(f"kappa must be in [1, {n}]")

    # start from the principal eigenvectors of (Q + eps I)^{-1} S
    _, W = scipy.linalg.eigh(S, Q + epsilon * np.eye(n), subset_by_index=[n - kappa, n - 1])
    P, _ = np.linalg.qr(W[:, ::-1])
    P = fix_signs(P)
    rho = trace_ratio(P, S, Q, epsilon)
    history = [rho]
    if callback is not None:
        callback(0, P, rho)
    converged = False
    eig_sum = np.nan
    it = 0
    while it < max_iter:
        it += 1
        vals, P_new = sym_eig(S - rho * Q, kappa, backend=backend)
        eig_sum = float(vals.sum())
        rho_new = trace_ratio(P_new, S, Q, epsilon)
        if rho_new < rho - ROUNDING_SLACK:
            # rounding floor reached; the current iterate is already optimal
            converged = True
            break
        step = abs(rho_new - rho)
        P, rho = P_new, rho_new
        history.append(rho)
        if callback is not None:
            callback(it, P, rho)
        if step <= tol * max(1.0, abs(rho)):
            converged = True
            break
    if not converged:
        warnings.warn(
            f"trace-ratio iteration hit max_iter={max_iter} (rho={rho:.6g})", ConvergenceWarning, stacklevel=2
        )
    cand = PartitionCandidate(P, rho, it)
    return TraceRatioState(rho, cand, history, converged, eig_sum)


def membership_matrix(partition: Partition) -> np.ndarray:
    """``X (X^T X)^{-1/2}``: orthonormal when no cluster is empty."""
    X = partition.X.astype(float)
    sizes = X.sum(axis=0)
    with np.errstate(divide="ignore"):
        scale = np.where(sizes > 0, 1.0 / np.sqrt(sizes), 0.0)
    return X * scale


# ---------------------------------------------------------------------------
# discretization


def candidate_from_P(P) -> np.ndarray:
    """Scale each row of ``P`` to unit length."""
    P = np.asarray(P, dtype=float)
    norms = np.linalg.norm(P, axis=1)
    small = np.flatnonzero(norms < 1e-12)
    if small.size:
        raise DegenerateRowError(int(small[0]))
    return P / norms[:, None]


@dataclass
class Refinement:
    partition: Partition
    history: list
    converged: bool

    @property
    def iterations(self) -> int:
        return len(self.history)


def _initial_rotation(Xt: np.ndarray, rng) -> np.ndarray:
    n, k = Xt.shape
    R = np.zeros((k, k))
    R[:, 0] = Xt[rng.integers(n)]
    c = np.zeros(n)
    for j in range(1, k):
        c += np.abs(Xt @ R[:, j - 1])
        R[:, j] = Xt[np.argmin(c)]
    U, _, Vt = np.linalg.svd(R)
    return U @ Vt


def _fill_empty(labels: np.ndarray, scores: np.ndarray) -> np.ndarray:
    labels = labels.copy()
    n, k = scores.shape
    while True:
        counts = np.bincount(labels, minlength=k)
        empty = np.flatnonzero(counts == 0)
        if empty.size == 0:
            return labels
        c = empty[0]
        movable = counts[labels] > 1
        margin = scores[np.arange(n), labels] - scores[:, c]
        margin[~movable] = np.inf
        labels[np.argmin(margin)] = c


def discrete_refine(Xtilde, *, max_iter: int = 100, tol: float = 1e-10, seed: int = 0) -> Refinement:
    """Nearest discrete partition to the rows of ``Xtilde`` up to an orthogonal rotation."""
    Xt = np.asarray(Xtilde, dtype=float)
    n, k = Xt.shape
    if k > n:
        raise InvalidParameterError("more clusters than rows")
    rng = np.random.default_rng(seed)
    R = _initial_rotation(Xt, rng)
    history = []
    converged = False
    labels = None
    for _ in range(max_iter):
        labels = np.argmax(Xt @ R, axis=1)
        X = np.zeros((n, k))
        X[np.arange(n), labels] = 1.0
        U, s, Vt = np.linalg.svd(Xt.T @ X)
        phi = float(s.sum())
        R = U @ Vt
        if history and abs(phi - history[-1]) < tol:
            history.append(phi)
            converged = True
            break
        history.append(phi)
    if not converged:
        warnings.warn("discretization hit max_iter without converging", ConvergenceWarning, stacklevel=2)

    labels = _fill_empty(labels, Xt @ R)
    X = np.zeros((n, k))
    X[np.arange(n), labels] = 1.0
    # order output columns to line up with the candidate's columns
    _, perm = linear_sum_assignment(-(X.T @ Xt))
    X = X[:, np.argsort(perm)]
    return Refinement(Partition(X.astype(np.int8)), history, converged)


# ---------------------------------------------------------------------------
# objectives and the end-to-end partitioner


@dataclass
class DhpcValue:
    value: float
    terms: np.ndarray
    disconnected: bool


def dhpc_objective(partition: Partition, S, Q=None) -> DhpcValue:
    """Mean over clusters of intra-cluster mass divided by cut mass.

    A cluster with zero cut contributes ``inf`` and sets ``disconnected``;
    an empty cluster contributes 0.
    """
    S = check_symmetric(S, "S")
    if Q is None:
        Q = laplacian(S)
    X = partition.X.astype(float)
    intra = np.einsum("in,ij,jn->n", X, S, X)
    cut = np.einsum("in,ij,jn->n", X, Q, X)
    terms = np.zeros(X.shape[1])
    disconnected = False
    for n_, (a, c) in enumerate(zip(intra, cut)):
        if X[:, n_].sum() == 0:
            continue
        if c <= 0:
            terms[n_] = np.inf
            disconnected = True
        else:
            terms[n_] = a / c
    return DhpcValue(float(terms.mean()), terms, disconnected)


@dataclass
class ClusterResult:
    partition: Partition
    criterion: str
    objective: float  # rho for dhpc, h(Z) for nc
    iterations: int
    converged: bool
    refine_iterations: int

    @property
    def labels(self) -> np.ndarray:
        return self.partition.labels


def cluster(
    S,
    kappa: int,
    *,
    criterion: str = "dhpc",
    epsilon: float = 1e-6,
    seed: int = 0,
    tol: float = 1e-8,
    max_iter: int = 100,
    backend: str = "dense",
) -> ClusterResult:
    """Partition a similarity matrix into ``kappa`` clusters.

    ``criterion="dhpc"`` runs the trace-ratio solver on ``(S, D - S)``;
    ``criterion="nc"`` uses the normalized-cut generalized eigenvectors.
    Both share the same discretization.
    """
    S = check_symmetric(S, "S")
    criterion = criterion.lower()
    if criterion == "dhpc":
        state = newton_lanczos(S, laplacian(S), kappa, epsilon=epsilon, tol=tol, max_iter=max_iter, backend=backend)
        P, objective, iters, converged = state.P, state.rho, state.iterations, state.converged
    elif criterion == "nc":
        cand = generalized_eig(S, degree_matrix(S), kappa, backend=backend)
        P, objective, iters, converged = cand.P, cand.rho, 0, True
    else:
        raise InvalidParameterError(f"unknown criterion {criterion!r}")
    ref = discrete_refine(candidate_from_P(P), seed=seed)
    return ClusterResult(ref.partition, criterion, objective, iters, converged and ref.converged, ref.iterations)
