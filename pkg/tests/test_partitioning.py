from itertools import combinations, product

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_similarity, random_spd
from hyperclust import DegenerateGraphError, InvalidInputError, InvalidParameterError, Partition, nmi
from hyperclust.core import laplacian
from hyperclust.partitioning import (
    DegenerateRowError,
    candidate_from_P,
    cluster,
    dhpc_objective,
    discrete_refine,
    generalized_eig,
    lanczos_topk,
    membership_matrix,
    newton_lanczos,
    sym_eig,
    trace_ratio,
)


def blocks(*sizes):
    n = sum(sizes)
    S = np.zeros((n, n))
    start = 0
    for s in sizes:
        S[start:start + s, start:start + s] = 1.0
        start += s
    return S, np.repeat(np.arange(len(sizes)), sizes)


def all_partitions(n, k):
    """Every labeling of n vertices into exactly k nonempty clusters."""
    for labels in product(range(k), repeat=n):
        if len(set(labels)) == k:
            yield Partition.from_labels(np.array(labels), k)


def brute_force_g(labels, S):
    n = len(labels)
    terms = []
    for c in sorted(set(labels)):
        inside = [i for i in range(n) if labels[i] == c]
        outside = [j for j in range(n) if labels[j] != c]
        intra = sum(S[i][j] for i in inside for j in inside)
        cut = sum(S[i][j] for i in inside for j in outside)
        terms.append(intra / cut)
    return sum(terms) / len(terms)


def random_rotation(rng, k):
    Q, R = np.linalg.qr(rng.standard_normal((k, k)))
    return Q * np.sign(np.diag(R))


# -- eigensolvers ------------------------------------------------------------


def test_sym_eig_diagonal():
    vals, V = sym_eig(np.diag([3.0, 2.0, 1.0]), 2)
    assert np.allclose(vals, [3, 2])
    assert np.allclose(np.abs(V), np.eye(3)[:, :2])


def test_sym_eig_identity():
    vals, V = sym_eig(np.eye(5), 3)
    assert np.allclose(vals, 1)
    assert np.allclose(V.T @ V, np.eye(3), atol=1e-12)


@pytest.mark.parametrize("backend", ["dense", "lanczos"])
def test_sym_eig_reconstruction(backend):
    rng = np.random.default_rng(0)
    G = rng.standard_normal((20, 20))
    M = (G + G.T) / 2
    vals, V = sym_eig(M, 20, backend=backend)
    assert np.all(np.diff(vals) <= 0)
    assert np.allclose(V @ np.diag(vals) @ V.T, M, atol=1e-8)


def test_lanczos_matches_dense():
    rng = np.random.default_rng(1)
    for n, k in [(30, 3), (60, 5), (12, 12)]:
        M = random_similarity(rng, n)
        dv, DV = sym_eig(M, k)
        lv, LV = lanczos_topk(M, k)
        assert np.allclose(dv, lv, atol=1e-9)
        assert np.allclose(np.abs(DV.T @ LV), np.eye(k), atol=1e-6)


def test_sym_eig_rejects():
    with pytest.raises(InvalidInputError):
        sym_eig(np.array([[1.0, 2.0], [0.0, 1.0]]), 1)
    with pytest.raises(InvalidParameterError):
        sym_eig(np.eye(3), 4)


def test_generalized_reduces_to_standard():
    S = np.diag([5.0, 1.0, 3.0])
    cand = generalized_eig(S, np.eye(3), 2)
    assert np.allclose(np.abs(cand.P), np.eye(3)[:, [0, 2]])
    assert cand.constraint == "degree"


def test_generalized_block_constant():
    S, truth = blocks(4, 6)
    S = 0.9 * S + 0.01
    cand = generalized_eig(S, np.diag(S.sum(axis=1)), 2)
    Y = np.eye(2)[truth]
    proj = Y @ np.linalg.lstsq(Y, cand.P, rcond=None)[0]
    assert np.allclose(proj, cand.P, atol=1e-10)


def test_generalized_constraint():
    rng = np.random.default_rng(2)
    for _ in range(10):
        S = random_similarity(rng, 15)
        D = np.diag(S.sum(axis=1))
        Z = generalized_eig(S, D, 4).P
        assert np.allclose(Z.T @ D @ Z, np.eye(4), atol=1e-8)
    with pytest.raises(DegenerateGraphError):
        generalized_eig(np.eye(3), np.diag([1.0, 0.0, 1.0]), 2)


# -- trace ratio ---------------------------------------------------------------


def test_trace_ratio_regularized():
    P = np.eye(3)[:, :2]
    assert trace_ratio(P, np.eye(3), np.zeros((3, 3)), 1e-6) == pytest.approx(2 / 2e-6)


def test_newton_diagonal_closed_forms():
    st_ = newton_lanczos(np.diag([4.0, 1.0]), np.eye(2), 1)
    assert st_.rho == pytest.approx(4.0, abs=1e-12)
    assert np.allclose(np.abs(st_.P[:, 0]), [1, 0])
    S, Q = np.diag([6.0, 4.0, 2.0]), np.diag([2.0, 1.0, 2.0])
    st_ = newton_lanczos(S, Q, 2)
    best = max((S[i, i] + S[j, j]) / (Q[i, i] + Q[j, j]) for i, j in combinations(range(3), 2))
    assert best == pytest.approx(10 / 3)
    assert st_.rho == pytest.approx(best, abs=1e-12)
    assert set(np.flatnonzero(np.abs(st_.P).sum(axis=1) > 1e-9)) == {0, 1}


def test_newton_random_spd():
    rng = np.random.default_rng(3)
    for _ in range(10):
        n = int(rng.integers(5, 30))
        S, Q = random_spd(rng, n), random_spd(rng, n)
        st_ = newton_lanczos(S, Q, 3)
        assert st_.converged
        assert np.all(np.diff(st_.history) >= -1e-12)
        assert abs(st_.eig_sum) < 1e-6 * np.linalg.norm(S)
        assert np.allclose(st_.P.T @ st_.P, np.eye(3), atol=1e-8)


def test_newton_lanczos_backend_agrees():
    rng = np.random.default_rng(4)
    S, Q = random_spd(rng, 25), random_spd(rng, 25)
    a = newton_lanczos(S, Q, 3)
    b = newton_lanczos(S, Q, 3, backend="lanczos")
    assert a.rho == pytest.approx(b.rho, rel=1e-9)


def test_relaxation_upper_bound_small():
    rng = np.random.default_rng(5)
    for _ in range(5):
        S = random_similarity(rng, 7)
        Q = laplacian(S)
        rho = newton_lanczos(S, Q, 2).rho
        for p in all_partitions(7, 2):
            P = membership_matrix(p)
            assert rho >= trace_ratio(P, S, Q) - 1e-10


# -- discretization ----------------------------------------------------------


def test_candidate_rows():
    P = np.array([[1.0, 0.0], [0.0, -1.0]])
    assert np.array_equal(candidate_from_P(P), P)
    assert np.allclose(candidate_from_P(np.array([[3.0, 4.0]]) * 7.5), [[0.6, 0.8]])
    P = np.random.default_rng(6).standard_normal((40, 4))
    assert np.allclose(np.linalg.norm(candidate_from_P(P), axis=1), 1, atol=1e-12)
    with pytest.raises(DegenerateRowError) as exc:
        candidate_from_P(np.array([[1.0, 0.0], [0.0, 0.0]]))
    assert exc.value.vertex == 1


def test_refine_fixed_point():
    X = np.eye(3)[[0, 1, 2, 2, 1, 0]]
    ref = discrete_refine(X)
    assert np.array_equal(ref.partition.X, X)
    assert ref.history[0] == pytest.approx(ref.history[-1])


def test_plant_and_recover():
    rng = np.random.default_rng(7)
    for _ in range(20):
        k = int(rng.integers(2, 6))
        labels = np.concatenate([np.arange(k), rng.integers(0, k, 30)])
        X = np.eye(k)[labels]
        ref = discrete_refine(X @ random_rotation(rng, k), seed=int(rng.integers(1000)))
        assert nmi(ref.partition.labels, labels) == 1.0


@given(st.integers(3, 40), st.integers(2, 5), st.integers(0, 2**31))
def test_refine_monotone_and_valid(n, k, seed):
    if k > n:
        k = n
    Xt = candidate_from_P(np.random.default_rng(seed).standard_normal((n, k)) + 1e-3)
    ref = discrete_refine(Xt, seed=seed)
    assert np.all(np.diff(ref.history) >= -1e-12)
    assert np.array_equal(ref.partition.X.sum(axis=1), np.ones(n))
    assert np.all(ref.partition.sizes() > 0)


# -- objective and end-to-end --------------------------------------------------


def test_dhpc_disconnected():
    S, truth = blocks(2, 3)
    val = dhpc_objective(Partition.from_labels(truth), S)
    assert val.disconnected and np.isinf(val.value)


def test_dhpc_all_ones():
    for n in (4, 6, 8):
        labels = np.repeat([0, 1], n // 2)
        assert dhpc_objective(Partition.from_labels(labels), np.ones((n, n))).value == 1.0


def test_dhpc_brute_force_exact():
    rng = np.random.default_rng(8)
    for n in (4, 5, 6):
        S = rng.integers(1, 9, (n, n)) / 8.0  # dyadic entries keep every sum exact
        S = np.triu(S) + np.triu(S, 1).T
        for p in all_partitions(n, 2):
            assert dhpc_objective(p, S).value == brute_force_g(p.labels.tolist(), S.tolist())


@pytest.mark.parametrize("criterion", ["dhpc", "nc"])
def test_cluster_blocks(criterion):
    S, truth = blocks(5, 3, 4)
    S = S + 1e-3
    res = cluster(S, 3, criterion=criterion)
    assert nmi(res.labels, truth) == 1.0
    assert res.converged


@pytest.mark.parametrize("criterion", ["dhpc", "nc"])
def test_cluster_scale_invariant(criterion):
    rng = np.random.default_rng(9)
    S = random_similarity(rng, 20)
    a = cluster(S, 3, criterion=criterion, seed=1)
    b = cluster(3.5 * S, 3, criterion=criterion, seed=1)
    assert np.array_equal(a.labels, b.labels)


def test_cluster_unknown_criterion():
    with pytest.raises(InvalidParameterError):
        cluster(np.eye(3) + 0.1, 2, criterion="ratio")
