import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_similarity
from hyperclust import InvalidParameterError, Partition, load_csv, nmi, synth_blobs
from hyperclust.overclustering import (
    CommunitySet,
    build_communities,
    classic_spectral,
    kmeans,
    multiclass_spectral,
    overclustering_features,
    overclustering_incidence,
    overclustering_similarity,
)
from hyperclust.pairwise import default_sigma, pairwise_similarity
from hyperclust.partitioning import cluster


def blocks(*sizes):
    n = sum(sizes)
    S = np.zeros((n, n))
    start = 0
    for s in sizes:
        S[start:start + s, start:start + s] = 1.0
        start += s
    return S, np.repeat(np.arange(len(sizes)), sizes)


def explicit_context(A, comms, r):
    """g and mu written out per vertex and community."""
    n, L = comms.n_vertices, len(comms)
    g = np.zeros((n, L))
    mu = np.zeros(L)
    for l, members in enumerate(comms.communities):
        avgs = []
        for i in members:
            sims = sorted((A[i, j] for j in members if j != i), reverse=True)[:r]
            avg = sum(sims) / len(sims) if sims else 0.0
            g[i, l] = 1 + avg
            avgs.append(avg)
        mu[l] = 0.5 * (1 + sum(avgs) / len(avgs))
    return g, mu


def random_communities(rng, n, per_method):
    parts = [Partition.from_labels(rng.permutation(np.arange(n) % per_method)) for _ in range(2)]
    return CommunitySet.from_partitions(parts, ("classic", "multiclass"))


def test_kmeans_kappa_equals_n():
    X = np.random.default_rng(0).standard_normal((6, 2))
    res = kmeans(X, 6)
    assert sorted(res.labels.tolist()) == list(range(6))
    assert res.inertia == pytest.approx(0.0, abs=1e-20)


def test_kmeans_separated_pairs():
    X = np.array([[0.0, 0.0], [0.1, 0.0], [10.0, 10.0], [10.1, 10.0]])
    for seed in range(10):
        lab = kmeans(X, 2, seed).labels
        assert lab[0] == lab[1] != lab[2] == lab[3]


def test_kmeans_blobs():
    ds = synth_blobs(3, 10, 2, 12.0, seed=4)
    assert nmi(kmeans(ds.features, 3, 0, n_init=10).labels, ds.labels) == 1.0


def test_classic_spectral_blocks_and_identity():
    S, truth = blocks(4, 5)
    assert nmi(classic_spectral(S, 2).labels, truth) == 1.0
    p = classic_spectral(np.eye(6), 2)
    assert p.X.shape == (6, 2) and np.all(p.X.sum(axis=1) == 1)


def test_spectral_on_blobs():
    ds = synth_blobs(3, 30, 2, 8.0, seed=1)
    A = pairwise_similarity(ds, 1.5)
    assert nmi(classic_spectral(A, 3).labels, ds.labels) >= 0.95
    assert nmi(multiclass_spectral(A, 3).labels, ds.labels) >= 0.95


def test_multiclass_blocks_and_diagonal():
    S, truth = blocks(3, 4)
    assert nmi(multiclass_spectral(S, 2).labels, truth) == 1.0
    D = np.diag([1.0, 2.0, 3.0, 4.0])
    res = cluster(D, 4, criterion="nc")
    assert sorted(res.labels.tolist()) == [0, 1, 2, 3]
    assert res.objective == pytest.approx(1.0, abs=1e-12)


def test_community_counts(iris_path):
    ds = load_csv(iris_path)
    A = pairwise_similarity(ds, default_sigma(ds))
    comms = build_communities(A, 6, seed=0)
    assert len(comms) == 12
    assert np.array_equal(comms.membership().sum(axis=1), np.full(150, 2))
    single = build_communities(A, 5, seed=0, methods=("classic",))
    assert len(single) == 5
    with pytest.raises(InvalidParameterError):
        build_communities(A, 151)
    with pytest.raises(InvalidParameterError):
        build_communities(A, 3, methods=("dbscan",))


def test_unit_similarities_give_unit_mu():
    comms = random_communities(np.random.default_rng(0), 8, 3)
    inc = overclustering_incidence(np.ones((8, 8)), comms)
    assert np.allclose(inc.weights, 1.0, atol=0)


def test_single_membership_incidence():
    A = random_similarity(np.random.default_rng(1), 6)
    comms = CommunitySet.from_partitions([Partition.from_labels([0, 0, 1, 1, 1, 2])], ("classic",))
    inc = overclustering_incidence(A, comms)
    for i, l in enumerate([0, 0, 1, 1, 1, 2]):
        assert inc.incidence[i, l] == pytest.approx(1 / np.sqrt(inc.weights[l]), abs=1e-14)


def test_context_terms_against_explicit():
    rng = np.random.default_rng(2)
    A = random_similarity(rng, 10)
    comms = random_communities(rng, 10, 4)
    g, mu = explicit_context(A, comms, 3)
    assert np.allclose(overclustering_features(A, comms), np.sqrt(mu[None, :] * g), atol=1e-15)
    assert np.allclose(overclustering_incidence(A, comms).weights, mu, atol=1e-15)


def test_dual_path_random_eight():
    rng = np.random.default_rng(3)
    for _ in range(10):
        A = random_similarity(rng, 8)
        comms = random_communities(rng, 8, 4)
        inc = overclustering_incidence(A, comms)
        C = overclustering_similarity(A, comms)
        assert np.allclose(inc.similarity(), C, rtol=0, atol=1e-12)
        assert np.allclose(inc.normalization(), 1.0, rtol=0, atol=1e-9)


def test_disjoint_memberships_give_zero():
    A = random_similarity(np.random.default_rng(4), 4)
    comms = CommunitySet.from_partitions([Partition.from_labels([0, 0, 1, 1])], ("classic",))
    C = overclustering_similarity(A, comms)
    assert C[0, 2] == C[1, 3] == 0


def test_identical_partitions_block_constant():
    S, truth = blocks(3, 3)
    A = 0.5 * S + 0.5 * np.eye(6)
    A[S == 1] = 0.7
    np.fill_diagonal(A, 1.0)
    p = Partition.from_labels(truth)
    comms = CommunitySet.from_partitions([p, p], ("classic", "multiclass"))
    C = overclustering_similarity(A, comms)
    assert np.allclose(C, S, atol=1e-12)


@given(st.integers(4, 30), st.integers(0, 2**31), st.data())
def test_similarity_invariants(n, seed, data):
    per = data.draw(st.integers(1, n))
    rng = np.random.default_rng(seed)
    A = random_similarity(rng, n)
    comms = random_communities(rng, n, per)
    C = overclustering_similarity(A, comms)
    mu = overclustering_incidence(A, comms).weights
    assert np.max(np.abs(C - C.T)) == 0
    assert np.allclose(np.diag(C), 1.0, atol=1e-12)
    assert C.min() >= 0 and C.max() <= 1
    assert np.all(mu >= 0.5) and np.all(mu <= 1)
    assert np.all(mu[[len(c) > 1 for c in comms.communities]] > 0.5)
