import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import KINDS
from netsplit.community import (
    CommunityAssignment,
    DyadIndexSets,
    SpectralCommunities,
    adjusted_rand_index,
    kmeans,
    spectral_clustering,
)
from netsplit.exceptions import DegenerateClusteringError, EmptyCellError, ParameterError
from netsplit.network import DIRECTED, UNDIRECTED, EdgeDomain, Network, NetworkKind
from netsplit.sim import SbmConfig, sample_network, sbm_mean_matrix


def brute_ari(a, b):
    """Pair-counting oracle over all unordered node pairs."""
    n = len(a)
    pairs = list(itertools.combinations(range(n), 2))
    ss = sum(1 for i, j in pairs if a[i] == a[j] and b[i] == b[j])
    sa = sum(1 for i, j in pairs if a[i] == a[j])
    sb = sum(1 for i, j in pairs if b[i] == b[j])
    total = len(pairs)
    expected = sa * sb / total
    maximum = (sa + sb) / 2
    if maximum == expected:
        return 1.0
    return (ss - expected) / (maximum - expected)


# --------------------------------------------------------------------- ARI


def test_ari_hand_value():
    assert adjusted_rand_index([1, 1, 2, 2], [1, 2, 1, 2]) == pytest.approx(-0.5, abs=1e-15)
    assert brute_ari([1, 1, 2, 2], [1, 2, 1, 2]) == pytest.approx(-0.5)


def test_ari_identical_and_renamed():
    z = [0, 0, 1, 2, 2, 1, 0]
    assert adjusted_rand_index(z, z) == 1.0
    renamed = [{0: 5, 1: 3, 2: 9}[x] for x in z]
    assert adjusted_rand_index(z, renamed) == pytest.approx(1.0)


def test_ari_length_mismatch():
    with pytest.raises(ValueError):
        adjusted_rand_index([0, 1], [0, 1, 1])


@settings(max_examples=100, deadline=None)
@given(data=st.data(), n=st.integers(2, 12))
def test_ari_matches_pair_counting(data, n):
    a = data.draw(st.lists(st.integers(0, 3), min_size=n, max_size=n))
    b = data.draw(st.lists(st.integers(0, 3), min_size=n, max_size=n))
    got = adjusted_rand_index(a, b)
    assert got == pytest.approx(brute_ari(a, b), abs=1e-12)
    assert got == pytest.approx(adjusted_rand_index(b, a), abs=1e-12)
    assert -1.0 <= got <= 1.0 + 1e-12


@settings(max_examples=50, deadline=None)
@given(data=st.data(), n=st.integers(2, 12))
def test_ari_rename_invariance(data, n):
    a = data.draw(st.lists(st.integers(0, 3), min_size=n, max_size=n))
    b = data.draw(st.lists(st.integers(0, 3), min_size=n, max_size=n))
    perm = data.draw(st.permutations([0, 1, 2, 3]))
    a2 = [perm[x] for x in a]
    assert adjusted_rand_index(a2, b) == pytest.approx(adjusted_rand_index(a, b), abs=1e-12)


# ---------------------------------------------------------------- dyad sets


def test_singleton_cells_directed():
    sets = DyadIndexSets(CommunityAssignment([0, 1], 2), DIRECTED)
    assert sets.members(0, 0) == [(0, 0)]
    assert sets.members(0, 1) == [(0, 1)]
    assert sets.members(1, 0) == [(1, 0)]
    assert sets.members(1, 1) == [(1, 1)]


def test_single_community_undirected_is_J():
    sets = DyadIndexSets(CommunityAssignment([0, 0, 0], 1), UNDIRECTED)
    assert sets.members(0, 0) == [(0, 1), (0, 2), (1, 2)]


def test_all_zero_train_split():
    assignment = CommunityAssignment([0, 1, 1, 0], 2)
    train = Network.from_dyad_values(4, DIRECTED, EdgeDomain.BINARY, np.zeros(16, dtype=int))
    sets = DyadIndexSets(assignment, DIRECTED, train)
    assert np.array_equal(sets.counts(0), sets.sizes)
    assert not sets.counts(1).any()
    with pytest.raises(EmptyCellError) as info:
        sets.require([(0, 1)], 1)
    assert info.value.cell == (0, 1) and "(1,2)" in str(info.value)


def test_undirected_lower_cells_do_not_exist():
    sets = DyadIndexSets(CommunityAssignment([0, 1, 1], 2), UNDIRECTED)
    assert np.isnan(sets.cell_means(np.ones(3))[1, 0])
    with pytest.raises(ParameterError):
        sets.require([(1, 0)])


@settings(max_examples=60, deadline=None)
@given(data=st.data(), n=st.integers(1, 9), K=st.integers(1, 4), kind=st.sampled_from(KINDS))
def test_cells_partition_J(data, n, K, kind):
    kind = NetworkKind.parse(kind)
    labels = data.draw(st.lists(st.integers(0, K - 1), min_size=n, max_size=n))
    train_vals = data.draw(st.lists(st.integers(0, 1), min_size=kind.n_dyads(n), max_size=kind.n_dyads(n)))
    assignment = CommunityAssignment(labels, K)
    train = Network.from_dyad_values(n, kind, EdgeDomain.BINARY, train_vals)
    sets = DyadIndexSets(assignment, kind, train)
    seen = []
    for k in range(K):
        for l in range(K):
            cell = sets.members(k, l)
            if not kind.directed and k > l:
                assert cell == []
            for i, j in cell:
                zi, zj = labels[i], labels[j]
                if kind.directed:
                    assert (zi, zj) == (k, l)
                else:
                    assert (min(zi, zj), max(zi, zj)) == (k, l)
            s0, s1 = sets.members(k, l, 0), sets.members(k, l, 1)
            assert sorted(s0 + s1) == sorted(cell)
            assert not set(s0) & set(s1)
            assert sets.size(k, l, 0) + sets.size(k, l, 1) == sets.size(k, l)
            seen.extend(cell)
    assert sorted(seen) == sorted(zip(*[a.tolist() for a in train.dyads]))
    assert sets.sizes.sum() == kind.n_dyads(n)


# --------------------------------------------------------------- clustering


def test_k1_all_one_label():
    A = Network.from_matrix(np.random.default_rng(0).random((6, 6)), DIRECTED)
    assert spectral_clustering(A, 1).labels.tolist() == [0] * 6


def test_invalid_k():
    A = Network.from_matrix(np.eye(3), DIRECTED)
    with pytest.raises(ParameterError):
        spectral_clustering(A, 0)
    with pytest.raises(ParameterError):
        spectral_clustering(A, 4)


def test_planted_partition_recovered():
    config = SbmConfig(100, 2, 30.0, 5.0, model="poisson")
    M, truth = sbm_mean_matrix(config)
    perfect = 0
    for seed in range(100):
        A = sample_network(M, "poisson", DIRECTED, seed=seed)
        z = spectral_clustering(A, 2, restarts=5, seed=seed)
        perfect += adjusted_rand_index(z.labels, truth) == 1.0
    assert perfect >= 95


def test_determinism_and_canonical_labels():
    M, _ = sbm_mean_matrix(SbmConfig(60, 3, 30.0, 25.0, model="gaussian", tau2=25.0))
    A = sample_network(M, "gaussian", DIRECTED, seed=1, tau2=25.0)
    z1 = spectral_clustering(A, 3, seed=4)
    z2 = spectral_clustering(A, 3, seed=4)
    assert np.array_equal(z1.labels, z2.labels)
    assert z1.labels[0] == 0
    firsts = [int(np.argmax(z1.labels == k)) for k in range(3)]
    assert firsts == sorted(firsts)


def test_permutation_equivariance():
    M, truth = sbm_mean_matrix(SbmConfig(60, 3, 30.0, 10.0, model="poisson"))
    A = sample_network(M, "poisson", DIRECTED, seed=2)
    perm = np.random.default_rng(3).permutation(60)
    Ap = Network.from_matrix(A.matrix[np.ix_(perm, perm)], DIRECTED, EdgeDomain.COUNT)
    z = spectral_clustering(A, 3, seed=0).labels
    zp = spectral_clustering(Ap, 3, seed=0).labels
    assert adjusted_rand_index(z[perm], zp) == 1.0


def test_degenerate_clustering_raises():
    # three identical points cannot fill three clusters
    X = np.zeros((3, 1))
    with pytest.raises(DegenerateClusteringError):
        kmeans(X, 3, restarts=2, seed=0)


def test_estimator_api():
    M, truth = sbm_mean_matrix(SbmConfig(40, 2, 30.0, 5.0, model="poisson"))
    A = sample_network(M, "poisson", DIRECTED, seed=0)
    est = SpectralCommunities(n_communities=2, random_state=1)
    assert est.get_params()["n_communities"] == 2
    labels = est.fit_predict(A.matrix)
    assert adjusted_rand_index(labels, truth) == 1.0
    assert est.set_params(restarts=3).restarts == 3
