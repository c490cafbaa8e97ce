import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import KINDS
from netsplit.community import CommunityAssignment, DyadIndexSets
from netsplit.estimands import (
    Contrast,
    cell_means_B,
    conditional_means_T,
    gamma_zero_limit,
    link_f,
    surrogate_phi,
    taylor_gap_leading,
    theta,
    xi,
)
from netsplit.exceptions import EmptyCellError, ParameterError
from netsplit.network import DIRECTED, UNDIRECTED, EdgeDomain, Network, NetworkKind


# ----------------------------------------------------------------- oracles


def in_J(i, j, kind):
    if not kind.self_loops and i == j:
        return False
    return kind.directed or i <= j


def oracle_cell(i, j, z, kind):
    a, b = z[i], z[j]
    return (a, b) if kind.directed else (min(a, b), max(a, b))


def oracle_B(M, z, K, kind, train=None, s=None):
    n = len(z)
    sums = [[0.0] * K for _ in range(K)]
    cnt = [[0] * K for _ in range(K)]
    for i in range(n):
        for j in range(n):
            if not in_J(i, j, kind):
                continue
            if s is not None and train[i][j] != s:
                continue
            k, l = oracle_cell(i, j, z, kind)
            sums[k][l] += M[i][j]
            cnt[k][l] += 1
    return sums, cnt


def oracle_T(m, t, g):
    # Bayes rule: P(A=1 | tr=t) with tr = A xor W, W ~ Bern(g)
    p1 = m * ((1 - g) if t == 1 else g)
    p0 = (1 - m) * (g if t == 1 else (1 - g))
    return p1 / (p1 + p0)


def oracle_phi(M, train, z, K, kind, g, k, l):
    n = len(z)
    T = {0: [], 1: []}
    for i in range(n):
        for j in range(n):
            if in_J(i, j, kind) and oracle_cell(i, j, z, kind) == (k, l):
                T[train[i][j]].append(oracle_T(M[i][j], train[i][j], g))
    total = len(T[0]) + len(T[1])
    v0 = sum(T[0]) / len(T[0])
    v1 = sum(T[1]) / len(T[1])
    odds = (1 - g) / g

    def f(a, v):
        return 1 / (1 + math.exp(-(math.log(a / (1 - a)) + math.log(v))))

    return len(T[0]) / total * f(v0, odds) + len(T[1]) / total * f(v1, 1 / odds)


def random_instance(seed, n, K, kind_name, lo=0.05, hi=0.95):
    rng = np.random.default_rng(seed)
    kind = NetworkKind.parse(kind_name)
    M = rng.uniform(lo, hi, size=(n, n))
    if not kind.directed:
        M = np.triu(M) + np.triu(M, 1).T
    labels = rng.integers(0, K, size=n)
    train = Network.from_dyad_values(n, kind, EdgeDomain.BINARY, rng.integers(0, 2, size=kind.n_dyads(n)))
    return M, CommunityAssignment(labels, K), train, kind


# ------------------------------------------------------------------ link f


def test_link_f_identity_and_values():
    for a in (0.01, 0.3, 0.5, 0.99):
        assert link_f(a, 1.0) == pytest.approx(a, abs=1e-15)
    assert link_f(0.5, 3.0) == pytest.approx(0.75, abs=1e-15)
    assert abs(link_f(link_f(0.3, 2.0), 0.5) - 0.3) < 1e-12


@given(a=st.floats(1e-6, 1 - 1e-6), v=st.floats(1e-3, 1e3))
def test_link_f_round_trip(a, v):
    assert abs(link_f(link_f(a, v), 1.0 / v) - a) < 1e-12
    expit = 1 / (1 + math.exp(-(math.log(a / (1 - a)) + math.log(v))))
    assert link_f(a, v) == pytest.approx(expit, rel=1e-12, abs=1e-15)


@pytest.mark.parametrize("a, v", [(0.0, 1.0), (1.0, 2.0), (0.5, 0.0), (0.5, -1.0)])
def test_link_f_domain(a, v):
    with pytest.raises(ParameterError):
        link_f(a, v)


# ---------------------------------------------------------------------- T


def _single(t_value, m=0.5):
    train = Network.from_dyad_values(1, DIRECTED, EdgeDomain.BINARY, [t_value])
    return np.array([[m]]), train


def test_T_hand_values():
    M, tr1 = _single(1)
    _, tr0 = _single(0)
    assert conditional_means_T(M, tr1, 0.25)[0] == pytest.approx(0.75, abs=1e-12)
    assert conditional_means_T(M, tr0, 0.25)[0] == pytest.approx(0.25, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(1, 8), kind=st.sampled_from(KINDS), g=st.floats(0.01, 0.49))
def test_T_matches_bayes_enumeration(seed, n, kind, g):
    M, _, train, kind = random_instance(seed, n, 1, kind, 1e-3, 1 - 1e-3)
    T = conditional_means_T(M, train, g)
    rows, cols = train.dyads
    tv = train.dyad_values()
    for d in range(T.size):
        assert abs(T[d] - oracle_T(M[rows[d], cols[d]], tv[d], g)) < 1e-12
    # one-to-one: mapping back by the inverse odds factor recovers M
    odds = np.where(tv == 1, g / (1 - g), (1 - g) / g)
    assert np.all(np.abs(link_f(T, odds) - M[rows, cols]) < 1e-12)


def test_T_gamma_half_is_M():
    M, _, train, _ = random_instance(1, 6, 1, "directed")
    rows, cols = train.dyads
    assert np.allclose(conditional_means_T(M, train, 0.5), M[rows, cols], atol=1e-15)


def test_T_rejects_bad_means():
    _, train = _single(1)
    with pytest.raises(ParameterError):
        conditional_means_T(np.array([[1.0]]), train, 0.2)


# ---------------------------------------------------------------------- B


def test_B_constant():
    sets = DyadIndexSets(CommunityAssignment([0, 1, 1, 0, 2], 3), DIRECTED)
    B = cell_means_B(np.full((5, 5), 0.37), sets)
    assert np.allclose(B, 0.37, atol=1e-15)


def test_B_singletons():
    sets = DyadIndexSets(CommunityAssignment([0, 1], 2), DIRECTED)
    M = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert np.array_equal(cell_means_B(M, sets), M)


def test_B_empty_cell_error():
    sets = DyadIndexSets(CommunityAssignment([0, 0], 2), DIRECTED)
    with pytest.raises(EmptyCellError) as info:
        cell_means_B(np.ones((2, 2)), sets)
    assert "(1,2)" in str(info.value)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(2, 8), K=st.integers(1, 3), kind=st.sampled_from(KINDS))
def test_B_matches_double_loop(seed, n, K, kind):
    M, assignment, train, kind = random_instance(seed, n, K, kind)
    sets = DyadIndexSets(assignment, kind, train)
    z = assignment.labels.tolist()
    tm = train.matrix.tolist()
    for s in (None, 0, 1):
        sums, cnt = oracle_B(M.tolist(), z, K, kind, tm, s)
        cells = [(k, l) for k in range(K) for l in range(K) if cnt[k][l] > 0]
        B = cell_means_B(M, sets, s=s, cells=cells)
        for k, l in cells:
            assert abs(B[k, l] - sums[k][l] / cnt[k][l]) < 1e-12
            lo = min(M[i, j] for i, j in sets.members(k, l, s))
            hi = max(M[i, j] for i, j in sets.members(k, l, s))
            assert lo - 1e-15 <= B[k, l] <= hi + 1e-15


# ------------------------------------------------------------------ theta


def test_theta_first_cell_and_contrasts():
    M = np.array([[1.0, 2.0], [3.0, 4.0]])
    z = CommunityAssignment([0, 1], 2)
    assert theta(M, z, Contrast.cell(2, 0, 0), DIRECTED) == 1.0
    u = Contrast.from_vec([1 / math.sqrt(2), -1 / math.sqrt(2), 0, 0], 2)
    # column-major: second entry is the cell from community 2 to community 1
    assert theta(M, z, u, DIRECTED) == pytest.approx((1.0 - 3.0) / math.sqrt(2), abs=1e-15)


def test_theta_undirected_separation_contrast():
    rng = np.random.default_rng(4)
    M = rng.uniform(0.1, 0.9, (6, 6))
    M = np.triu(M) + np.triu(M, 1).T
    z = CommunityAssignment([0, 0, 1, 1, 0, 1], 2)
    u = Contrast.from_upper(np.array([1.0, -2.0, 1.0]) / math.sqrt(6), 2)
    sets = DyadIndexSets(z, UNDIRECTED)
    B = cell_means_B(M, sets)
    assert theta(M, z, u, UNDIRECTED) == pytest.approx((B[0, 0] + B[1, 1] - 2 * B[0, 1]) / math.sqrt(6), abs=1e-14)


def test_contrast_validation():
    with pytest.raises(ParameterError):
        Contrast(np.array([[1.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(ParameterError):
        Contrast(np.array([[0.0, 0.0], [1.0, 0.0]]), directed=False)
    with pytest.raises(ParameterError):
        Contrast.normalized(np.zeros((2, 2)))
    with pytest.raises(ParameterError):
        Contrast.cell(2, 0, 0).check_for(3, DIRECTED)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_theta_linear_in_u(seed):
    M, assignment, _, kind = random_instance(seed, 8, 2, "directed")
    rng = np.random.default_rng(seed)
    w1, w2 = rng.normal(size=(2, 2)), rng.normal(size=(2, 2))
    n1, n2 = np.linalg.norm(w1), np.linalg.norm(w2)
    u1, u2 = Contrast(w1 / n1), Contrast(w2 / n2)
    both = w1 / n1 + w2 / n2
    nb = np.linalg.norm(both)
    lhs = theta(M, assignment, Contrast(both / nb), kind)
    rhs = (theta(M, assignment, u1, kind) + theta(M, assignment, u2, kind)) / nb
    assert lhs == pytest.approx(rhs, abs=1e-12)


# -------------------------------------------------------------- Phi and xi


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(3, 8), K=st.integers(1, 2), kind=st.sampled_from(KINDS),
       g=st.floats(0.02, 0.48))
def test_phi_matches_oracle(seed, n, K, kind, g):
    M, assignment, train, kind = random_instance(seed, n, K, kind)
    sets = DyadIndexSets(assignment, kind, train)
    cells = [(k, l) for k in range(K) for l in range(K)
             if sets.exists[k, l] and sets.size(k, l, 0) and sets.size(k, l, 1)]
    if not cells:
        return
    tab = surrogate_phi(M, train, g, sets, cells)
    z, tm = assignment.labels.tolist(), train.matrix.tolist()
    for k, l in cells:
        assert abs(tab.phi[k, l] - oracle_phi(M.tolist(), tm, z, K, kind, g, k, l)) < 1e-12
    # xi through the public entry point
    k, l = cells[0]
    u = Contrast.cell(K, k, l, kind.directed)
    assert abs(xi(M, train, g, assignment, u) - tab.phi[k, l]) < 1e-12


def _fixed_instance():
    M = np.array([[0.2, 0.8, 0.5], [0.4, 0.6, 0.3], [0.7, 0.1, 0.9]])
    train = Network.from_matrix(np.array([[0, 1, 1], [0, 1, 0], [1, 0, 0]]), DIRECTED, EdgeDomain.BINARY)
    return M, train, DyadIndexSets(CommunityAssignment([0, 0, 0], 1), DIRECTED, train)


def test_phi_equals_B_at_gamma_half():
    M, train, sets = _fixed_instance()
    tab = surrogate_phi(M, train, 0.5, sets)
    assert abs(tab.phi[0, 0] - tab.B[0, 0]) < 1e-15


def test_phi_equals_B_when_M_constant_per_split():
    train = Network.from_matrix(np.array([[0, 1, 1], [0, 1, 0], [1, 0, 0]]), DIRECTED, EdgeDomain.BINARY)
    M = np.where(train.matrix == 1, 0.7, 0.2)
    sets = DyadIndexSets(CommunityAssignment([0, 0, 0], 1), DIRECTED, train)
    for g in (0.05, 0.25, 0.45):
        tab = surrogate_phi(M, train, g, sets)
        assert abs(tab.phi[0, 0] - tab.B[0, 0]) < 1e-12
        gap = taylor_gap_leading(M, train, g, sets)
        assert abs(gap.leading[0, 0]) < 1e-12 and abs(gap.exact[0, 0]) < 1e-12


def test_phi_requires_both_train_values():
    train = Network.from_matrix(np.zeros((2, 2), dtype=int), DIRECTED, EdgeDomain.BINARY)
    sets = DyadIndexSets(CommunityAssignment([0, 0], 1), DIRECTED, train)
    with pytest.raises(EmptyCellError):
        surrogate_phi(np.full((2, 2), 0.5), train, 0.2, sets)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6), kind=st.sampled_from(KINDS))
def test_phi_to_B_near_half(seed, kind):
    M, assignment, train, kind = random_instance(seed, 8, 1, kind)
    sets = DyadIndexSets(assignment, kind, train)
    if not (sets.size(0, 0, 0) and sets.size(0, 0, 1)):
        return
    tab = surrogate_phi(M, train, 0.499, sets)
    assert abs(tab.phi[0, 0] - tab.B[0, 0]) < 1e-3
    # convex hull of the T values
    T = conditional_means_T(M, train, 0.499)
    assert T.min() - 1e-15 <= tab.V[0, 0] <= T.max() + 1e-15


def test_phi_closer_than_V_heterogeneous():
    # communities estimated from each train network, M ~ Unif(0,1), gamma = 0.25, 200 fissions
    from netsplit.sim import gap_curves

    row = gap_curves("uniform", n=100, gammas=[0.25], reps=200, seed=1)[0]
    assert row["mean_abs_Phi_gap"] < row["mean_abs_V_gap"]


# ---------------------------------------------------------------- gap term


def test_leading_zero_for_symmetric_heterogeneity():
    # H0 == H1: same spread of M on both train values
    train = Network.from_matrix(np.array([[0, 0], [1, 1]]), DIRECTED, EdgeDomain.BINARY)
    M = np.array([[0.3, 0.5], [0.3, 0.5]])
    sets = DyadIndexSets(CommunityAssignment([0, 0], 1), DIRECTED, train)
    gap = taylor_gap_leading(M, train, 0.3, sets)
    assert gap.H0[0, 0] == pytest.approx(gap.H1[0, 0])
    assert gap.leading[0, 0] == pytest.approx(0.0, abs=1e-15)


def test_leading_term_quadratic_residual():
    rng = np.random.default_rng(11)
    n = 30
    M = rng.uniform(0.1, 0.9, (n, n))
    train = Network.from_matrix((rng.random((n, n)) < 0.5).astype(int), DIRECTED, EdgeDomain.BINARY)
    sets = DyadIndexSets(CommunityAssignment(np.zeros(n, dtype=int), 1), DIRECTED, train)

    def residual(g):
        gap = taylor_gap_leading(M, train, g, sets)
        return abs(gap.exact[0, 0] - gap.leading[0, 0])

    r45, r40 = residual(0.45), residual(0.40)
    ratio = r45 / r40
    d = lambda g: (1 - g / (1 - g)) ** 2
    expected = d(0.45) / d(0.40)
    assert expected / 2 <= ratio <= expected * 2


def test_leading_matches_brute_force_H():
    M, train, sets = _fixed_instance()
    gap = taylor_gap_leading(M, train, 0.2, sets)
    t = train.matrix
    H = {}
    for s in (0, 1):
        vals = [M[i, j] for i in range(3) for j in range(3) if t[i, j] == s]
        mean = sum(vals) / len(vals)
        H[s] = sum((v - mean) ** 2 for v in vals)
    assert gap.H0[0, 0] == pytest.approx(H[0], abs=1e-14)
    assert gap.H1[0, 0] == pytest.approx(H[1], abs=1e-14)
    assert gap.leading[0, 0] == pytest.approx((1 - 0.2 / 0.8) * (H[0] - H[1]) / 9, abs=1e-14)


# ------------------------------------------------------------ gamma -> 0


def _two_by_two(train_row):
    # cell of 4 dyads: first row has train = train_row, second row the other value
    t = np.array([[train_row] * 2, [1 - train_row] * 2])
    train = Network.from_matrix(t, DIRECTED, EdgeDomain.BINARY)
    M = np.array([[0.2, 0.8], [0.5, 0.5]])
    return M, train, DyadIndexSets(CommunityAssignment([0, 0], 1), DIRECTED, train)


def test_gamma_zero_limit_hand_values():
    # I0 = {0.2, 0.8}: arithmetic mean of odds 2.125 -> 0.68
    M, train, sets = _two_by_two(0)
    lam0 = (0.25 + 4.0) / 2
    assert lam0 == 2.125 and lam0 / (1 + lam0) == pytest.approx(0.68)
    lim = gamma_zero_limit(M, train, sets)
    assert lim[0, 0] == pytest.approx(0.5 * 0.68 + 0.5 * 0.5, abs=1e-14)
    # I1 = {0.2, 0.8}: harmonic mean of odds 0.4706 -> 0.32
    M, train, sets = _two_by_two(1)
    lam1 = 2 / (4.0 + 0.25)
    assert lam1 / (1 + lam1) == pytest.approx(0.32)
    lim = gamma_zero_limit(M, train, sets)
    assert lim[0, 0] == pytest.approx(0.5 * 0.32 + 0.5 * 0.5, abs=1e-14)


def test_gamma_zero_limit_constant_equals_B():
    train = Network.from_matrix(np.array([[0, 1], [1, 0]]), DIRECTED, EdgeDomain.BINARY)
    M = np.where(train.matrix == 1, 0.8, 0.3)
    sets = DyadIndexSets(CommunityAssignment([0, 0], 1), DIRECTED, train)
    assert gamma_zero_limit(M, train, sets)[0, 0] == pytest.approx(cell_means_B(M, sets)[0, 0], abs=1e-15)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6), kind=st.sampled_from(KINDS))
def test_phi_continuous_at_gamma_zero(seed, kind):
    M, assignment, train, kind = random_instance(seed, 8, 2, kind)
    sets = DyadIndexSets(assignment, kind, train)
    cells = [(k, l) for k in range(2) for l in range(2)
             if sets.exists[k, l] and sets.size(k, l, 0) and sets.size(k, l, 1)]
    if not cells:
        return
    phi = surrogate_phi(M, train, 1e-4, sets, cells).phi
    lim = gamma_zero_limit(M, train, sets, cells)
    for k, l in cells:
        assert abs(phi[k, l] - lim[k, l]) < 1e-3
