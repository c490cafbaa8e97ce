"""Community estimation and dyad bookkeeping.

Labels are 0-based in memory (``0..K-1``) and written 1-based to files.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg
from scipy.sparse.linalg import eigsh
from sklearn.base import BaseEstimator, ClusterMixin

from ._rng import Stream
from .exceptions import DegenerateClusteringError, EmptyCellError, ParameterError
from .network import Network, NetworkKind, dyad_arrays
from .validation import check_labels, check_network

# Beyond this size the dense eigensolver is replaced by Lanczos.
DENSE_EIGEN_MAX = 2000


@dataclass(frozen=True, eq=False)
class CommunityAssignment:
    labels: np.ndarray
    K: int

    def __post_init__(self):
        labels = check_labels(self.labels, self.K)
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.labels.size

    @property
    def membership(self) -> np.ndarray:
        """The ``n x K`` 0/1 membership matrix."""
        Z = np.zeros((self.n, self.K), dtype=np.int64)
        Z[np.arange(self.n), self.labels] = 1
        return Z

    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.K)


def _canonical(labels: np.ndarray) -> np.ndarray:
    """Rename communities in order of first appearance."""
    _, first = np.unique(labels, return_index=True)
    order = np.argsort(first)
    remap = np.empty(labels.max() + 1, dtype=np.int64)
    remap[np.unique(labels)[order]] = np.arange(order.size)
    return remap[labels]


# ------------------------------------------------------------------- k-means


def _kmeanspp(X: np.ndarray, K: int, stream: Stream) -> np.ndarray:
    n = X.shape[0]
    u = stream.uniform(K)
    centers = np.empty((K, X.shape[1]))
    centers[0] = X[min(int(u[0] * n), n - 1)]
    d2 = ((X - centers[0]) ** 2).sum(axis=1)
    for c in range(1, K):
        total = d2.sum()
        if total > 0:
            idx = int(np.searchsorted(np.cumsum(d2), u[c] * total, side="right"))
            idx = min(idx, n - 1)
        else:
            idx = min(int(u[c] * n), n - 1)
        centers[c] = X[idx]
        d2 = np.minimum(d2, ((X - centers[c]) ** 2).sum(axis=1))
    return centers


def _assign(X: np.ndarray, centers: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    d2 = (
        (X**2).sum(axis=1)[:, None]
        - 2.0 * X @ centers.T
        + (centers**2).sum(axis=1)[None, :]
    )
    np.maximum(d2, 0.0, out=d2)
    # argmin breaks ties towards the lowest cluster index
    labels = d2.argmin(axis=1)
    return labels, d2[np.arange(X.shape[0]), labels]


def kmeans_single(X: np.ndarray, K: int, stream: Stream, max_iter: int = 300):
    """One Lloyd run from k-means++ seeding; returns ``(labels, sse)``."""
    centers = _kmeanspp(X, K, stream)
    labels, dist = _assign(X, centers)
    reseeded = False
    for _ in range(max_iter):
        counts = np.bincount(labels, minlength=K)
        empty = np.flatnonzero(counts == 0)
        if empty.size:
            if reseeded:
                raise DegenerateClusteringError(
                    f"k-means left {empty.size} of {K} communities empty; use a smaller K"
                )
            reseeded = True
            far = np.argsort(-dist, kind="stable")
            for c, idx in zip(empty, far):
                centers[c] = X[idx]
            labels, dist = _assign(X, centers)
            continue
        sums = np.zeros_like(centers)
        np.add.at(sums, labels, X)
        centers = sums / counts[:, None]
        new_labels, dist = _assign(X, centers)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    if np.any(np.bincount(labels, minlength=K) == 0):
        raise DegenerateClusteringError(f"k-means left a community empty with K={K}; use a smaller K")
    return labels, float(dist.sum())


def kmeans(X: np.ndarray, K: int, restarts: int = 20, seed: int = 0, stream: Stream | None = None):
    """Best of ``restarts`` k-means runs by within-cluster SSE.

    Each restart draws from its own child stream, so the winner does not
    depend on evaluation order; SSE ties go to the lowest restart index.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    if stream is None:
        stream = Stream(seed, "kmeans")
    best = None
    last_error = None
    for r in range(restarts):
        try:
            labels, sse = kmeans_single(X, K, stream.child(r))
        except DegenerateClusteringError as exc:
            last_error = exc
            continue
        if best is None or sse < best[1]:
            best = (labels, sse)
    if best is None:
        raise last_error
    return best


# ---------------------------------------------------------------- spectral


def spectral_embedding(A: Network | np.ndarray, K: int, normalize_rows: bool = False) -> np.ndarray:
    """Rows of the K eigenvectors of ``(A + A^T)/2`` with largest |eigenvalue|."""
    mat = A.matrix if isinstance(A, Network) else np.asarray(A)
    S = (mat + mat.T).astype(np.float64) / 2.0
    n = S.shape[0]
    if n > DENSE_EIGEN_MAX and K < n - 1:
        vals, vecs = eigsh(S, k=K, which="LM", v0=np.ones(n))
    else:
        vals, vecs = linalg.eigh(S)
    order = np.argsort(-np.abs(vals), kind="stable")[:K]
    emb = vecs[:, order]
    if normalize_rows:
        norms = np.linalg.norm(emb, axis=1, keepdims=True)
        emb = emb / np.where(norms > 0, norms, 1.0)
    return emb


def spectral_clustering(
    A: Network | np.ndarray,
    K: int,
    restarts: int = 20,
    seed: int = 0,
    normalize_rows: bool = False,
) -> CommunityAssignment:
    """Adjacency spectral clustering into ``K`` communities.

    Communities are renamed in order of first appearance, so node 0 always
    belongs to community 0.
    """
    n = A.n if isinstance(A, Network) else np.asarray(A).shape[0]
    if not 1 <= K <= n:
        raise ParameterError(f"K must lie in [1, {n}], got {K}")
    if restarts < 1:
        raise ParameterError("restarts must be at least 1")
    if K == 1:
        return CommunityAssignment(np.zeros(n, dtype=np.int64), 1)
    emb = spectral_embedding(A, K, normalize_rows)
    labels, _ = kmeans(emb, K, restarts, stream=Stream(seed, "cluster"))
    return CommunityAssignment(_canonical(labels), K)


class SpectralCommunities(ClusterMixin, BaseEstimator):
    """Spectral clustering of a network, as a scikit-learn estimator.

    Parameters
    ----------
    n_communities : int
        Number of communities ``K``.
    restarts : int
        k-means restarts; the lowest-SSE run wins.
    normalize_rows : bool
        Scale embedded rows to unit length before k-means.
    random_state : int
        Seed of the pinned k-means stream.
    kind : str or NetworkKind
        Used only when ``fit`` receives a bare array.

    Attributes
    ----------
    labels_ : ndarray of shape (n,)
        0-based community labels.
    assignment_ : CommunityAssignment
    """

    def __init__(self, n_communities=2, restarts=20, normalize_rows=False, random_state=0, kind="directed"):
        self.n_communities = n_communities
        self.restarts = restarts
        self.normalize_rows = normalize_rows
        self.random_state = random_state
        self.kind = kind

    def fit(self, X, y=None):
        net = check_network(X, kind=self.kind)
        self.assignment_ = spectral_clustering(
            net, self.n_communities, self.restarts, self.random_state, self.normalize_rows
        )
        self.labels_ = np.asarray(self.assignment_.labels)
        return self


# ---------------------------------------------------------------------- ARI


def adjusted_rand_index(z1, z2) -> float:
    """Hubert-Arabie adjusted Rand index of two labelings.

    Returns 1.0 when both partitions are trivial in the same way (the
    chance-corrected denominator vanishes).
    """
    a = np.asarray(z1).ravel()
    b = np.asarray(z2).ravel()
    if a.size != b.size:
        raise ValueError(f"labelings differ in length: {a.size} vs {b.size}")
    n = a.size
    if n < 2:
        return 1.0
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    table = np.zeros((ai.max() + 1, bi.max() + 1), dtype=np.int64)
    np.add.at(table, (ai, bi), 1)

    def pairs(x):
        x = x.astype(np.float64)
        return (x * (x - 1) / 2).sum()

    index = pairs(table)
    rows = pairs(table.sum(axis=1))
    cols = pairs(table.sum(axis=0))
    expected = rows * cols / (n * (n - 1) / 2)
    maximum = (rows + cols) / 2
    if maximum == expected:
        return 1.0
    return float((index - expected) / (maximum - expected))


# --------------------------------------------------------------- dyad sets


class DyadIndexSets:
    """Partition of the active dyads into community-pair cells.

    For directed kinds dyad ``(i, j)`` lies in cell ``(z_i, z_j)``.  For
    undirected kinds only cells with ``k <= l`` exist and the unordered pair
    ``{i, j}`` lies in cell ``(min(z_i, z_j), max(z_i, z_j))``.  When a binary
    train network is supplied, every cell is further split by train value
    ``s`` in {0, 1}.

    Cell tables are ``K x K`` float arrays; entries of cells that do not
    exist (lower triangle for undirected kinds) or are empty hold NaN.
    """

    def __init__(self, assignment: CommunityAssignment, kind: NetworkKind, train: Network | None = None):
        kind = NetworkKind.parse(kind)
        self.assignment = assignment
        self.kind = kind
        self.K = K = assignment.K
        n = assignment.n
        self.rows, self.cols = dyad_arrays(n, kind)
        zi = assignment.labels[self.rows]
        zj = assignment.labels[self.cols]
        if not kind.directed:
            zi, zj = np.minimum(zi, zj), np.maximum(zi, zj)
        self.cell = zi * K + zj
        self.exists = np.ones((K, K), dtype=bool) if kind.directed else np.triu(np.ones((K, K), dtype=bool))
        self.sizes = np.bincount(self.cell, minlength=K * K).reshape(K, K)

        self.train_values = None
        if train is not None:
            if train.n != n or train.kind != kind:
                raise ParameterError("train network does not match the assignment / kind")
            t = train.dyad_values()
            if np.any((t != 0) & (t != 1)):
                raise ParameterError("train-value splitting needs a binary train network")
            self.train_values = t.astype(np.int64)
            ones = np.bincount(self.cell, weights=self.train_values, minlength=K * K)
            self.sizes_by_train = {
                1: np.rint(ones).astype(np.int64).reshape(K, K),
            }
            self.sizes_by_train[0] = self.sizes - self.sizes_by_train[1]

    @property
    def split(self) -> bool:
        return self.train_values is not None

    def size(self, k: int, l: int, s: int | None = None) -> int:
        if s is None:
            return int(self.sizes[k, l])
        return int(self.sizes_by_train[s][k, l])

    def _select(self, s):
        if s is None:
            return np.ones(self.cell.size, dtype=bool)
        if not self.split:
            raise ParameterError("no train network was supplied for s-splitting")
        return self.train_values == s

    def members(self, k: int, l: int, s: int | None = None) -> list[tuple[int, int]]:
        """0-based dyads of cell ``(k, l)`` (restricted to train value ``s``)."""
        sel = self._select(s) & (self.cell == k * self.K + l)
        return list(zip(self.rows[sel].tolist(), self.cols[sel].tolist()))

    def cell_sums(self, values: np.ndarray, s: int | None = None) -> np.ndarray:
        """Per-cell sums of per-dyad ``values`` aligned with the active dyads."""
        values = np.asarray(values, dtype=np.float64)
        sel = self._select(s)
        sums = np.bincount(self.cell[sel], weights=values[sel], minlength=self.K**2)
        return sums.reshape(self.K, self.K)

    def counts(self, s: int | None = None) -> np.ndarray:
        return self.sizes if s is None else self.sizes_by_train[s]

    def cell_means(self, values: np.ndarray, s: int | None = None) -> np.ndarray:
        counts = self.counts(s)
        sums = self.cell_sums(values, s)
        with np.errstate(invalid="ignore", divide="ignore"):
            means = sums / counts
        means[(counts == 0) | ~self.exists] = np.nan
        return means

    def require(self, cells, s: int | None = None) -> None:
        """Raise :class:`EmptyCellError` if any of ``cells`` is empty."""
        counts = self.counts(s)
        for k, l in cells:
            if not self.exists[k, l]:
                raise ParameterError(f"cell ({k + 1},{l + 1}) does not exist for {self.kind.name} networks")
            if counts[k, l] == 0:
                raise EmptyCellError(k, l, s)


def dyad_index_sets(assignment: CommunityAssignment, kind, train: Network | None = None) -> DyadIndexSets:
    return DyadIndexSets(assignment, kind, train)
