"""Population-side quantities computed from a known mean matrix ``M``.

These are the targets that intervals are checked against in simulation:
cell means ``B`` of ``M`` over estimated community pairs, the contrast
``theta = sum U_kl B_kl``, and, for binary edges after fission, the
conditional means ``T`` of the test edges, their train-split averages ``V``,
the odds-corrected surrogate ``Phi`` and its contrast ``xi``.

``M`` may be an ``n x n`` array or a real-valued :class:`Network`.  Every
cell table is a ``K x K`` array with NaN outside the cells that exist for the
network kind or that were not requested.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .community import CommunityAssignment, DyadIndexSets
from .exceptions import EmptyCellError, ParameterError
from .network import Network, NetworkKind

_NORM_TOL = 1e-12


# ------------------------------------------------------------------ contrast


@dataclass(frozen=True, eq=False)
class Contrast:
    """Unit-norm coefficients ``U`` over community-pair cells.

    ``weights`` is a ``K x K`` array; for undirected networks it must be
    upper triangular.
    """

    weights: np.ndarray
    directed: bool = True

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ParameterError(f"contrast weights must be a K x K array, got shape {w.shape}")
        if not self.directed and np.any(np.tril(w, -1) != 0):
            raise ParameterError("undirected contrasts may only address cells with k <= l")
        norm = np.sqrt((w**2).sum())
        if abs(norm - 1.0) > _NORM_TOL:
            raise ParameterError(f"contrast must have unit Euclidean norm, got {norm!r}")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def K(self) -> int:
        return self.weights.shape[0]

    @property
    def cells(self) -> list[tuple[int, int]]:
        return [tuple(c) for c in np.argwhere(self.weights != 0).tolist()]

    @classmethod
    def normalized(cls, weights, directed: bool = True) -> "Contrast":
        w = np.asarray(weights, dtype=np.float64)
        norm = np.sqrt((w**2).sum())
        if norm == 0:
            raise ParameterError("contrast coefficients are all zero")
        return cls(w / norm, directed)

    @classmethod
    def cell(cls, K: int, k: int, l: int, directed: bool = True) -> "Contrast":
        """Indicator of cell ``(k, l)`` (0-based)."""
        if not directed and k > l:
            k, l = l, k
        w = np.zeros((K, K))
        w[k, l] = 1.0
        return cls(w, directed)

    @classmethod
    def from_vec(cls, u, K: int, directed: bool = True) -> "Contrast":
        """From a length ``K*K`` vector in column-major (``vec``) order."""
        u = np.asarray(u, dtype=np.float64)
        if u.size != K * K:
            raise ParameterError(f"expected {K * K} coefficients, got {u.size}")
        return cls(u.reshape(K, K, order="F"), directed)

    @classmethod
    def from_upper(cls, coeffs, K: int) -> "Contrast":
        """Undirected contrast from coefficients of cells ``k <= l`` in row-major order."""
        coeffs = np.asarray(coeffs, dtype=np.float64)
        rows, cols = np.triu_indices(K)
        if coeffs.size != rows.size:
            raise ParameterError(f"expected {rows.size} upper-triangular coefficients, got {coeffs.size}")
        w = np.zeros((K, K))
        w[rows, cols] = coeffs
        return cls(w, directed=False)

    def apply(self, table: np.ndarray) -> float:
        """``sum_kl U_kl table_kl`` over the addressed cells only."""
        idx = self.weights != 0
        return float((self.weights[idx] * np.asarray(table)[idx]).sum())

    def quadratic(self, table: np.ndarray) -> float:
        """``sum_kl U_kl^2 table_kl`` over the addressed cells only."""
        idx = self.weights != 0
        return float((self.weights[idx] ** 2 * np.asarray(table)[idx]).sum())

    def check_for(self, K: int, kind: NetworkKind) -> None:
        if self.K != K:
            raise ParameterError(f"contrast is for K={self.K}, assignment has K={K}")
        if self.directed != kind.directed:
            raise ParameterError(f"contrast directedness does not match a {kind.name} network")


# --------------------------------------------------------------------- maths


def link_f(a, v):
    """``expit(logit(a) + log(v))`` computed as ``a v / (1 - a + a v)``."""
    a = np.asarray(a, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if np.any((a <= 0) | (a >= 1)):
        raise ParameterError("link_f needs 0 < a < 1")
    if np.any(v <= 0):
        raise ParameterError("link_f needs v > 0")
    out = a * v / ((1.0 - a) + a * v)
    return out if out.ndim else float(out)


def _check_gamma(gamma) -> float:
    gamma = float(gamma)
    if not 0.0 < gamma <= 0.5:
        raise ParameterError(f"gamma must lie in (0, 0.5], got {gamma}")
    return gamma


def _mean_values(M, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    mat = M.matrix if isinstance(M, Network) else np.asarray(M, dtype=np.float64)
    return np.asarray(mat[rows, cols], dtype=np.float64)


def _binary_means(m: np.ndarray) -> None:
    if np.any((m <= 0) | (m >= 1)):
        raise ParameterError("binary-edge means must lie strictly between 0 and 1")


def conditional_means_T(M, train: Network, gamma: float) -> np.ndarray:
    """``E[A_ij | train_ij]`` after fission, per active dyad of ``train``.

    Returns a vector aligned with ``train.dyads``.  ``gamma = 0.5`` is
    accepted here and gives ``T = M``.
    """
    gamma = _check_gamma(gamma)
    rows, cols = train.dyads
    m = _mean_values(M, rows, cols)
    _binary_means(m)
    t = train.dyad_values()
    odds = (1.0 - gamma) / gamma
    return np.where(t == 1, link_f(m, odds), link_f(m, 1.0 / odds))


def _require(sets: DyadIndexSets, cells, s=None) -> list:
    if cells is None:
        cells = [tuple(c) for c in np.argwhere(sets.exists).tolist()]
    sets.require(cells, s)
    return cells


def _restrict(table: np.ndarray, cells) -> np.ndarray:
    out = np.full_like(table, np.nan)
    for k, l in cells:
        out[k, l] = table[k, l]
    return out


def cell_means_B(M, sets: DyadIndexSets, s: int | None = None, cells=None) -> np.ndarray:
    """Mean of ``M`` over each cell (or over its train-value-``s`` part).

    Raises :class:`EmptyCellError` if a requested cell is empty; ``cells``
    defaults to every cell that exists for the kind.
    """
    cells = _require(sets, cells, s)
    return _restrict(sets.cell_means(_mean_values(M, sets.rows, sets.cols), s), cells)


def theta(M, assignment: CommunityAssignment, u: Contrast, kind) -> float:
    """``sum U_kl B_kl`` with ``B`` the cell means of ``M`` under ``assignment``."""
    kind = NetworkKind.parse(kind)
    u.check_for(assignment.K, kind)
    sets = DyadIndexSets(assignment, kind)
    return u.apply(cell_means_B(M, sets, cells=u.cells))


@dataclass(frozen=True)
class SurrogateTables:
    """Cell tables produced by :func:`surrogate_phi`."""

    phi: np.ndarray
    V: np.ndarray
    V0: np.ndarray
    V1: np.ndarray
    B: np.ndarray


def _sets_with_train(sets: DyadIndexSets, train: Network) -> DyadIndexSets:
    if sets.split:
        return sets
    return DyadIndexSets(sets.assignment, sets.kind, train)


def surrogate_phi(M, train: Network, gamma: float, sets: DyadIndexSets, cells=None) -> SurrogateTables:
    """Odds-corrected cell surrogate ``Phi`` together with ``V``, ``V0``, ``V1``, ``B``.

    ``V^(s)`` averages ``T`` over the train-value-``s`` dyads of a cell, and
    ``Phi`` maps each back through the inverse odds shift before reweighting
    by the split proportions.
    """
    gamma = _check_gamma(gamma)
    sets = _sets_with_train(sets, train)
    cells = _require(sets, cells, 0)
    _require(sets, cells, 1)
    T = conditional_means_T(M, train, gamma)
    V = sets.cell_means(T)
    V0 = sets.cell_means(T, 0)
    V1 = sets.cell_means(T, 1)
    w0 = sets.counts(0) / np.where(sets.sizes > 0, sets.sizes, 1)
    w1 = 1.0 - w0
    odds = (1.0 - gamma) / gamma
    phi = np.full((sets.K, sets.K), np.nan)
    for k, l in cells:
        phi[k, l] = w0[k, l] * link_f(V0[k, l], odds) + w1[k, l] * link_f(V1[k, l], 1.0 / odds)
    B = cell_means_B(M, sets, cells=cells)
    return SurrogateTables(phi, _restrict(V, cells), _restrict(V0, cells), _restrict(V1, cells), B)


def xi(M, train: Network, gamma: float, assignment: CommunityAssignment, u: Contrast) -> float:
    """``sum U_kl Phi_kl`` -- the inferable target after Bernoulli fission."""
    u.check_for(assignment.K, train.kind)
    sets = DyadIndexSets(assignment, train.kind, train)
    return u.apply(surrogate_phi(M, train, gamma, sets, cells=u.cells).phi)


@dataclass(frozen=True)
class GapTables:
    leading: np.ndarray
    exact: np.ndarray
    H0: np.ndarray
    H1: np.ndarray


def taylor_gap_leading(M, train: Network, gamma: float, sets: DyadIndexSets, cells=None) -> GapTables:
    """Leading-order ``Phi - B`` gap next to the exact gap.

    leading = (1 - gamma/(1-gamma)) (H0 - H1) / |I|, where ``H^(s)`` is the
    within-cell sum of squared deviations of ``M`` from its train-value-``s``
    mean.
    """
    gamma = _check_gamma(gamma)
    sets = _sets_with_train(sets, train)
    tables = surrogate_phi(M, train, gamma, sets, cells)
    cells = [tuple(c) for c in np.argwhere(~np.isnan(tables.phi)).tolist()]
    m = _mean_values(M, sets.rows, sets.cols)
    H = {}
    for s in (0, 1):
        Bs = sets.cell_means(m, s)
        dev = m - Bs.ravel()[sets.cell]
        H[s] = _restrict(sets.cell_sums(dev**2, s), cells)
    factor = 1.0 - gamma / (1.0 - gamma)
    with np.errstate(divide="ignore", invalid="ignore"):
        leading = _restrict(factor * (H[0] - H[1]) / sets.sizes, cells)
    return GapTables(leading, tables.phi - tables.B, H[0], H[1])


def gamma_zero_limit(M, train: Network, sets: DyadIndexSets, cells=None) -> np.ndarray:
    """Limit of ``Phi`` as ``gamma -> 0`` for a fixed train network.

    Arithmetic mean of the odds over train-0 dyads, harmonic mean of the odds
    over train-1 dyads, each mapped back to a probability and reweighted.
    """
    sets = _sets_with_train(sets, train)
    cells = _require(sets, cells, 0)
    _require(sets, cells, 1)
    m = _mean_values(M, sets.rows, sets.cols)
    _binary_means(m)
    odds = m / (1.0 - m)
    lam0 = sets.cell_means(odds, 0)
    lam1 = 1.0 / sets.cell_means(1.0 / odds, 1)
    w0 = sets.counts(0) / np.where(sets.sizes > 0, sets.sizes, 1)
    limit = w0 * lam0 / (1.0 + lam0) + (1.0 - w0) * lam1 / (1.0 + lam1)
    return _restrict(limit, cells)
