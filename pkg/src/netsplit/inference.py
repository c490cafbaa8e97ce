"""Confidence intervals for contrasts of community-pair means after splitting.

* Gaussian thinning: exact interval for ``theta`` with known variance.
* Poisson thinning: Wald interval with plug-in variance ``B_hat / |I|``.
* Bernoulli fission: delta-method interval for the surrogate ``xi``.
* Naive: the same contrast estimated and tested on the full network.

All intervals are ``estimate +/- z_{1-alpha/2} * std_error``.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from .community import CommunityAssignment, DyadIndexSets, spectral_clustering
from .estimands import Contrast
from .exceptions import DataError, ParameterError
from .network import EdgeDomain, Network, NetworkKind
from .split import SplitMode, SplitPair, SplitParams, check_open_interval, split_network
from .validation import check_alpha, check_network

DELTA_CAP = 0.25


def normal_quantile(p: float) -> float:
    """Standard normal quantile."""
    if p == 0.5:
        return 0.0
    return statistics.NormalDist().inv_cdf(p)


@dataclass(frozen=True, eq=False)
class InferenceResult:
    estimate: float
    std_error: float
    lower: float
    upper: float
    level: float
    target_kind: str
    contrast: np.ndarray
    diagnostics: dict = field(default_factory=dict)
    warnings: tuple = ()

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper


def _interval(estimate, variance, alpha, target_kind, u, diagnostics, warnings=()) -> InferenceResult:
    se = math.sqrt(max(variance, 0.0))
    z = normal_quantile(1.0 - alpha / 2.0)
    return InferenceResult(
        estimate=float(estimate),
        std_error=se,
        lower=float(estimate - z * se),
        upper=float(estimate + z * se),
        level=1.0 - alpha,
        target_kind=target_kind,
        contrast=np.asarray(u.weights),
        diagnostics=diagnostics,
        warnings=tuple(warnings),
    )


def _sets(test: Network, assignment: CommunityAssignment, u: Contrast, train: Network | None = None):
    if assignment.n != test.n:
        raise ParameterError(f"assignment has {assignment.n} nodes, network has {test.n}")
    u.check_for(assignment.K, test.kind)
    sets = DyadIndexSets(assignment, test.kind, train)
    sets.require(u.cells)
    return sets


def _addressed(table: np.ndarray, u: Contrast) -> np.ndarray:
    out = np.full(table.shape, np.nan)
    mask = u.weights != 0
    out[mask] = table[mask]
    return out


def infer_gaussian(test: Network, assignment, u: Contrast, epsilon, tau2, alpha=0.10) -> InferenceResult:
    """Exact interval for ``theta`` from a Gaussian-thinned test network.

    theta_hat = sum U B_hat / (1 - eps),  sigma^2 = tau2 / (1 - eps) * sum U^2 / |I|.
    """
    eps = check_open_interval("epsilon", epsilon, 0.0, 1.0)
    if tau2 is None or not float(tau2) > 0:
        raise ParameterError(f"tau2 must be positive, got {tau2}")
    alpha = check_alpha(alpha)
    sets = _sets(test, assignment, u)
    B_hat = sets.cell_means(test.dyad_values())
    estimate = u.apply(B_hat) / (1.0 - eps)
    variance = float(tau2) / (1.0 - eps) * u.quadratic(1.0 / sets.sizes)
    return _interval(estimate, variance, alpha, "theta", u, {"B_hat": _addressed(B_hat, u), "sizes": sets.sizes})


def infer_poisson(test: Network, assignment, u: Contrast, epsilon, alpha=0.10) -> InferenceResult:
    """Asymptotic interval for ``theta`` from a Poisson-thinned test network.

    sigma_hat^2 = (1 - eps)^-2 sum U^2 B_hat / |I|.  A cell with no counts
    yields a zero variance contribution; a warning is attached.
    """
    eps = check_open_interval("epsilon", epsilon, 0.0, 1.0)
    alpha = check_alpha(alpha)
    if test.domain is EdgeDomain.REAL:
        raise DataError("poisson inference needs a count test network")
    sets = _sets(test, assignment, u)
    B_hat = sets.cell_means(test.dyad_values())
    delta = B_hat / sets.sizes
    estimate = u.apply(B_hat) / (1.0 - eps)
    variance = u.quadratic(delta) / (1.0 - eps) ** 2
    warnings = [f"cell ({k + 1},{l + 1}) has no counts; its variance estimate is 0" for k, l in u.cells if B_hat[k, l] == 0]
    return _interval(
        estimate, variance, alpha, "theta", u,
        {"B_hat": _addressed(B_hat, u), "Delta_hat": _addressed(delta, u), "sizes": sets.sizes},
        warnings,
    )


def bernoulli_cell_terms(B_hat_s: np.ndarray, size_s: np.ndarray, c: float):
    """Per-cell ``V_hat^(s)`` and safeguarded ``Delta_hat^(s)`` for one train value.

    When ``B_hat`` is exactly 0 or 1 the variance numerator uses
    ``eta = 1 / (2 |I^(s)|)`` in place of ``B_hat``; every ``Delta_hat`` is
    capped at 0.25.
    """
    ec = math.exp(c)
    denom = B_hat_s + (1.0 - B_hat_s) * ec
    V_hat = B_hat_s / denom
    boundary = (B_hat_s == 0) | (B_hat_s == 1)
    num_b = np.where(boundary, 1.0 / (2.0 * size_s), B_hat_s)
    delta = num_b * (1.0 - num_b) * ec**2 / (size_s * denom**4)
    return V_hat, np.minimum(delta, DELTA_CAP), boundary


def infer_bernoulli(test: Network, train: Network, assignment, u: Contrast, gamma, alpha=0.10) -> InferenceResult:
    """Delta-method interval for ``xi`` after Bernoulli fission."""
    gamma = check_open_interval("gamma", gamma, 0.0, 0.5)
    alpha = check_alpha(alpha)
    if test.domain is not EdgeDomain.BINARY or train.domain is not EdgeDomain.BINARY:
        raise DataError("bernoulli inference needs binary train and test networks")
    if train.kind != test.kind or train.n != test.n:
        raise ParameterError("train and test networks differ in size or kind")
    sets = _sets(test, assignment, u, train)
    sets.require(u.cells, 0)
    sets.require(u.cells, 1)

    a = test.dyad_values()
    c0 = math.log(gamma / (1.0 - gamma))
    cells = u.weights != 0
    phi_hat = np.zeros((sets.K, sets.K))
    delta_hat = np.zeros((sets.K, sets.K))
    diagnostics = {"sizes": sets.sizes}
    for s, c in ((0, c0), (1, -c0)):
        size_s = sets.counts(s).astype(np.float64)
        B_hat_s = np.where(cells, sets.cell_means(a, s), 0.5)
        V_hat, delta_s, boundary = bernoulli_cell_terms(B_hat_s, np.where(cells, size_s, 1.0), c)
        w = size_s / np.where(sets.sizes > 0, sets.sizes, 1)
        phi_hat += w * V_hat
        delta_hat += w**2 * delta_s
        diagnostics[f"B_hat{s}"] = _addressed(B_hat_s, u)
        diagnostics[f"V_hat{s}"] = _addressed(V_hat, u)
        diagnostics[f"Delta_hat{s}"] = _addressed(delta_s, u)
        diagnostics[f"sizes{s}"] = sets.counts(s)
        diagnostics[f"eta_used{s}"] = boundary & cells
    diagnostics["Phi_hat"] = _addressed(phi_hat, u)
    diagnostics["Delta_hat"] = _addressed(delta_hat, u)
    return _interval(u.apply(phi_hat), u.quadratic(delta_hat), alpha, "xi", u, diagnostics)


def infer_naive(A: Network, assignment, u: Contrast, model, alpha=0.10, tau2=None) -> InferenceResult:
    """Unadjusted interval using ``A`` both to cluster and to estimate.

    Plug-in cell variances: ``tau2/|I|`` (gaussian), ``B_hat/|I|``
    (poisson), ``B_hat(1 - B_hat)/|I|`` (bernoulli).  No boundary safeguard.
    """
    model = SplitMode.parse(model).model
    alpha = check_alpha(alpha)
    sets = _sets(A, assignment, u)
    B_hat = sets.cell_means(A.dyad_values())
    if model == "gaussian":
        if tau2 is None or not float(tau2) > 0:
            raise ParameterError(f"tau2 must be positive, got {tau2}")
        delta = float(tau2) / sets.sizes
    elif model == "poisson":
        delta = B_hat / sets.sizes
    else:
        delta = B_hat * (1.0 - B_hat) / sets.sizes
    return _interval(
        u.apply(B_hat), u.quadratic(delta), alpha, "naive", u,
        {"B_hat": _addressed(B_hat, u), "Delta_hat": _addressed(delta, u), "sizes": sets.sizes},
    )


def infer_split(pair: SplitPair, assignment, u: Contrast, alpha=0.10) -> InferenceResult:
    """Dispatch on the split mode stored in ``pair``."""
    p = pair.params
    if p.mode is SplitMode.GAUSSIAN:
        return infer_gaussian(pair.test, assignment, u, p.epsilon, p.tau2, alpha)
    if p.mode is SplitMode.POISSON:
        return infer_poisson(pair.test, assignment, u, p.epsilon, alpha)
    return infer_bernoulli(pair.test, pair.train, assignment, u, p.gamma, alpha)


# ------------------------------------------------------------------ pipeline

@dataclass(frozen=True, eq=False)
class PipelineResult:
    result: InferenceResult
    assignment: CommunityAssignment
    split: SplitPair
    contrast: Contrast


def resolve_contrast(u, assignment: CommunityAssignment, train: Network) -> Contrast:
    if callable(u) and not isinstance(u, Contrast):
        u = u(assignment, train)
    if isinstance(u, str):
        u = parse_contrast(u, assignment.K, train.kind.directed)
    if not isinstance(u, Contrast):
        raise ParameterError(f"cannot use {type(u).__name__} as a contrast")
    return u


def run_pipeline(
    A: Network,
    params: SplitParams,
    K: int,
    u,
    alpha: float = 0.10,
    cluster_seed: int = 0,
    restarts: int = 20,
) -> PipelineResult:
    """Split ``A``, cluster the train network, and build the interval on the test side.

    ``u`` is a :class:`Contrast`, a contrast string, or a callable receiving
    the estimated assignment and the train network (so the contrast may be
    chosen after looking at the train data).
    """
    pair = split_network(A, params)
    assignment = spectral_clustering(pair.train, K, restarts=restarts, seed=cluster_seed)
    contrast = resolve_contrast(u, assignment, pair.train)
    result = infer_split(pair, assignment, contrast, alpha)
    return PipelineResult(result, assignment, pair, contrast)


def parse_contrast(spec: str, K: int, directed: bool = True) -> Contrast:
    """Parse ``cell:k,l`` (1-based) or an explicit coefficient list.

    Explicit lists have ``K*K`` entries in column-major order for directed
    networks and ``K(K+1)/2`` entries for cells ``k <= l`` in row-major
    order for undirected ones.  Lists are normalised to unit length.
    """
    spec = spec.strip()
    if spec.startswith("cell:"):
        try:
            k, l = (int(x) for x in spec[5:].split(","))
        except ValueError:
            raise ParameterError(f"bad cell contrast {spec!r}; expected cell:k,l") from None
        if not (1 <= k <= K and 1 <= l <= K):
            raise ParameterError(f"cell ({k},{l}) out of range for K={K}")
        return Contrast.cell(K, k - 1, l - 1, directed)
    try:
        coeffs = np.array([float(x) for x in spec.replace(";", ",").split(",") if x.strip()])
    except ValueError:
        raise ParameterError(f"bad contrast {spec!r}") from None
    if directed:
        if coeffs.size != K * K:
            raise ParameterError(f"directed contrast needs {K * K} coefficients, got {coeffs.size}")
        w = coeffs.reshape(K, K, order="F")
        return Contrast.normalized(w, True)
    rows, cols = np.triu_indices(K)
    if coeffs.size != rows.size:
        raise ParameterError(f"undirected contrast needs {rows.size} coefficients, got {coeffs.size}")
    w = np.zeros((K, K))
    w[rows, cols] = coeffs
    return Contrast.normalized(w, False)


class SelectiveInference(BaseEstimator):
    """Split, cluster and infer in one scikit-learn style estimator.

    Parameters
    ----------
    model : {"gaussian", "poisson", "bernoulli"}
    fraction : float
        ``epsilon`` for the thinning models, ``gamma`` for bernoulli.
    tau2 : float, optional
        Known edge variance (gaussian only).
    n_communities : int
    contrast : str, Contrast or callable
        Defaults to the first diagonal cell.
    alpha : float
    kind : str
        Network kind used when ``fit`` receives a bare array.
    random_state : int
        Seed of the split.
    cluster_random_state : int
        Seed of the clustering (kept independent of the split seed).
    restarts : int

    Attributes
    ----------
    result_ : InferenceResult
    labels_ : ndarray
    split_ : SplitPair
    contrast_ : Contrast
    """

    def __init__(
        self,
        model="gaussian",
        fraction=0.5,
        tau2=None,
        n_communities=2,
        contrast="cell:1,1",
        alpha=0.10,
        kind="directed",
        random_state=0,
        cluster_random_state=0,
        restarts=20,
    ):
        self.model = model
        self.fraction = fraction
        self.tau2 = tau2
        self.n_communities = n_communities
        self.contrast = contrast
        self.alpha = alpha
        self.kind = kind
        self.random_state = random_state
        self.cluster_random_state = cluster_random_state
        self.restarts = restarts

    def _params(self) -> SplitParams:
        mode = SplitMode.parse(self.model)
        if mode is SplitMode.BERNOULLI:
            return SplitParams(mode, gamma=self.fraction, seed=self.random_state)
        tau2 = self.tau2 if mode is SplitMode.GAUSSIAN else None
        return SplitParams(mode, epsilon=self.fraction, tau2=tau2, seed=self.random_state)

    def fit(self, X, y=None):
        params = self._params()
        domain = {"gaussian": "real", "poisson": "count", "bernoulli": "binary"}[params.mode.model]
        net = check_network(X, kind=self.kind, domain=domain)
        out = run_pipeline(
            net, params, self.n_communities, self.contrast, self.alpha,
            cluster_seed=self.cluster_random_state, restarts=self.restarts,
        )
        self.result_ = out.result
        self.labels_ = np.asarray(out.assignment.labels)
        self.assignment_ = out.assignment
        self.split_ = out.split
        self.contrast_ = out.contrast
        return self

    @property
    def interval_(self) -> tuple[float, float]:
        return self.result_.lower, self.result_.upper
