"""Monte-Carlo harness: SBM and heterogeneous-mean networks, coverage and
trade-off experiments, gap curves, and repeated analysis of an observed
network.

Replicate ``r`` of a scenario derives every random quantity from the 64-bit
seed ``stream_id(base_seed, "replicate", r)``, so reports are identical for
any execution order or thread count.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from ._rng import Stream, stream_id
from .community import CommunityAssignment, DyadIndexSets, adjusted_rand_index, spectral_clustering
from .estimands import Contrast, surrogate_phi, theta, xi
from .exceptions import DegenerateClusteringError, EmptyCellError, NumericalError, ParameterError
from .inference import infer_naive, parse_contrast, run_pipeline
from .network import DIRECTED, EdgeDomain, Network, NetworkKind, dyad_arrays
from .split import SplitMode, SplitParams

MAX_FAILED_FRACTION = 0.01
_DOMAINS = {"gaussian": EdgeDomain.REAL, "poisson": EdgeDomain.COUNT, "bernoulli": EdgeDomain.BINARY}


# ------------------------------------------------------------------- models


@dataclass(frozen=True)
class SbmConfig:
    n: int
    K_true: int
    rho1: float
    rho2: float
    model: str = "gaussian"
    tau2: float | None = None
    kind: NetworkKind = DIRECTED

    def __post_init__(self):
        if self.K_true < 1 or self.n % self.K_true:
            raise ParameterError(f"n={self.n} is not divisible into {self.K_true} equal communities")
        _check_means(np.array([self.rho1, self.rho2]), self.model)
        if self.model == "gaussian" and not (self.tau2 and self.tau2 > 0):
            raise ParameterError("gaussian SBM needs tau2 > 0")


def _check_means(values: np.ndarray, model: str) -> None:
    if model not in _DOMAINS:
        raise ParameterError(f"unknown edge model {model!r}")
    if model == "bernoulli" and np.any((values <= 0) | (values >= 1)):
        raise ParameterError("bernoulli means must lie strictly between 0 and 1")
    if model == "poisson" and np.any(values <= 0):
        raise ParameterError("poisson means must be positive")


def sbm_mean_matrix(config: SbmConfig) -> tuple[np.ndarray, np.ndarray]:
    """Mean matrix of an SBM with equal blocks, and the true 0-based labels."""
    labels = np.repeat(np.arange(config.K_true), config.n // config.K_true)
    same = labels[:, None] == labels[None, :]
    M = np.where(same, float(config.rho1), float(config.rho2))
    return M, labels


def uniform_mean_matrix(n: int, low: float, high: float, kind: NetworkKind, stream: Stream) -> np.ndarray:
    """``M_ij ~ Unif(low, high)`` independently over the active dyads (symmetric if undirected)."""
    rows, cols = dyad_arrays(n, kind)
    vals = low + (high - low) * stream.uniform(rows.size)
    M = np.zeros((n, n))
    M[rows, cols] = vals
    if not kind.directed:
        M[cols, rows] = vals
    return M


def sample_network(M: np.ndarray, model: str, kind=DIRECTED, seed: int = 0, tau2: float | None = None,
                   stream: Stream | None = None) -> Network:
    """One draw with independent edges of mean ``M`` over the active dyads."""
    kind = NetworkKind.parse(kind)
    M = np.asarray(M, dtype=np.float64)
    rows, cols = dyad_arrays(M.shape[0], kind)
    m = M[rows, cols]
    _check_means(m, model)
    if stream is None:
        stream = Stream(seed, "network", model)
    if model == "gaussian":
        if tau2 is None or tau2 <= 0:
            raise ParameterError("gaussian sampling needs tau2 > 0")
        vals = m + math.sqrt(tau2) * stream.normal(m.size)
    elif model == "poisson":
        vals = stream.poisson(m)
    else:
        vals = (stream.uniform(m.size) < m).astype(np.int64)
    return Network.from_dyad_values(M.shape[0], kind, _DOMAINS[model], vals)


# ---------------------------------------------------------------- scenarios


@dataclass(frozen=True)
class Scenario:
    """One grid point of a coverage experiment.

    Either an SBM (``K_true``, ``rho1``, ``rho2``) or, when ``uniform_mean``
    is set, means redrawn per replicate from ``Unif(low, high)``.
    ``split`` is epsilon for the thinning models and gamma for bernoulli.
    """

    model: str
    n: int
    K: int
    split: float
    K_true: int | None = None
    rho1: float | None = None
    rho2: float | None = None
    uniform_mean: tuple[float, float] | None = None
    tau2: float | None = None
    contrast: str = "cell:1,1"
    alpha: float = 0.10
    replicates: int = 1000
    seed: int = 0
    naive: bool = False
    kind: str = "directed"
    restarts: int = 20

    def __post_init__(self):
        if self.replicates < 1:
            raise ParameterError("replicates must be at least 1")
        if self.uniform_mean is None and self.K_true is None:
            raise ParameterError("scenario needs an SBM (K_true, rho1, rho2) or uniform_mean")
        if self.uniform_mean is not None:
            object.__setattr__(self, "uniform_mean", tuple(float(x) for x in self.uniform_mean))
        self.split_params(0)

    @property
    def network_kind(self) -> NetworkKind:
        return NetworkKind.parse(self.kind)

    def split_params(self, seed: int) -> SplitParams:
        mode = SplitMode.parse(self.model)
        if mode is SplitMode.BERNOULLI:
            return SplitParams(mode, gamma=self.split, seed=seed)
        return SplitParams(mode, epsilon=self.split, tau2=self.tau2 if mode is SplitMode.GAUSSIAN else None, seed=seed)

    def sbm(self) -> SbmConfig | None:
        if self.uniform_mean is not None:
            return None
        return SbmConfig(self.n, self.K_true, self.rho1, self.rho2, self.model, self.tau2, self.network_kind)


def replicate_seed(base_seed: int, r: int) -> int:
    return stream_id(int(base_seed), "replicate", int(r))


@dataclass
class ReplicateOutcome:
    failed: bool = False
    covered: dict = field(default_factory=dict)
    width: float = math.nan
    ari: float = math.nan
    naive_failed: bool = False
    naive_covered: float = math.nan
    naive_width: float = math.nan
    naive_ari: float = math.nan


def run_replicate(sc: Scenario, r: int) -> ReplicateOutcome:
    seed = replicate_seed(sc.seed, r)
    kind = sc.network_kind
    config = sc.sbm()
    if config is None:
        low, high = sc.uniform_mean
        M = uniform_mean_matrix(sc.n, low, high, kind, Stream(seed, "mean"))
        truth = None
    else:
        M, truth = sbm_mean_matrix(config)
    A = sample_network(M, sc.model, kind, tau2=sc.tau2, stream=Stream(seed, "network"))
    out = ReplicateOutcome()

    try:
        fit = run_pipeline(A, sc.split_params(seed), sc.K, sc.contrast, sc.alpha,
                           cluster_seed=seed, restarts=sc.restarts)
        res = fit.result
        target_theta = theta(M, fit.assignment, fit.contrast, kind)
        out.covered["theta"] = float(res.contains(target_theta))
        if sc.model == "bernoulli":
            target_xi = xi(M, fit.split.train, sc.split, fit.assignment, fit.contrast)
            out.covered["xi"] = float(res.contains(target_xi))
        out.width = res.width
        if truth is not None:
            out.ari = adjusted_rand_index(fit.assignment.labels, truth)
    except (EmptyCellError, DegenerateClusteringError):
        out.failed = True

    if sc.naive:
        try:
            assignment = spectral_clustering(A, sc.K, sc.restarts, seed=stream_id(seed, "naive"))
            u = parse_contrast(sc.contrast, sc.K, kind.directed)
            res = infer_naive(A, assignment, u, sc.model, sc.alpha, sc.tau2)
            out.naive_covered = float(res.contains(theta(M, assignment, u, kind)))
            out.naive_width = res.width
            if truth is not None:
                out.naive_ari = adjusted_rand_index(assignment.labels, truth)
        except (EmptyCellError, DegenerateClusteringError):
            out.naive_failed = True
    return out


def _map_replicates(fn, count: int, threads: int | None):
    if threads is None or threads <= 1:
        return [fn(r) for r in range(count)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        # map() returns results in index order regardless of completion order
        return list(pool.map(fn, range(count)))


def _mean(xs) -> float:
    xs = [x for x in xs if not math.isnan(x)]
    return float(np.mean(xs)) if xs else math.nan


def _row(sc: Scenario, method: str, target: str, covered, widths, aris, n_failed, preset) -> dict:
    R = len(covered)
    p = float(np.mean(covered)) if R else math.nan
    split_key = "gamma" if sc.model == "bernoulli" else "epsilon"
    return {
        "preset": preset,
        "model": sc.model,
        "method": method,
        "target": target,
        "n": sc.n,
        "K": sc.K,
        "K_true": sc.K_true,
        "rho1": sc.rho1,
        "rho2": sc.rho2,
        "mean_low": sc.uniform_mean[0] if sc.uniform_mean else None,
        "mean_high": sc.uniform_mean[1] if sc.uniform_mean else None,
        "epsilon": sc.split if split_key == "epsilon" else None,
        "gamma": sc.split if split_key == "gamma" else None,
        "tau2": sc.tau2,
        "alpha": sc.alpha,
        "replicates": R,
        "coverage": p,
        "width": _mean(widths),
        "ari": _mean(aris),
        "mc_se": math.sqrt(p * (1 - p) / R) if R else math.nan,
        "n_failed": n_failed,
    }


def coverage_experiment(sc: Scenario, threads: int | None = None, preset: str = "") -> "CoverageReport":
    """Empirical coverage, mean width and mean ARI for one scenario.

    Replicates where clustering degenerates or an addressed cell is empty are
    excluded and counted; more than 1% of them aborts the run.
    """
    outcomes = _map_replicates(lambda r: run_replicate(sc, r), sc.replicates, threads)
    ok = [o for o in outcomes if not o.failed]
    n_failed = len(outcomes) - len(ok)
    if n_failed > MAX_FAILED_FRACTION * sc.replicates:
        raise NumericalError(f"{n_failed} of {sc.replicates} replicates failed (limit 1%) for {sc}")
    rows = []
    targets = ["xi", "theta"] if sc.model == "bernoulli" else ["theta"]
    for target in targets:
        rows.append(_row(sc, "proposed", target, [o.covered[target] for o in ok],
                         [o.width for o in ok], [o.ari for o in ok], n_failed, preset))
    if sc.naive:
        nok = [o for o in outcomes if not o.naive_failed]
        rows.append(_row(sc, "naive", "theta", [o.naive_covered for o in nok],
                         [o.naive_width for o in nok], [o.naive_ari for o in nok],
                         len(outcomes) - len(nok), preset))
    return CoverageReport(rows)


def tradeoff_grid(base: Scenario, grid: dict, threads: int | None = None, preset: str = "") -> "CoverageReport":
    """Run :func:`coverage_experiment` over the cartesian product of ``grid``.

    ``grid`` maps :class:`Scenario` field names to lists of values, e.g.
    ``{"split": [0.1, 0.5, 0.9], "rho2": [21, 27]}``.
    """
    keys = list(grid)
    rows = []
    for values in itertools.product(*(grid[k] for k in keys)):
        sc = replace(base, **dict(zip(keys, values)))
        rows.extend(coverage_experiment(sc, threads, preset).rows)
    return CoverageReport(rows)


# ------------------------------------------------------------------ reports


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return "" if math.isnan(value) else repr(float(value))
    return str(value)


@dataclass
class CoverageReport:
    rows: list

    def to_csv(self) -> str:
        return rows_to_csv(self.rows)

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.to_csv())

    def select(self, **match) -> list:
        return [r for r in self.rows if all(r.get(k) == v for k, v in match.items())]


def rows_to_csv(rows: list) -> str:
    if not rows:
        return ""
    columns = list(rows[0])
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row.get(c)) for c in columns])
    return buf.getvalue()


# --------------------------------------------------------------- gap curves

GAP_SETTINGS = ("constant", "two-block", "uniform")


def _gap_mean(setting: str, n: int, stream: Stream) -> np.ndarray:
    if setting == "constant":
        return np.full((n, n), 0.5)
    if setting == "two-block":
        half = np.arange(n) < n // 2
        return np.where(half[:, None] == half[None, :], 0.6, 0.4)
    if setting == "uniform":
        return uniform_mean_matrix(n, 0.0, 1.0, DIRECTED, stream)
    raise ParameterError(f"unknown gap setting {setting!r}; expected one of {GAP_SETTINGS}")


GAP_PARTITIONS = ("estimated", "halves")


def gap_curves(setting: str, n: int = 100, gammas=(0.001, 0.1, 0.2, 0.3, 0.4, 0.5), reps: int = 200,
               seed: int = 0, threads: int | None = None, partition: str = "estimated",
               restarts: int = 20) -> list:
    """Mean ``|V_11 - B_11|`` and ``|Phi_11 - B_11|`` over fission draws, per gamma.

    Networks are directed with self-loops.  With ``partition="estimated"``
    the two communities come from spectral clustering of each train network;
    ``"halves"`` fixes them to ``{0..n/2-1}`` and ``{n/2..n-1}``.
    ``gamma = 0.5`` is allowed here.  Each replicate uses one set of toggle
    uniforms across all gammas.
    """
    gammas = [float(g) for g in gammas]
    for g in gammas:
        if not 0.0 < g <= 0.5:
            raise ParameterError(f"gamma must lie in (0, 0.5], got {g}")
    if partition not in GAP_PARTITIONS:
        raise ParameterError(f"unknown partition {partition!r}; expected one of {GAP_PARTITIONS}")
    halves = CommunityAssignment((np.arange(n) >= n // 2).astype(np.int64), 2)

    def one(r):
        rs = replicate_seed(seed, r)
        M = _gap_mean(setting, n, Stream(rs, "mean"))
        A = sample_network(M, "bernoulli", DIRECTED, stream=Stream(rs, "network"))
        a = A.dyad_values()
        u = Stream(rs, "toggle").uniform(a.size)
        gaps = []
        for g in gammas:
            w = (u < g).astype(np.int64)
            train = A.with_values(a * (1 - w) + (1 - a) * w)
            if partition == "halves":
                assignment = halves
            else:
                assignment = spectral_clustering(train, 2, restarts, seed=stream_id(rs, "cluster"))
            sets = DyadIndexSets(assignment, DIRECTED, train)
            tab = surrogate_phi(M, train, g, sets, cells=[(0, 0)])
            gaps.append((abs(tab.V[0, 0] - tab.B[0, 0]), abs(tab.phi[0, 0] - tab.B[0, 0])))
        return gaps

    results = _map_replicates(one, reps, threads)
    arr = np.array(results)  # reps x gammas x 2
    return [
        {"setting": setting, "gamma": g, "mean_abs_V_gap": float(arr[:, i, 0].mean()),
         "mean_abs_Phi_gap": float(arr[:, i, 1].mean()), "reps": reps}
        for i, g in enumerate(gammas)
    ]


# ------------------------------------------------------------ observed data


def analyze_real(network: Network, gammas, repeats: int = 500, K: int = 2, contrast: str | Contrast = "",
                 alpha: float = 0.10, seed: int = 0, restarts: int = 20, threads: int | None = None) -> list:
    """Repeated fission analysis of an observed binary network, per gamma.

    For every gamma and repeat: fission, cluster the train network, compare it
    with the clustering of the full network (ARI), and build the interval for
    ``xi``.  Repeat ``r`` uses the same toggle uniforms for every gamma.
    Repeats with an empty cell are counted in ``n_failed`` and skipped.
    """
    if network.domain is not EdgeDomain.BINARY:
        raise ParameterError("analysis of an observed network needs binary edges")
    directed = network.kind.directed
    if isinstance(contrast, Contrast):
        u = contrast
    elif contrast:
        u = parse_contrast(contrast, K, directed)
    else:
        u = _separation_contrast(K, directed)
    full = spectral_clustering(network, K, restarts, seed=stream_id(seed, "full"))

    def one(args):
        gi, r = args
        g = gammas[gi]
        split_seed = stream_id(seed, "analyze", r)
        try:
            fit = run_pipeline(network, SplitParams(SplitMode.BERNOULLI, gamma=g, seed=split_seed), K, u,
                               alpha, cluster_seed=split_seed, restarts=restarts)
        except (EmptyCellError, DegenerateClusteringError):
            return None
        res = fit.result
        return (adjusted_rand_index(fit.assignment.labels, full.labels), res.lower, res.estimate, res.upper)

    jobs = [(gi, r) for gi in range(len(gammas)) for r in range(repeats)]
    outcomes = _map_replicates(lambda i: one(jobs[i]), len(jobs), threads)
    rows = []
    for gi, g in enumerate(gammas):
        got = [o for o, (gj, _) in zip(outcomes, jobs) if gj == gi and o is not None]
        arr = np.array(got) if got else np.full((1, 4), np.nan)
        rows.append({
            "gamma": float(g),
            "mean_ari": float(arr[:, 0].mean()),
            "mean_lower": float(arr[:, 1].mean()),
            "mean_midpoint": float(arr[:, 2].mean()),
            "mean_upper": float(arr[:, 3].mean()),
            "repeats": repeats,
            "n_failed": repeats - len(got),
        })
    return rows


def _separation_contrast(K: int, directed: bool) -> Contrast:
    """Average within-community cell minus average between-community cell.

    For an undirected network with K=2 this is ``(1, -2, 1)/sqrt(6)`` over
    cells (1,1), (1,2), (2,2).
    """
    if K < 2:
        raise ParameterError("a within-minus-between contrast needs K >= 2")
    if directed:
        w = np.full((K, K), -1.0 / (K * (K - 1)))
    else:
        w = np.triu(np.full((K, K), -2.0 / (K * (K - 1))), 1)
    np.fill_diagonal(w, 1.0 / K)
    return Contrast.normalized(w, directed)


# ------------------------------------------------------------------ presets


@dataclass(frozen=True)
class Preset:
    """A named experiment: one or more (base scenario fields, grid) parts.

    For ``kind="gap"`` every part is a gap-curve setting instead.
    """

    name: str
    kind: str
    parts: tuple
    charts: tuple = ()


_ESPLIT = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]
_GSPLIT = [0.001, 0.005, 0.01, 0.015, 0.02, 0.03, 0.04, 0.05, 0.075, 0.1, 0.15, 0.2, 0.3, 0.4, 0.499]
_THIN = dict(n=200, K=5, K_true=5, rho1=30.0, rho2=27.0, tau2=25.0, split=0.5)
_FISSION = dict(model="bernoulli", n=200, K=5, K_true=5, rho1=0.75, rho2=0.5, split=0.25)


def _tradeoff(name, model, rho2s, splits):
    base = dict(_THIN, model=model) if model != "bernoulli" else dict(_FISSION)
    return Preset(name, "coverage", ((base, {"rho2": rho2s, "split": splits}),),
                  charts=(("width", "split", "rho2"), ("ari", "split", "rho2")))


PRESETS = {
    "tableS1": Preset("tableS1", "coverage", (
        (dict(_THIN, model="gaussian", naive=True), {"model": ["gaussian", "poisson"], "n": [100, 200, 500],
                                                       "K": [2, 5, 10]}),
    )),
    "tableS2": Preset("tableS2", "coverage", (
        (dict(_FISSION, naive=True), {"n": [100, 200, 500], "K": [2, 5, 10]}),
    )),
    "fig3": _tradeoff("fig3", "gaussian", [21.0, 23.0, 25.0, 27.0, 29.0], _ESPLIT),
    "fig4": _tradeoff("fig4", "poisson", [21.0, 23.0, 25.0, 27.0, 29.0], _ESPLIT),
    "fig5": _tradeoff("fig5", "bernoulli", [0.35, 0.40, 0.45, 0.50, 0.55], _GSPLIT),
    "fig6": Preset("fig6", "coverage", (
        (dict(model="bernoulli", n=200, K=5, split=0.25, uniform_mean=(0.0, 1.0), naive=True), {"K": [2, 5, 10]}),
        (dict(model="bernoulli", n=200, K=5, split=0.25, uniform_mean=(0.0, 1.0)), {"split": _GSPLIT}),
    ), charts=(("width", "split", None),)),
    "fig2": Preset("fig2", "gap", (
        dict(setting="constant"), dict(setting="two-block"), dict(setting="uniform"),
    )),
}

# CLI override name -> scenario field
OVERRIDE_FIELDS = {"n": "n", "k": "K", "k_true": "K_true", "model": "model", "rho1": "rho1", "rho2": "rho2",
                   "split": "split", "tau2": "tau2", "alpha": "alpha", "contrast": "contrast", "restarts": "restarts"}


def preset_parts(preset: Preset, overrides: dict) -> list:
    """Apply overrides (scenario field -> list of values) to every part of a coverage preset."""
    parts = []
    for base, grid in preset.parts:
        base, grid = dict(base), dict(grid)
        for key, values in overrides.items():
            values = list(values)
            if len(values) > 1:
                grid[key] = values
            else:
                grid.pop(key, None)
                base[key] = values[0]
        parts.append((base, grid))
    return parts


def run_preset(name: str, overrides: dict | None = None, replicates: int = 1000, seed: int = 0,
               threads: int | None = None) -> list:
    """Run a named preset and return its report rows."""
    if name not in PRESETS:
        raise ParameterError(f"unknown preset {name!r}; expected one of {sorted(PRESETS)}")
    preset = PRESETS[name]
    overrides = dict(overrides or {})
    if preset.kind == "gap":
        n = overrides.get("n", [100])[0]
        gammas = overrides.get("gammas", [0.001, 0.1, 0.2, 0.3, 0.4, 0.5])
        settings = overrides.get("setting", [p["setting"] for p in preset.parts])
        rows = []
        for setting in settings:
            rows.extend(gap_curves(setting, n, gammas, replicates, seed, threads))
        return rows
    overrides.pop("gammas", None)
    overrides.pop("setting", None)
    rows = []
    for base, grid in preset_parts(preset, overrides):
        sc = Scenario(**dict(base, replicates=replicates, seed=seed))
        rows.extend(tradeoff_grid(sc, grid, threads, preset=name).rows)
    return rows


# ---------------------------------------------------------------------- svg

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf")


def _fmt(v: float) -> str:
    return f"{v:.4g}"


def line_chart_svg(series: dict, xlabel: str, ylabel: str, title: str = "") -> str:
    """Minimal 800x600 SVG line chart; ``series`` maps a label to ``(xs, ys)``."""
    W, H, L, R, T, B = 800, 600, 80, 160, 50, 60
    pts = [(x, y) for xs, ys in series.values() for x, y in zip(xs, ys) if not math.isnan(y)]
    if not pts:
        pts = [(0.0, 0.0), (1.0, 1.0)]
    x0, x1 = min(p[0] for p in pts), max(p[0] for p in pts)
    y0, y1 = min(p[1] for p in pts), max(p[1] for p in pts)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0

    def sx(x):
        return L + (x - x0) / (x1 - x0) * (W - L - R)

    def sy(y):
        return H - B - (y - y0) / (y1 - y0) * (H - T - B)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
           f'<rect width="{W}" height="{H}" fill="white"/>',
           f'<line x1="{L}" y1="{H - B}" x2="{W - R}" y2="{H - B}" stroke="black"/>',
           f'<line x1="{L}" y1="{T}" x2="{L}" y2="{H - B}" stroke="black"/>']
    for i in range(5):
        xv = x0 + (x1 - x0) * i / 4
        yv = y0 + (y1 - y0) * i / 4
        out.append(f'<text x="{sx(xv):.1f}" y="{H - B + 20}" font-size="12" text-anchor="middle">{_fmt(xv)}</text>')
        out.append(f'<text x="{L - 8}" y="{sy(yv) + 4:.1f}" font-size="12" text-anchor="end">{_fmt(yv)}</text>')
    out.append(f'<text x="{(L + W - R) / 2}" y="{H - 15}" font-size="14" text-anchor="middle">{xlabel}</text>')
    out.append(f'<text x="20" y="{(T + H - B) / 2}" font-size="14" text-anchor="middle" '
               f'transform="rotate(-90 20 {(T + H - B) / 2})">{ylabel}</text>')
    if title:
        out.append(f'<text x="{W / 2}" y="30" font-size="16" text-anchor="middle">{title}</text>')
    for i, (label, (xs, ys)) in enumerate(series.items()):
        color = _PALETTE[i % len(_PALETTE)]
        path = " ".join(f"{sx(x):.1f},{sy(y):.1f}" for x, y in zip(xs, ys) if not math.isnan(y))
        out.append(f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="2"/>')
        ly = T + 20 * i
        out.append(f'<line x1="{W - R + 15}" y1="{ly}" x2="{W - R + 40}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{W - R + 45}" y="{ly + 4}" font-size="12">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def preset_charts(name: str, rows: list) -> dict:
    """SVG documents for a preset's report, keyed by file name."""
    preset = PRESETS[name]
    charts = {}
    if preset.kind == "gap":
        for setting in dict.fromkeys(r["setting"] for r in rows):
            sel = [r for r in rows if r["setting"] == setting]
            xs = [r["gamma"] for r in sel]
            charts[f"gap_{setting}.svg"] = line_chart_svg(
                {"|V11 - B11|": (xs, [r["mean_abs_V_gap"] for r in sel]),
                 "|Phi11 - B11|": (xs, [r["mean_abs_Phi_gap"] for r in sel])},
                "gamma", "mean absolute gap", setting)
        return charts
    for metric, xkey, group in preset.charts:
        series = {}
        for r in rows:
            if r["method"] != "proposed" or r["target"] not in ("theta",):
                continue
            x = r["gamma"] if r["gamma"] is not None else r["epsilon"]
            label = f"{group}={r[group]}" if group else r["model"]
            series.setdefault(label, ([], []))
            series[label][0].append(x)
            series[label][1].append(r[metric])
        for xs, ys in series.values():
            order = np.argsort(xs, kind="stable")
            xs[:], ys[:] = [xs[i] for i in order], [ys[i] for i in order]
        xlabel = "gamma" if rows and rows[0]["model"] == "bernoulli" else "epsilon"
        charts[f"{name}_{metric}.svg"] = line_chart_svg(series, xlabel, metric, name)
    return charts
