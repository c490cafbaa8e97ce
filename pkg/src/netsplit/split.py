"""Splitting one network into a train network and a test network.

Three schemes are provided, one per edge family:

* :func:`thin_gaussian` -- Gaussian thinning, independent train/test parts
  summing to the original;
* :func:`thin_poisson` -- binomial thinning of counts;
* :func:`fission_bernoulli` -- random toggling of binary edges; the test
  network is the original and the train network is its noisy copy.

All randomness comes from the pinned stream ``(seed, "split", mode)``, with
dyad ``d`` of the active set consuming position ``d`` of the stream.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from ._rng import Stream
from .exceptions import DataError, ParameterError
from .network import EdgeDomain, Network


class SplitMode(str, enum.Enum):
    GAUSSIAN = "gaussian_thin"
    POISSON = "poisson_thin"
    BERNOULLI = "bernoulli_fission"

    @classmethod
    def parse(cls, text) -> "SplitMode":
        if isinstance(text, SplitMode):
            return text
        aliases = {"gaussian": cls.GAUSSIAN, "poisson": cls.POISSON, "bernoulli": cls.BERNOULLI}
        key = str(text).lower()
        if key in aliases:
            return aliases[key]
        return cls(key)

    @property
    def model(self) -> str:
        return self.value.split("_")[0]


def check_open_interval(name: str, value, low: float, high: float) -> float:
    if value is None:
        raise ParameterError(f"{name} is required")
    value = float(value)
    if not (low < value < high):
        raise ParameterError(f"{name} must lie strictly between {low} and {high}, got {value}")
    return value


@dataclass(frozen=True)
class SplitParams:
    """Parameters of one split; only the fields the mode needs may be set."""

    mode: SplitMode
    epsilon: float | None = None
    gamma: float | None = None
    tau2: float | None = None
    seed: int = 0

    def __post_init__(self):
        mode = SplitMode.parse(self.mode)
        object.__setattr__(self, "mode", mode)
        if mode is SplitMode.BERNOULLI:
            object.__setattr__(self, "gamma", check_open_interval("gamma", self.gamma, 0.0, 0.5))
            if self.epsilon is not None or self.tau2 is not None:
                raise ParameterError("bernoulli fission takes gamma only")
        else:
            object.__setattr__(self, "epsilon", check_open_interval("epsilon", self.epsilon, 0.0, 1.0))
            if self.gamma is not None:
                raise ParameterError("thinning takes epsilon, not gamma")
            if mode is SplitMode.GAUSSIAN:
                if self.tau2 is None or not float(self.tau2) > 0:
                    raise ParameterError(f"tau2 must be positive, got {self.tau2}")
                object.__setattr__(self, "tau2", float(self.tau2))
            elif self.tau2 is not None:
                raise ParameterError("poisson thinning takes no tau2")
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def fraction(self) -> float:
        """epsilon for thinning, gamma for fission."""
        return self.gamma if self.mode is SplitMode.BERNOULLI else self.epsilon


@dataclass(frozen=True, eq=False)
class SplitPair:
    train: Network
    test: Network
    params: SplitParams
    toggles: np.ndarray | None = None


def _stream(params: SplitParams) -> Stream:
    return Stream(params.seed, "split", params.mode.value)


def thin_gaussian(A: Network, epsilon: float, tau2: float, seed: int = 0) -> SplitPair:
    """Draw train ~ N(eps*A, eps(1-eps)tau2) per dyad; test is ``A - train``.

    Normals are generated by inverse-CDF from the pinned uniforms.
    ``test`` is the floating-point difference ``A - train``, so
    ``train + test`` reproduces ``A`` up to one rounding.
    """
    params = SplitParams(SplitMode.GAUSSIAN, epsilon=epsilon, tau2=tau2, seed=seed)
    if A.domain is not EdgeDomain.REAL:
        raise DataError("gaussian thinning needs a real-valued network")
    a = A.dyad_values().astype(np.float64)
    eps = params.epsilon
    z = _stream(params).normal(a.size)
    train = eps * a + np.sqrt(eps * (1.0 - eps) * params.tau2) * z
    test = a - train
    return SplitPair(A.with_values(train), A.with_values(test), params)


def thin_poisson(A: Network, epsilon: float, seed: int = 0) -> SplitPair:
    """Draw train ~ Binomial(A, eps) per dyad; test = A - train (integer exact)."""
    params = SplitParams(SplitMode.POISSON, epsilon=epsilon, seed=seed)
    if A.domain is EdgeDomain.REAL:
        raise DataError("poisson thinning needs a count network")
    a = A.dyad_values()
    if np.any(a < 0):
        raise DataError("poisson thinning needs nonnegative counts")
    train = _stream(params).binomial(a, params.epsilon)
    return SplitPair(
        A.with_values(train, EdgeDomain.COUNT),
        A.with_values(a - train, EdgeDomain.COUNT),
        params,
    )


def fission_bernoulli(A: Network, gamma: float, seed: int = 0) -> SplitPair:
    """Toggle each binary edge independently with probability ``gamma``.

    The returned pair holds ``train = A XOR W``, ``test = A`` and the toggle
    indicators ``W`` aligned with the active dyads.
    """
    params = SplitParams(SplitMode.BERNOULLI, gamma=gamma, seed=seed)
    if A.domain is not EdgeDomain.BINARY:
        raise DataError("bernoulli fission needs a binary network")
    a = A.dyad_values()
    w = _stream(params).bernoulli(params.gamma, a.size)
    train = a * (1 - w) + (1 - a) * w
    return SplitPair(A.with_values(train), A, params, toggles=w)


def split_network(A: Network, params: SplitParams) -> SplitPair:
    if params.mode is SplitMode.GAUSSIAN:
        return thin_gaussian(A, params.epsilon, params.tau2, params.seed)
    if params.mode is SplitMode.POISSON:
        return thin_poisson(A, params.epsilon, params.seed)
    return fission_bernoulli(A, params.gamma, params.seed)
