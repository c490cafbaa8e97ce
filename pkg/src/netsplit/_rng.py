"""Pinned, counter-based random streams.

Every random quantity in the package is derived from a Philox-4x64 stream
whose 128-bit key is ``(seed, stream_id)``.  ``stream_id`` is a stable hash of
a label path such as ``("split", replicate)``, so independent parts of a
computation never share a stream and results do not depend on execution
order.  Position ``d`` of a stream is consumed by dyad ``d``.

Variates are produced from raw 64-bit words only (never through
``numpy.random.Generator`` methods, whose algorithms may change between numpy
releases):

* uniforms: top 53 bits, shifted by half a unit so that they lie in (0, 1);
* normals: inverse CDF of a uniform;
* binomial / Poisson: sequential inversion of the CDF with one uniform each.
"""

from __future__ import annotations

import hashlib
import struct

import numpy as np
from scipy import special, stats

RNG_NAME = "philox4x64-10"

_MASK64 = (1 << 64) - 1
# Above these sizes the recursive pmf underflows at its starting point.
_BINOM_DIRECT_MAX = 500
_POISSON_DIRECT_MAX = 500.0


def stream_id(*path) -> int:
    """Stable 64-bit identifier for a label path (ints and strings)."""
    h = hashlib.blake2b(digest_size=8)
    for part in path:
        if isinstance(part, (int, np.integer)):
            h.update(b"i" + struct.pack("<Q", int(part) & _MASK64))
        else:
            h.update(b"s" + str(part).encode("utf-8") + b"\x00")
    return int.from_bytes(h.digest(), "little")


class Stream:
    """A single keyed stream of variates.

    Parameters
    ----------
    seed : int
        User-facing seed, reduced modulo 2**64.
    *path
        Labels distinguishing this stream from others under the same seed.
    """

    def __init__(self, seed: int, *path):
        self.seed = int(seed) & _MASK64
        self.path = path
        key = self.seed | (stream_id(*path) << 64)
        self._bitgen = np.random.Philox(key=key)

    def child(self, *path) -> "Stream":
        return Stream(self.seed, *self.path, *path)

    def raw(self, size: int) -> np.ndarray:
        return np.asarray(self._bitgen.random_raw(int(size)), dtype=np.uint64)

    def uniform(self, size: int) -> np.ndarray:
        bits = self.raw(size) >> np.uint64(11)
        return (bits.astype(np.float64) + 0.5) * 2.0**-53

    def normal(self, size: int) -> np.ndarray:
        return special.ndtri(self.uniform(size))

    def bernoulli(self, p, size: int) -> np.ndarray:
        return (self.uniform(size) < p).astype(np.int64)

    def binomial(self, trials, p: float) -> np.ndarray:
        trials = np.asarray(trials, dtype=np.int64)
        return binomial_inverse(self.uniform(trials.size), trials, p).reshape(trials.shape)

    def poisson(self, mean) -> np.ndarray:
        mean = np.asarray(mean, dtype=np.float64)
        return poisson_inverse(self.uniform(mean.size), mean.ravel()).reshape(mean.shape)

    def integers(self, high: int, size: int) -> np.ndarray:
        return np.minimum((self.uniform(size) * high).astype(np.int64), high - 1)


def binomial_inverse(u: np.ndarray, trials: np.ndarray, p: float) -> np.ndarray:
    """Smallest ``k`` with ``P(Bin(trials, p) <= k) >= u``, elementwise."""
    u = np.asarray(u, dtype=np.float64).ravel()
    trials = np.asarray(trials, dtype=np.int64).ravel()
    out = np.zeros(trials.shape, dtype=np.int64)
    if np.any(trials < 0):
        raise ValueError("binomial trial counts must be nonnegative")

    big = trials > _BINOM_DIRECT_MAX
    if big.any():
        out[big] = stats.binom.ppf(u[big], trials[big], p).astype(np.int64)

    idx = np.flatnonzero(~big & (trials > 0))
    if idx.size == 0:
        return out
    n = trials[idx].astype(np.float64)
    uu = u[idx]
    ratio = p / (1.0 - p)
    pmf = np.power(1.0 - p, n)
    cdf = pmf.copy()
    k = np.zeros(idx.size, dtype=np.int64)
    active = uu > cdf
    # Advance each draw until its CDF passes u; trial count caps the walk.
    for step in range(int(trials[idx].max())):
        if not active.any():
            break
        a = np.flatnonzero(active)
        pmf[a] *= (n[a] - step) / (step + 1) * ratio
        cdf[a] += pmf[a]
        k[a] += 1
        active[a] = (uu[a] > cdf[a]) & (k[a] < trials[idx][a])
    out[idx] = k
    return out


def poisson_inverse(u: np.ndarray, mean: np.ndarray) -> np.ndarray:
    """Smallest ``k`` with ``P(Pois(mean) <= k) >= u``, elementwise."""
    u = np.asarray(u, dtype=np.float64).ravel()
    mean = np.asarray(mean, dtype=np.float64).ravel()
    out = np.zeros(mean.shape, dtype=np.int64)
    big = mean > _POISSON_DIRECT_MAX
    if big.any():
        out[big] = stats.poisson.ppf(u[big], mean[big]).astype(np.int64)
    idx = np.flatnonzero(~big & (mean > 0))
    if idx.size == 0:
        return out
    lam = mean[idx]
    uu = u[idx]
    pmf = np.exp(-lam)
    cdf = pmf.copy()
    k = np.zeros(idx.size, dtype=np.int64)
    active = uu > cdf
    step = 0
    while active.any():
        a = np.flatnonzero(active)
        step += 1
        pmf[a] *= lam[a] / step
        cdf[a] += pmf[a]
        k[a] += 1
        # pmf underflow guard: the remaining tail mass is below double precision.
        active[a] = (uu[a] > cdf[a]) & ((pmf[a] > 0) | (step < lam[a]))
    out[idx] = k
    return out
