"""Input validation helpers shared by the functional API and the estimators."""

from __future__ import annotations

import numpy as np

from .exceptions import ParameterError
from .network import EdgeDomain, Network, NetworkKind


def infer_domain(values: np.ndarray) -> EdgeDomain:
    """Guess the edge domain of a bare array from its dtype and values."""
    values = np.asarray(values)
    if values.dtype == bool:
        return EdgeDomain.BINARY
    if np.issubdtype(values.dtype, np.integer):
        if np.all((values == 0) | (values == 1)):
            return EdgeDomain.BINARY
        return EdgeDomain.COUNT
    return EdgeDomain.REAL


def check_network(X, kind="directed", domain=None) -> Network:
    """Return ``X`` as a :class:`Network`, converting square arrays.

    A :class:`Network` passes through unchanged, except that an explicit
    ``domain`` must agree with it.
    """
    if isinstance(X, Network):
        if domain is not None and EdgeDomain(domain) is not X.domain:
            raise ParameterError(f"expected a {EdgeDomain(domain).value} network, got {X.domain.value}")
        return X
    arr = np.asarray(X)
    if arr.dtype == bool:
        arr = arr.astype(np.int64)
    if domain is None:
        domain = infer_domain(arr)
    domain = EdgeDomain(domain)
    if domain is not EdgeDomain.REAL:
        if np.issubdtype(arr.dtype, np.floating):
            if np.any(arr != np.round(arr)):
                raise ParameterError(f"{domain.value} networks need integer entries")
            arr = arr.astype(np.int64)
    return Network.from_matrix(arr, NetworkKind.parse(kind), domain)


def check_labels(labels, K: int) -> np.ndarray:
    labels = np.array(labels, dtype=np.int64).ravel()
    if K < 1:
        raise ParameterError(f"K must be positive, got {K}")
    if labels.size and (labels.min() < 0 or labels.max() >= K):
        raise ParameterError(f"labels must lie in 0..{K - 1}")
    return labels


def check_alpha(alpha) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ParameterError(f"alpha must lie strictly between 0 and 1, got {alpha}")
    return alpha
