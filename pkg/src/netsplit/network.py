"""Network containers, active dyad sets and file I/O.

Node ids are 0-based in memory and 1-based in every file format.  A network
is stored as a dense ``n x n`` array; undirected networks keep the matrix
symmetric and networks without self-loops keep a zero diagonal, so only the
dyads of the active set carry information.
"""

from __future__ import annotations

import csv
import enum
import json
import math
import os
import re
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DataError, ParseError


class EdgeDomain(str, enum.Enum):
    REAL = "real"
    COUNT = "count"
    BINARY = "binary"


@dataclass(frozen=True)
class NetworkKind:
    """Directedness and self-loop convention of a network."""

    directed: bool = True
    self_loops: bool = True

    @classmethod
    def parse(cls, text: "str | NetworkKind") -> "NetworkKind":
        """Parse ``directed``, ``undirected``, ``directed-noloops``, ... ."""
        if isinstance(text, NetworkKind):
            return text
        key = text.strip().lower().replace("_", "-")
        table = {
            "directed": cls(True, True),
            "directed-loops": cls(True, True),
            "directed-noloops": cls(True, False),
            "undirected": cls(False, False),
            "undirected-noloops": cls(False, False),
            "undirected-loops": cls(False, True),
        }
        if key not in table:
            raise ValueError(f"unknown network kind {text!r}; expected one of {sorted(table)}")
        return table[key]

    @property
    def name(self) -> str:
        base = "directed" if self.directed else "undirected"
        return f"{base}-{'loops' if self.self_loops else 'noloops'}"

    def n_dyads(self, n: int) -> int:
        if self.directed:
            return n * n if self.self_loops else n * (n - 1)
        return n * (n + 1) // 2 if self.self_loops else n * (n - 1) // 2

    def __str__(self) -> str:
        return self.name


DIRECTED = NetworkKind(True, True)
UNDIRECTED = NetworkKind(False, False)


def dyad_mask(n: int, kind: NetworkKind) -> np.ndarray:
    """Boolean ``n x n`` mask of the active dyad set."""
    if kind.directed:
        mask = np.ones((n, n), dtype=bool)
        if not kind.self_loops:
            np.fill_diagonal(mask, False)
        return mask
    return np.triu(np.ones((n, n), dtype=bool), k=0 if kind.self_loops else 1)


def dyad_arrays(n: int, kind: NetworkKind) -> tuple[np.ndarray, np.ndarray]:
    """Row and column indices of the active dyads, in row-major order."""
    if n < 1:
        raise ValueError("node count must be at least 1")
    return np.nonzero(dyad_mask(n, kind))


def active_dyads(n: int, kind: NetworkKind) -> list[tuple[int, int]]:
    """The active dyad set as 0-based ``(i, j)`` pairs in row-major order.

    >>> active_dyads(3, NetworkKind(directed=False, self_loops=False))
    [(0, 1), (0, 2), (1, 2)]
    """
    rows, cols = dyad_arrays(n, kind)
    return list(zip(rows.tolist(), cols.tolist()))


def _dtype_for(domain: EdgeDomain):
    return np.float64 if domain is EdgeDomain.REAL else np.int64


def _check_domain(values: np.ndarray, domain: EdgeDomain) -> None:
    if domain is EdgeDomain.REAL:
        if not np.all(np.isfinite(values)):
            raise DataError("real-valued edges must be finite")
        return
    if domain is EdgeDomain.COUNT:
        if np.any(values < 0):
            raise DataError("count edges must be nonnegative")
        return
    if np.any((values != 0) & (values != 1)):
        raise DataError("binary edges must be 0 or 1")


@dataclass(frozen=True, eq=False)
class Network:
    """Immutable adjacency matrix tied to a kind and an edge domain.

    Build instances with :meth:`from_matrix` or :meth:`from_dyad_values`;
    both validate the edge domain and normalise entries outside the active
    set.
    """

    matrix: np.ndarray
    kind: NetworkKind = DIRECTED
    domain: EdgeDomain = EdgeDomain.REAL
    _rows: np.ndarray = field(init=False, repr=False)
    _cols: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "domain", EdgeDomain(self.domain))
        rows, cols = dyad_arrays(self.matrix.shape[0], self.kind)
        object.__setattr__(self, "_rows", rows)
        object.__setattr__(self, "_cols", cols)
        self.matrix.setflags(write=False)

    @classmethod
    def from_dyad_values(cls, n, kind, domain, values) -> "Network":
        kind = NetworkKind.parse(kind)
        domain = EdgeDomain(domain)
        values = np.asarray(values)
        if values.shape != (kind.n_dyads(n),):
            raise DataError(f"expected {kind.n_dyads(n)} dyad values, got shape {values.shape}")
        _check_domain(values, domain)
        mat = np.zeros((n, n), dtype=_dtype_for(domain))
        rows, cols = dyad_arrays(n, kind)
        mat[rows, cols] = values
        if not kind.directed:
            mat[cols, rows] = values
        return cls(mat, kind, domain)

    @classmethod
    def from_matrix(cls, matrix, kind=DIRECTED, domain=EdgeDomain.REAL) -> "Network":
        """Build from a square array.

        For undirected kinds the upper triangle is authoritative; the lower
        triangle must mirror it or be all zero.
        """
        kind = NetworkKind.parse(kind)
        mat = np.asarray(matrix)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise DataError(f"adjacency matrix must be square, got shape {mat.shape}")
        n = mat.shape[0]
        if not kind.self_loops and np.any(np.diag(mat) != 0):
            raise DataError("nonzero diagonal in a network without self-loops")
        if not kind.directed:
            lower = np.tril(mat, -1)
            if np.any(lower != 0) and not np.array_equal(lower, np.tril(mat.T, -1)):
                raise DataError("undirected matrix: lower triangle neither mirrors the upper nor is zero")
        rows, cols = dyad_arrays(n, kind)
        return cls.from_dyad_values(n, kind, domain, mat[rows, cols])

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def dyads(self) -> tuple[np.ndarray, np.ndarray]:
        return self._rows, self._cols

    def dyad_values(self) -> np.ndarray:
        """Values over the active set, aligned with :attr:`dyads`."""
        return self.matrix[self._rows, self._cols]

    def value(self, i: int, j: int):
        return self.matrix[i, j].item()

    def with_values(self, values, domain=None) -> "Network":
        return Network.from_dyad_values(self.n, self.kind, domain or self.domain, values)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Network):
            return NotImplemented
        return (
            self.kind == other.kind
            and self.domain == other.domain
            and self.matrix.shape == other.matrix.shape
            and np.array_equal(self.matrix, other.matrix)
        )

    __hash__ = None


# --------------------------------------------------------------------- files

_SPLIT = re.compile(r"[\s,]+")
_HEADER = re.compile(r"#\s*nodes=(\d+)")


def read_edge_list(path, n=None, kind=UNDIRECTED, domain=EdgeDomain.BINARY) -> Network:
    """Read a whitespace- or comma-separated ``i j [weight]`` edge list.

    Node ids are 1-based.  Missing weights default to 1, unlisted dyads to 0,
    and lines starting with ``#`` are comments (a ``# nodes=N`` comment, as
    written by :func:`write_network`, supplies the node count when ``n`` is
    not given).  For undirected kinds ``i j`` and ``j i`` name the same dyad.
    Listing a dyad twice is an error.
    """
    kind = NetworkKind.parse(kind)
    domain = EdgeDomain(domain)
    entries: dict[tuple[int, int], tuple[float, int]] = {}
    header_n = None
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                m = _HEADER.match(line)
                if m:
                    header_n = int(m.group(1))
                continue
            parts = [p for p in _SPLIT.split(line) if p]
            if len(parts) not in (2, 3):
                raise ParseError(f"malformed line (expected 'i j [weight]')", lineno)
            try:
                i, j = int(parts[0]), int(parts[1])
                w = float(parts[2]) if len(parts) == 3 else 1.0
            except ValueError:
                raise ParseError("malformed line (non-numeric field)", lineno) from None
            if i < 1 or j < 1:
                raise ParseError(f"node id out of range ({i}, {j})", lineno)
            if i == j and not kind.self_loops:
                raise ParseError("self-loop", lineno)
            key = (i - 1, j - 1) if kind.directed else (min(i, j) - 1, max(i, j) - 1)
            if key in entries:
                raise ParseError(f"duplicate dyad ({key[0] + 1}, {key[1] + 1})", lineno)
            entries[key] = (w, lineno)

    if n is None:
        n = header_n if header_n is not None else max((max(k) + 1 for k in entries), default=0)
    if n < 1:
        raise DataError(f"{path}: cannot determine node count")
    dtype = _dtype_for(domain)
    mat = np.zeros((n, n), dtype=dtype)
    for (i, j), (w, lineno) in entries.items():
        if i >= n or j >= n:
            raise ParseError(f"node id out of range ({i + 1}, {j + 1}) for n={n}", lineno)
        if domain is not EdgeDomain.REAL:
            if w != int(w):
                raise ParseError(f"non-integer weight {w} for {domain.value} network", lineno)
            w = int(w)
        mat[i, j] = w
    if not kind.directed:
        mat = np.triu(mat) + np.triu(mat, 1).T
    try:
        return Network.from_matrix(mat, kind, domain)
    except DataError as exc:
        raise DataError(f"{path}: {exc}") from None


def read_dense_csv(path, kind=DIRECTED, domain=EdgeDomain.REAL) -> Network:
    """Read an ``n x n`` comma-separated matrix (no header)."""
    domain = EdgeDomain(domain)
    rows = []
    with open(path, encoding="utf-8", newline="") as fh:
        for lineno, rec in enumerate(csv.reader(fh), start=1):
            if not rec or rec[0].startswith("#"):
                continue
            try:
                rows.append([float(x) for x in rec])
            except ValueError:
                raise ParseError("non-numeric matrix entry", lineno) from None
    if not rows or any(len(r) != len(rows) for r in rows):
        raise DataError(f"{path}: dense CSV must be a square matrix")
    mat = np.array(rows)
    if domain is not EdgeDomain.REAL:
        if np.any(mat != np.round(mat)):
            raise DataError(f"{path}: non-integer entries in a {domain.value} network")
        mat = mat.astype(np.int64)
    return Network.from_matrix(mat, kind, domain)


def read_network(path, kind=DIRECTED, domain=EdgeDomain.REAL, n=None) -> Network:
    """Dispatch on extension: ``.csv`` is a dense matrix, anything else an edge list."""
    if str(path).lower().endswith(".csv"):
        return read_dense_csv(path, kind, domain)
    return read_edge_list(path, n, kind, domain)


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(int(x))


def write_network(net: Network, path, fmt: str | None = None) -> None:
    """Write ``net`` as an edge list (default) or, for ``.csv`` paths, a dense matrix.

    Edge lists start with a ``# nodes=N kind=K domain=D`` comment, contain only
    nonzero dyads of the active set, and write floats in shortest round-trip
    form, so reading the file back reproduces ``net`` exactly.
    """
    if fmt is None:
        fmt = "csv" if str(path).lower().endswith(".csv") else "edgelist"
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if fmt == "csv":
            for row in net.matrix:
                fh.write(",".join(_fmt(x) for x in row) + "\n")
            return
        if fmt != "edgelist":
            raise ValueError(f"unknown network format {fmt!r}")
        fh.write(f"# nodes={net.n} kind={net.kind.name} domain={net.domain.value}\n")
        rows, cols = net.dyads
        vals = net.dyad_values()
        binary = net.domain is EdgeDomain.BINARY
        for i, j, v in zip(rows.tolist(), cols.tolist(), vals.tolist()):
            if v == 0:
                continue
            if binary:
                fh.write(f"{i + 1}\t{j + 1}\n")
            else:
                fh.write(f"{i + 1}\t{j + 1}\t{_fmt(v)}\n")


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _finite_or_none(x):
    x = float(x)
    return x if math.isfinite(x) else None


def result_record(result, gamma_or_epsilon: float | None = None) -> dict:
    """The fixed JSON record for an inference result."""
    return {
        "estimate": float(result.estimate),
        "std_error": float(result.std_error),
        "lower": float(result.lower),
        "upper": float(result.upper),
        "level": float(result.level),
        "target": "xi" if result.target_kind == "xi" else "theta",
        "contrast": np.asarray(result.contrast).tolist(),
        "gamma_or_epsilon": None if gamma_or_epsilon is None else _finite_or_none(gamma_or_epsilon),
    }


def write_results_json(result, path, gamma_or_epsilon: float | None = None) -> None:
    record = result_record(result, gamma_or_epsilon)
    write_json(record, path)


def write_json(obj, path) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def read_labels(path) -> np.ndarray:
    """Read one 1-based community label per line; returns 0-based labels."""
    labels = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            try:
                value = int(line)
            except ValueError:
                raise ParseError("label is not an integer", lineno) from None
            if value < 1:
                raise ParseError(f"label {value} out of range", lineno)
            labels.append(value - 1)
    return np.asarray(labels, dtype=np.int64)


def write_labels(labels, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for z in np.asarray(labels).tolist():
            fh.write(f"{z + 1}\n")
