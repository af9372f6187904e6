"""Undirected unit networks.

A :class:`Network` is an immutable simple graph on ``n`` units.  Simulation
networks are built by the closest-pairs rule: units get seeded positions in
the unit square and edges are added between the nearest unconnected pairs
first.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, TextIO

import numpy as np
from scipy import sparse

from . import rng
from .exceptions import InvalidArgument, ParseError


@dataclass(frozen=True)
class Network:
    """Undirected simple graph on units ``0 .. n-1``.

    Edges are stored canonically as ``(u, v)`` with ``u < v``.
    """

    n: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.n < 0:
            raise InvalidArgument(f"n must be non-negative, got {self.n}")
        canon = set()
        for u, v in self.edges:
            u, v = int(u), int(v)
            if u == v:
                raise InvalidArgument(f"self-loop at unit {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise InvalidArgument(f"edge ({u}, {v}) out of range for n={self.n}")
            canon.add((min(u, v), max(u, v)))
        object.__setattr__(self, "edges", frozenset(canon))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> Network:
        """Build a network, rejecting duplicate edges (in either orientation)."""
        seen = set()
        for u, v in edges:
            key = (min(u, v), max(u, v))
            if key in seen:
                raise InvalidArgument(f"duplicate edge {key}")
            seen.add(key)
        return cls(n, frozenset(seen))

    @property
    def m_edges(self) -> int:
        return len(self.edges)

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    @cached_property
    def neighbors(self) -> tuple[tuple[int, ...], ...]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.sorted_edges():
            adj[u].append(v)
            adj[v].append(u)
        return tuple(tuple(sorted(a)) for a in adj)

    @cached_property
    def adjacency(self) -> sparse.csr_matrix:
        """Symmetric 0/1 adjacency matrix in CSR form."""
        if not self.edges:
            return sparse.csr_matrix((self.n, self.n), dtype=np.int64)
        e = np.array(self.sorted_edges(), dtype=np.int64)
        rows = np.concatenate([e[:, 0], e[:, 1]])
        cols = np.concatenate([e[:, 1], e[:, 0]])
        data = np.ones(rows.size, dtype=np.int64)
        return sparse.csr_matrix((data, (rows, cols)), shape=(self.n, self.n))


@dataclass(frozen=True)
class UnitPositions:
    coords: np.ndarray  # shape (n, 2)
    seed: int | None = None

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float)
        if c.ndim != 2 or c.shape[1] != 2:
            raise InvalidArgument(f"coords must have shape (n, 2), got {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    @property
    def n(self) -> int:
        return self.coords.shape[0]


def generate_positions(n: int, seed: int) -> UnitPositions:
    """Draw ``n`` positions uniformly in the unit square.

    The first ``k`` positions do not depend on ``n``, so networks of
    different sizes built from one seed share their leading units.
    """
    if n < 1:
        raise InvalidArgument(f"n must be >= 1, got {n}")
    g = rng.stream(rng.derive_seed(seed, rng.POSITIONS))
    return UnitPositions(g.random((n, 2)), seed=seed)


def generate_network(positions: UnitPositions, m_edges: int) -> Network:
    """Connect the ``m_edges`` closest pairs of units.

    Pairs are ranked by squared Euclidean distance, ties by ``(u, v)``.
    """
    n = positions.n
    max_edges = n * (n - 1) // 2
    if m_edges < 0 or m_edges > max_edges:
        raise InvalidArgument(f"m_edges must be in [0, {max_edges}] for n={n}, got {m_edges}")
    if m_edges == 0:
        return Network(n)
    u, v = np.triu_indices(n, k=1)
    xy = positions.coords
    dx = xy[u, 0] - xy[v, 0]
    dy = xy[u, 1] - xy[v, 1]
    d2 = dx * dx + dy * dy
    # lexsort: last key is primary
    order = np.lexsort((v, u, d2))[:m_edges]
    return Network(n, frozenset(zip(u[order].tolist(), v[order].tolist())))


def _as_vector(z, n: int) -> np.ndarray:
    z = np.asarray(z)
    if z.ndim != 1 or z.shape[0] != n:
        raise InvalidArgument(f"assignment has shape {z.shape}, expected ({n},)")
    return z


def treated_neighbor_counts(net: Network, z) -> np.ndarray:
    """Number of treated neighbours of every unit (the product ``z^T S``)."""
    z = _as_vector(z, net.n)
    return np.asarray(net.adjacency @ z.astype(np.int64), dtype=np.int64)


def degrees(net: Network) -> np.ndarray:
    return np.asarray(net.adjacency.sum(axis=1), dtype=np.int64).ravel()


# --------------------------------------------------------------------------
# Edge-list files
# --------------------------------------------------------------------------


def _open_text(source) -> tuple[TextIO, str | None, bool]:
    if isinstance(source, (str, Path)):
        return open(source, encoding="utf-8"), str(source), True
    return source, getattr(source, "name", None), False


def load_edges(source, n: int | None = None) -> Network:
    """Read a ``u,v`` edge list.

    ``n`` fixes the unit count; when ``None`` it is inferred as the largest
    index plus one.  A leading ``u,v`` header line is allowed.
    """
    fh, name, owned = _open_text(source)
    try:
        lines = fh.read().splitlines()
    finally:
        if owned:
            fh.close()

    pairs: list[tuple[int, int, int]] = []
    seen: dict[tuple[int, int], int] = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        if lineno == 1 and line.replace(" ", "").lower() == "u,v":
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 2:
            raise ParseError(f"expected 'u,v', got {raw!r}", lineno, name)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f"non-integer index in {raw!r}", lineno, name) from None
        if u < 0 or v < 0:
            raise ParseError(f"negative index in {raw!r}", lineno, name)
        if u == v:
            raise ParseError(f"self-loop at unit {u}", lineno, name)
        key = (min(u, v), max(u, v))
        if key in seen:
            raise ParseError(f"duplicate edge {key} (first on line {seen[key]})", lineno, name)
        seen[key] = lineno
        pairs.append((u, v, lineno))

    if n is None:
        n = max((max(u, v) for u, v, _ in pairs), default=-1) + 1
    for u, v, lineno in pairs:
        if u >= n or v >= n:
            raise ParseError(f"index out of range for n={n}", lineno, name)
    return Network(n, frozenset(seen))


def save_edges(net: Network, sink, header: bool = True) -> None:
    buf = io.StringIO()
    if header:
        buf.write("u,v\n")
    for u, v in net.sorted_edges():
        buf.write(f"{u},{v}\n")
    if isinstance(sink, (str, Path)):
        Path(sink).write_text(buf.getvalue(), encoding="utf-8")
    else:
        sink.write(buf.getvalue())


def save_positions(positions: UnitPositions, sink) -> None:
    lines = ["x,y"] + [f"{x!r},{y!r}" for x, y in positions.coords.tolist()]
    text = "\n".join(lines) + "\n"
    if isinstance(sink, (str, Path)):
        Path(sink).write_text(text, encoding="utf-8")
    else:
        sink.write(text)
