"""Seeded dense Erdos-Renyi graph generation and basic graph queries."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["Graph", "derive_seed", "gen_gnp"]


def derive_seed(seed, *path: int) -> np.random.SeedSequence:
    """Child seed for (master seed, index path), stable across schedulers.

    Extending the path of an already-derived seed nests the derivation, so
    e.g. graph ``i`` of a dataset and the pattern planted on it each get an
    independent stream that depends only on the master seed and the indices.
    """
    if isinstance(seed, np.random.SeedSequence):
        key = tuple(seed.spawn_key) + path
        return np.random.SeedSequence(seed.entropy, spawn_key=key)
    return np.random.SeedSequence(int(seed), spawn_key=path)


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(derive_seed(seed))


@dataclass(frozen=True)
class Graph:
    """Dense graph on vertices 0..n-1.

    ``adjacency[i, j]`` is True iff the edge i->j exists; the matrix is
    symmetric when the graph is undirected. ``p`` records the edge
    probability the graph was generated with (metadata only). Instances are
    immutable after construction and safe to share across threads.
    """

    n: int
    directed: bool
    adjacency: np.ndarray
    p: float

    def __post_init__(self):
        a = self.adjacency
        if a.dtype != np.bool_ or a.shape != (self.n, self.n):
            raise ValueError("adjacency must be an (n, n) boolean matrix")
        if a.diagonal().any():
            raise ValueError("self-loops are not allowed")
        if not self.directed and not np.array_equal(a, a.T):
            raise ValueError("undirected adjacency must be symmetric")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"edge probability {self.p} outside [0, 1]")
        a.setflags(write=False)

    def _check_vertex(self, v: int):
        if not 0 <= v < self.n:
            raise ValueError(f"vertex {v} out of range for n={self.n}")

    def degree(self, v: int) -> int:
        """Total degree: neighbor count, or in-degree + out-degree if directed."""
        self._check_vertex(v)
        if self.directed:
            return int(self.adjacency[v].sum() + self.adjacency[:, v].sum())
        return int(self.adjacency[v].sum())

    def degrees(self) -> np.ndarray:
        """Total degree of every vertex at once."""
        out = self.adjacency.sum(axis=1, dtype=np.int64)
        if self.directed:
            out = out + self.adjacency.sum(axis=0, dtype=np.int64)
        return out

    def neighbors(self, v: int) -> np.ndarray:
        """Adjacent vertices; for directed graphs the union of in- and out-neighbors."""
        self._check_vertex(v)
        row = self.adjacency[v]
        if self.directed:
            row = row | self.adjacency[:, v]
        return np.flatnonzero(row)

    def weak_adjacency(self) -> np.ndarray:
        """Symmetric adjacency ``A | A.T`` (equals ``adjacency`` when undirected)."""
        if self.directed:
            return self.adjacency | self.adjacency.T
        return self.adjacency

    def num_edges(self) -> int:
        total = int(self.adjacency.sum())
        return total if self.directed else total // 2


def gen_gnp(n: int, p: float, directed: bool = False, seed=0) -> Graph:
    """Sample a G(n, p) graph: every (ordered, if directed) pair carries an
    edge independently with probability p. Bit-identical output per seed.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"edge probability {p} outside [0, 1]")
    rng = _rng(seed)
    draws = rng.random((n, n))
    if directed:
        adj = draws < p
        np.fill_diagonal(adj, False)
    else:
        upper = np.triu(draws < p, k=1)
        adj = upper | upper.T
    return Graph(n=n, directed=directed, adjacency=adj, p=float(p))
