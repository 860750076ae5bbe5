"""Planting target patterns on a random vertex subset and verifying them.

Planting rewrites every pair inside the chosen set S to the target pattern
(pre-existing edges that violate the pattern are removed); edges with at
least one endpoint outside S are never touched.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import Graph, derive_seed

__all__ = [
    "SubgraphKind",
    "CLIQUE",
    "DAC",
    "TWO_PLEX",
    "BICLIQUE",
    "dense_gnq",
    "PlantedInstance",
    "plant",
    "verify_pattern",
    "planted_density",
    "generate_dataset",
]

_VARIANTS = ("clique", "dac", "twoplex", "biclique", "dense")


@dataclass(frozen=True)
class SubgraphKind:
    """One of the five target patterns; ``q`` is only used by the dense kind."""

    variant: str
    q: float | None = None

    def __post_init__(self):
        if self.variant not in _VARIANTS:
            raise ValueError(f"unknown subgraph kind {self.variant!r}")
        if self.variant == "dense":
            if self.q is None or not 0.0 < self.q <= 1.0:
                raise ValueError("dense kind needs a probability q in (0, 1]")
        elif self.q is not None:
            raise ValueError(f"kind {self.variant!r} does not take q")

    @property
    def directed_host(self) -> bool:
        """Directed acyclic cliques live in directed hosts, the rest in undirected ones."""
        return self.variant == "dac"

    def label(self) -> str:
        return self.variant

    @classmethod
    def parse(cls, label: str, q: float | None = None) -> "SubgraphKind":
        label = label.strip().lower()
        if label == "dense":
            return cls("dense", q)
        return cls(label)


CLIQUE = SubgraphKind("clique")
DAC = SubgraphKind("dac")
TWO_PLEX = SubgraphKind("twoplex")
BICLIQUE = SubgraphKind("biclique")


def dense_gnq(q: float) -> SubgraphKind:
    """Dense random block: every pair inside S redrawn with probability q."""
    return SubgraphKind("dense", q)


@dataclass(frozen=True)
class PlantedInstance:
    """A host graph together with the hidden vertex set and its 0/1 labels."""

    graph: Graph
    planted: np.ndarray
    kind: SubgraphKind
    labels: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.planted)
        if len(np.unique(s)) != len(s):
            raise ValueError("planted set contains duplicates")
        y = np.asarray(self.labels)
        if y.shape != (self.graph.n,) or not set(np.unique(y)) <= {0, 1}:
            raise ValueError("labels must be a binary n-vector")
        if int(y.sum()) != len(s) or not y[s].all():
            raise ValueError("labels inconsistent with planted set")

    @property
    def k(self) -> int:
        return len(self.planted)


def _pattern_block(kind: SubgraphKind, k: int, directed: bool, rng: np.random.Generator) -> np.ndarray:
    """k x k adjacency of one random realization of the pattern (zero diagonal)."""
    block = np.zeros((k, k), dtype=bool)
    if kind.variant == "clique":
        block[:] = True
    elif kind.variant == "dac":
        order = rng.permutation(k)
        # every edge from earlier to later in a random order
        for pos in range(k):
            block[order[pos], order[pos + 1:]] = True
    elif kind.variant == "twoplex":
        block[:] = True
        perm = rng.permutation(k)
        for i in range(0, k - 1, 2):  # floor(k/2) disjoint pairs; odd k leaves one vertex full
            a, b = perm[i], perm[i + 1]
            block[a, b] = block[b, a] = False
    elif kind.variant == "biclique":
        perm = rng.permutation(k)
        side = perm[: (k + 1) // 2]
        block[np.ix_(side, np.setdiff1d(perm, side))] = True
        block |= block.T
    elif kind.variant == "dense":
        upper = np.triu(rng.random((k, k)) < kind.q, k=1)
        block = upper | upper.T
    np.fill_diagonal(block, False)
    return block


def plant(g: Graph, kind: SubgraphKind, k: int, seed=0) -> PlantedInstance:
    """Replace the induced subgraph on k random vertices with the pattern.

    The vertex set is drawn uniformly without replacement; the pattern's own
    randomness (DAC order, matching, biclique split, dense draws) comes from
    an independently derived stream.
    """
    if k > g.n:
        raise ValueError(f"cannot plant {k} vertices in a graph of size {g.n}")
    if kind.directed_host != g.directed:
        want = "directed" if kind.directed_host else "undirected"
        raise ValueError(f"kind {kind.label()!r} requires an {want} host graph")
    if kind.variant == "twoplex" and k < 3:
        raise ValueError("2-plex planting needs k >= 3")
    if kind.variant == "biclique" and k < 2:
        raise ValueError("biclique planting needs k >= 2")
    if kind.variant == "dense" and kind.q <= g.p:
        raise ValueError(f"dense pattern needs q > p (got q={kind.q}, p={g.p})")

    select_rng = np.random.default_rng(derive_seed(seed, 0))
    pattern_rng = np.random.default_rng(derive_seed(seed, 1))
    chosen = select_rng.choice(g.n, size=k, replace=False)

    adj = g.adjacency.copy()
    adj[np.ix_(chosen, chosen)] = _pattern_block(kind, k, g.directed, pattern_rng)
    planted = np.sort(chosen)
    labels = np.zeros(g.n, dtype=np.int8)
    labels[planted] = 1
    new_graph = Graph(n=g.n, directed=g.directed, adjacency=adj, p=g.p)
    return PlantedInstance(graph=new_graph, planted=planted, kind=kind, labels=labels)


def verify_pattern(inst: PlantedInstance) -> bool:
    """True iff the induced subgraph on the planted set satisfies the
    structural definition of the instance's kind.

    The dense kind has no structural test (any draw is valid), so it always
    verifies; use :func:`planted_density` for its density report.
    """
    s = inst.planted
    k = len(s)
    sub = inst.graph.adjacency[np.ix_(s, s)]
    if inst.kind.variant == "clique":
        return bool((sub | np.eye(k, dtype=bool)).all())
    if inst.kind.variant == "dac":
        one_direction = (sub ^ sub.T) | np.eye(k, dtype=bool)
        if not one_direction.all() or (sub & sub.T).any():
            return False
        # a tournament is transitive (hence acyclic) iff out-degrees are 0..k-1
        return np.array_equal(np.sort(sub.sum(axis=1)), np.arange(k))
    if inst.kind.variant == "twoplex":
        return bool(sub.sum(axis=1).min() >= k - 2)
    if inst.kind.variant == "biclique":
        first_side = np.flatnonzero(~sub[0])  # vertex 0's side: itself plus its non-neighbors in S
        other_side = np.setdiff1d(np.arange(k), first_side)
        if {len(first_side), len(other_side)} != {(k + 1) // 2, k // 2}:
            return False
        within = sub[np.ix_(first_side, first_side)].any() or sub[np.ix_(other_side, other_side)].any()
        cross = sub[np.ix_(first_side, other_side)].all()
        return bool(not within and cross)
    return True  # dense: no structural constraint


def planted_density(inst: PlantedInstance) -> float:
    """Fraction of present pairs inside the planted set (report for the dense kind)."""
    s = inst.planted
    k = len(s)
    if k < 2:
        return 0.0
    sub = inst.graph.adjacency[np.ix_(s, s)]
    pairs = k * (k - 1) / 2
    if inst.graph.directed:
        return float((sub | sub.T).sum() / 2 / pairs)
    return float(sub.sum() / 2 / pairs)


def generate_dataset(n: int, p: float, kind: SubgraphKind, k: int, count: int, seed=0) -> list:
    """``count`` independent planted instances with per-instance derived seeds."""
    if count < 1:
        raise ValueError("count must be at least 1")
    from .graphs import gen_gnp

    out = []
    for i in range(count):
        g = gen_gnp(n, p, directed=kind.directed_host, seed=derive_seed(seed, i, 0))
        out.append(plant(g, kind, k, seed=derive_seed(seed, i, 1)))
    return out
