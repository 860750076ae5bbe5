"""Shared test fixtures: small hand-built graphs and independent oracles."""

from itertools import combinations

import numpy as np

from pygon import Graph


def graph_from_edges(n, edges, directed=False, p=0.5):
    adj = np.zeros((n, n), dtype=bool)
    for u, v in edges:
        adj[u, v] = True
        if not directed:
            adj[v, u] = True
    return Graph(n=n, directed=directed, adjacency=adj, p=p)


def complete_graph(n, p=0.5):
    return graph_from_edges(n, combinations(range(n), 2))


def motif3_oracle(g):
    """Naive triple-loop 3-motif census, independent of the library path."""
    adj = g.adjacency
    und = adj | adj.T
    counts = np.zeros((g.n, 6 if g.directed else 2), dtype=np.int64)
    for a, b, c in combinations(range(g.n), 3):
        pairs = [(a, b), (a, c), (b, c)]
        linked = sum(bool(und[u, v]) for u, v in pairs)
        if linked < 2:
            continue  # disconnected triple
        if g.directed:
            recip = sum(bool(adj[u, v] and adj[v, u]) for u, v in pairs)
            col = (0 if linked == 2 else 3) + min(recip, 2)
        else:
            col = 0 if linked == 2 else 1
        for v in (a, b, c):
            counts[v, col] += 1
    return counts


def topological_order(adj_block):
    """Kahn's algorithm on a directed adjacency block; None if a cycle exists."""
    k = adj_block.shape[0]
    indeg = adj_block.sum(axis=0).astype(int)
    ready = [i for i in range(k) if indeg[i] == 0]
    order = []
    while ready:
        v = ready.pop()
        order.append(v)
        for w in np.flatnonzero(adj_block[v]):
            indeg[w] -= 1
            if indeg[w] == 0:
                ready.append(int(w))
    return order if len(order) == k else None
