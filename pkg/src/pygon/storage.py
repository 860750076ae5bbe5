"""On-disk formats: graph/instance files and per-graph feature caches.

Instance file layout (text, deterministic bytes for a given object):
  line 1           JSON header {"n", "p", "directed", "planted", "kind", "q"}
                   (planted/kind/q are null for a plain graph)
  remaining lines  one edge per line as "u v"; ordered pairs for directed
                   graphs, u < v for undirected, ascending either way
"""

from __future__ import annotations

import csv
import json

import numpy as np

from .features import FeatureMatrix
from .graphs import Graph
from .planting import PlantedInstance, SubgraphKind

__all__ = ["save_instance", "load_instance", "save_features", "load_features"]


def _edge_lines(g: Graph):
    adj = g.adjacency if g.directed else np.triu(g.adjacency, k=1)
    rows, cols = np.nonzero(adj)
    return (f"{u} {v}" for u, v in zip(rows, cols))


def save_instance(path, obj):
    """Write a Graph or PlantedInstance; bytes are identical per object."""
    if isinstance(obj, PlantedInstance):
        g = obj.graph
        header = {
            "n": g.n,
            "p": g.p,
            "directed": g.directed,
            "planted": [int(v) for v in obj.planted],
            "kind": obj.kind.label(),
            "q": obj.kind.q,
        }
    elif isinstance(obj, Graph):
        g = obj
        header = {"n": g.n, "p": g.p, "directed": g.directed,
                  "planted": None, "kind": None, "q": None}
    else:
        raise TypeError(f"cannot persist {type(obj).__name__}")
    with open(path, "w") as fh:
        fh.write(json.dumps(header) + "\n")
        for line in _edge_lines(g):
            fh.write(line + "\n")


def load_instance(path):
    """Read back a Graph (no planted set in the header) or PlantedInstance."""
    with open(path) as fh:
        header = json.loads(fh.readline())
        n, directed = int(header["n"]), bool(header["directed"])
        adj = np.zeros((n, n), dtype=bool)
        for line in fh:
            if not line.strip():
                continue
            u, v = (int(tok) for tok in line.split())
            adj[u, v] = True
            if not directed:
                adj[v, u] = True
    g = Graph(n=n, directed=directed, adjacency=adj, p=float(header["p"]))
    if header.get("planted") is None:
        return g
    planted = np.asarray(sorted(header["planted"]), dtype=np.int64)
    kind = SubgraphKind.parse(header["kind"], header.get("q"))
    labels = np.zeros(n, dtype=np.int8)
    labels[planted] = 1
    return PlantedInstance(graph=g, planted=planted, kind=kind, labels=labels)


def save_features(path, mat: FeatureMatrix):
    """Cache a feature matrix as CSV: header row of names, one row per vertex."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(mat.feature_names)
        for row in mat.values:
            writer.writerow([_fmt(x) for x in row])


def load_features(path, normalized: bool = False) -> FeatureMatrix:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        names = tuple(next(reader))
        values = np.asarray([[float(x) for x in row] for row in reader], dtype=np.float64)
    return FeatureMatrix(values, names, normalized=normalized)


def _fmt(x):
    f = float(x)
    return int(f) if f.is_integer() else repr(f)
