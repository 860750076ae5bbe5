"""Per-vertex topological input features and their normalization.

Raw features are integer counts (total degree, 3-vertex motif memberships).
Normalization maps x -> log10(max(1e-10, x)) and then z-scores each column
with statistics pooled over every vertex of every graph passed in together.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import Graph

__all__ = [
    "FeatureMatrix",
    "NormalizationStats",
    "degree_features",
    "motif3_features",
    "identity_features",
    "fit_normalization",
    "normalize",
    "apply_normalization",
]

LOG_FLOOR = 1e-10

UNDIRECTED_MOTIF_NAMES = ("path3", "triangle")
# Connected directed triplets bucketed by underlying shape (2-edge path or
# triangle) and by how many of their connected pairs are reciprocal (0/1/2+).
DIRECTED_MOTIF_NAMES = (
    "path3_recip0",
    "path3_recip1",
    "path3_recip2plus",
    "triangle_recip0",
    "triangle_recip1",
    "triangle_recip2plus",
)


@dataclass(frozen=True)
class FeatureMatrix:
    """n x f matrix of per-vertex feature values plus column labels."""

    values: np.ndarray
    feature_names: tuple
    normalized: bool = False

    def __post_init__(self):
        if self.values.ndim != 2 or self.values.shape[1] != len(self.feature_names):
            raise ValueError("values must be (n, f) with one name per column")
        self.values.setflags(write=False)

    @property
    def n(self) -> int:
        return self.values.shape[0]


def degree_features(g: Graph) -> FeatureMatrix:
    """Single column of total degrees."""
    return FeatureMatrix(g.degrees().reshape(-1, 1), ("degree",))


def motif3_features(g: Graph) -> FeatureMatrix:
    """Counts of connected 3-vertex induced subgraphs each vertex belongs to.

    Undirected: 2 columns (2-edge path, triangle). Directed: 6 columns per
    the bucketing in DIRECTED_MOTIF_NAMES. Disconnected triplets are not
    counted. Exact integer counts; dense matrix products are used for the
    undirected case and per-vertex vectorized scans for the directed one.
    """
    if g.directed:
        return FeatureMatrix(_motif3_directed(g.adjacency), DIRECTED_MOTIF_NAMES)
    return FeatureMatrix(_motif3_undirected(g.adjacency), UNDIRECTED_MOTIF_NAMES)


def _motif3_undirected(adj: np.ndarray) -> np.ndarray:
    # float64 matmul is exact for these counts and much faster than int64
    a = adj.astype(np.float64)
    d = a.sum(axis=1)
    common = a @ a
    triangles = (common * a).sum(axis=1) / 2.0
    # paths through v (two non-adjacent neighbors) plus paths with v as an endpoint
    paths = d * (d - 1) / 2.0 + a @ (d - 1) - 3.0 * triangles
    out = np.stack([paths, triangles], axis=1)
    return np.rint(out).astype(np.int64)


def _motif3_directed(adj: np.ndarray) -> np.ndarray:
    n = adj.shape[0]
    underlying = adj | adj.T
    recip = (adj & adj.T).astype(np.int64)
    counts = np.zeros((n, 6), dtype=np.int64)
    idx = np.arange(n)
    for v in range(n):
        nbrs = np.flatnonzero(underlying[v])
        if nbrs.size == 0:
            continue
        others = np.flatnonzero(~underlying[v] & (idx != v))
        rv = recip[v, nbrs]
        # triplets {v,a,b} with a,b both adjacent to v: triangle when a~b, path (v center) otherwise
        pair_links = underlying[np.ix_(nbrs, nbrs)]
        pair_recips = rv[:, None] + rv[None, :] + recip[np.ix_(nbrs, nbrs)]
        upper = np.triu(np.ones_like(pair_links), k=1)
        tri_hist = np.bincount(pair_recips[pair_links & (upper > 0)], minlength=4)
        center_hist = np.bincount(pair_recips[~pair_links & (upper > 0)], minlength=4)
        # triplets {v,w,u} with v as a path endpoint: w adjacent to v, u adjacent to w only
        end_links = underlying[np.ix_(nbrs, others)]
        end_recips = rv[:, None] + recip[np.ix_(nbrs, others)]
        end_hist = np.bincount(end_recips[end_links], minlength=4)
        path_hist = center_hist + end_hist
        counts[v] = [
            path_hist[0],
            path_hist[1],
            path_hist[2:].sum(),
            tri_hist[0],
            tri_hist[1],
            tri_hist[2:].sum(),
        ]
    return counts


def identity_features(n: int) -> FeatureMatrix:
    """One-hot identity input for feature-free runs; never normalized
    (log/z-scoring one-hot columns would destroy them)."""
    names = tuple(f"onehot_{i}" for i in range(n))
    return FeatureMatrix(np.eye(n), names, normalized=True)


@dataclass(frozen=True)
class NormalizationStats:
    """Per-column mean/std of the log-transformed values, pooled over graphs."""

    feature_names: tuple
    mean: np.ndarray
    std: np.ndarray


def _log_transform(values: np.ndarray) -> np.ndarray:
    return np.log10(np.maximum(LOG_FLOOR, values.astype(np.float64)))


def fit_normalization(mats: list) -> NormalizationStats:
    """Pool the log-transformed values of all graphs and take column stats."""
    _check_consistent(mats)
    pooled = np.vstack([_log_transform(m.values) for m in mats])
    return NormalizationStats(
        feature_names=mats[0].feature_names,
        mean=pooled.mean(axis=0),
        std=pooled.std(axis=0),
    )


def apply_normalization(mat: FeatureMatrix, stats: NormalizationStats) -> FeatureMatrix:
    """log10 floor-clamp then z-score with the given pooled statistics.

    Columns whose pooled std is zero come out as all-zeros.
    """
    if mat.normalized:
        raise ValueError("feature matrix is already normalized")
    if mat.feature_names != stats.feature_names:
        raise ValueError("feature names do not match the normalization statistics")
    logged = _log_transform(mat.values)
    safe_std = np.where(stats.std > 0, stats.std, 1.0)
    z = np.where(stats.std > 0, (logged - stats.mean) / safe_std, 0.0)
    return FeatureMatrix(z, mat.feature_names, normalized=True)


def normalize(mats: list, stats: NormalizationStats | None = None) -> list:
    """Normalize a batch of feature matrices with shared pooled statistics."""
    if stats is None:
        stats = fit_normalization(mats)
    return [apply_normalization(m, stats) for m in mats]


def _check_consistent(mats: list):
    if not mats:
        raise ValueError("no feature matrices given")
    names = mats[0].feature_names
    for m in mats:
        if m.feature_names != names:
            raise ValueError("feature matrices have mismatched columns")
        if m.normalized:
            raise ValueError("feature matrix is already normalized")
