"""From model scores to the exact planted set: top-score candidate selection,
a spectral seed on the signed candidate matrix, and iterative reselection of
the k best-connected vertices until the induced pattern checks out.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import Graph
from .planting import CLIQUE, PlantedInstance, SubgraphKind, verify_pattern

__all__ = [
    "CandidateSet",
    "top_candidates",
    "PowerIterationResult",
    "power_iteration",
    "signed_candidate_matrix",
    "refinement_round",
    "CleanResult",
    "clean",
]


@dataclass(frozen=True)
class CandidateSet:
    """Vertices ordered by descending score (ties broken by ascending index)."""

    vertices: np.ndarray
    source_scores: np.ndarray

    def __len__(self):
        return len(self.vertices)


def top_candidates(scores: np.ndarray, m: int) -> CandidateSet:
    """The m highest-scoring vertices; equal scores resolve to lower indices."""
    scores = np.asarray(scores, dtype=np.float64)
    if m > scores.shape[0]:
        raise ValueError(f"asked for {m} candidates from {scores.shape[0]} vertices")
    order = np.argsort(-scores, kind="stable")[:m]
    return CandidateSet(vertices=order, source_scores=scores[order])


@dataclass(frozen=True)
class PowerIterationResult:
    vector: np.ndarray
    value: float
    converged: bool


def power_iteration(matrix: np.ndarray, max_iters: int = 1000, tol: float = 1e-10) -> PowerIterationResult:
    """Dominant eigenpair (largest |eigenvalue|) of a symmetric matrix.

    Starts from the all-ones vector and renormalizes every step; stops when
    successive iterates agree up to sign within tol (sign flips every step
    when the dominant eigenvalue is negative), or flags non-convergence at
    max_iters and returns the last iterate anyway.
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.shape[0] != matrix.shape[1]:
        raise ValueError("matrix must be square")
    if max_iters < 1:
        raise ValueError("max_iters must be positive")
    n = matrix.shape[0]
    vec = np.ones(n) / np.sqrt(n)
    converged = False
    for _ in range(max_iters):
        nxt = matrix @ vec
        norm = np.linalg.norm(nxt)
        if norm == 0.0:
            break  # start vector in the nullspace; nothing to iterate on
        nxt /= norm
        if min(np.linalg.norm(nxt - vec), np.linalg.norm(nxt + vec)) < tol:
            vec = nxt
            converged = True
            break
        vec = nxt
    value = float(vec @ (matrix @ vec))
    return PowerIterationResult(vector=vec, value=value, converged=converged)


def signed_candidate_matrix(g: Graph, vertices: np.ndarray) -> np.ndarray:
    """Symmetric +/-1 matrix over the candidate rows/columns: +1 where the
    unordered pair is weakly adjacent, -1 where it is not, +1 diagonal."""
    weak = g.weak_adjacency()
    signed = np.where(weak[np.ix_(vertices, vertices)], 1.0, -1.0)
    np.fill_diagonal(signed, 1.0)
    return signed


def refinement_round(g: Graph, subset: np.ndarray, k: int) -> np.ndarray:
    """Reselect the k vertices of the whole graph with the most weak
    connections into ``subset`` (ties to lower indices); returns them sorted."""
    connections = g.weak_adjacency()[:, subset].sum(axis=1)
    order = np.lexsort((np.arange(g.n), -connections))
    return np.sort(order[:k])


@dataclass(frozen=True)
class CleanResult:
    """Recovered vertex set (sorted), whether it passed the pattern check,
    and how many reselection rounds were used."""

    vertices: np.ndarray
    success: bool
    rounds: int
    power_converged: bool


def _passes(g: Graph, subset: np.ndarray, kind: SubgraphKind) -> bool:
    labels = np.zeros(g.n, dtype=np.int8)
    labels[subset] = 1
    probe = PlantedInstance(graph=g, planted=subset, kind=kind, labels=labels)
    return verify_pattern(probe)


def clean(g: Graph, cands: CandidateSet, k: int, kind: SubgraphKind = CLIQUE,
          max_rounds: int = 30) -> CleanResult:
    """Recover the exact planted set from a candidate list.

    Builds the signed candidate matrix (+1 for weakly adjacent pairs, -1
    otherwise, +1 diagonal), seeds T* with the k candidates largest in the
    dominant eigenvector by absolute entry, then repeatedly reselects the k
    vertices of the whole graph with the most weak connections into T* until
    the induced subgraph passes the pattern check for ``kind`` or max_rounds
    refinements have run. Ties always resolve to lower vertex indices.
    """
    verts = np.asarray(cands.vertices)
    if len(verts) < k:
        raise ValueError(f"need at least k={k} candidates, got {len(verts)}")
    power = power_iteration(signed_candidate_matrix(g, verts))
    order = np.lexsort((verts, -np.abs(power.vector)))
    current = np.sort(verts[order[:k]])

    rounds = 0
    while True:
        if _passes(g, current, kind):
            return CleanResult(vertices=current, success=True, rounds=rounds,
                               power_converged=power.converged)
        if rounds >= max_rounds:
            return CleanResult(vertices=current, success=False, rounds=rounds,
                               power_converged=power.converged)
        current = refinement_round(g, current, k)
        rounds += 1
