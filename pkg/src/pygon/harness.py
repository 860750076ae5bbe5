"""Experiment engine: the rotating-fold protocol, recovery metrics,
threshold sweeps, sqrt-scaling regression and the two ablations, all
reproducible from a single master seed.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .cleaning import clean, top_candidates
from .features import (FeatureMatrix, degree_features, fit_normalization,
                       identity_features, motif3_features, normalize)
from .graphs import derive_seed
from .model import TrainConfig, predict, train
from .planting import SubgraphKind, generate_dataset

__all__ = [
    "FEATURE_SETS",
    "ExperimentConfig",
    "ExperimentResult",
    "SweepResult",
    "recovery_metric",
    "build_feature_matrices",
    "run_cross_validation",
    "threshold_sweep",
    "sqrt_regression",
    "ablation_edge_correction",
    "ablation_loss",
]

log = logging.getLogger("pygon.harness")

FEATURE_SETS = ("degrees", "motifs3", "identity", "both")


@dataclass
class ExperimentConfig:
    """One planted-recovery experiment: dataset parameters, feature choice,
    training settings and the master seed everything derives from."""

    kind: SubgraphKind
    n: int
    p: float
    k: int
    graphs: int = 20
    folds: int = 5
    feature_set: str = "motifs3"
    train: TrainConfig = field(default_factory=TrainConfig)
    master_seed: int = 0
    edge_correction: bool = True
    run_cleaning: bool = True

    def __post_init__(self):
        if self.feature_set not in FEATURE_SETS:
            raise ValueError(f"feature_set must be one of {FEATURE_SETS}")
        if self.folds < 3:
            raise ValueError("need at least 3 folds for disjoint train/eval/test")
        if self.graphs % self.folds != 0:
            raise ValueError("graphs must be divisible by folds")
        if 2 * self.k > self.n:
            raise ValueError("recovery over top-2k needs 2k <= n")


def recovery_metric(scores: np.ndarray, planted: np.ndarray, k: int) -> float:
    """Fraction of the planted set caught in the 2k highest scores."""
    if len(planted) != k:
        raise ValueError("planted set size must equal k")
    cands = top_candidates(scores, 2 * k)  # raises when 2k > n
    caught = np.intersect1d(cands.vertices, planted).size
    return caught / k


def build_feature_matrices(dataset, feature_set: str):
    """Raw per-graph features for a whole dataset, plus joint normalization.

    Returns (normalized matrices, stats); identity features pass through
    untouched with stats None.
    """
    if feature_set == "identity":
        return [identity_features(inst.graph.n) for inst in dataset], None
    raw = []
    for inst in dataset:
        parts = []
        if feature_set in ("degrees", "both"):
            parts.append(degree_features(inst.graph))
        if feature_set in ("motifs3", "both"):
            parts.append(motif3_features(inst.graph))
        values = np.hstack([p.values for p in parts])
        names = tuple(name for p in parts for name in p.feature_names)
        raw.append(FeatureMatrix(values, names))
    stats = fit_normalization(raw)
    return normalize(raw, stats), stats


@dataclass
class ExperimentResult:
    """Cross-validation outcome: one row per graph in its test role, plus
    per-fold summaries and everything needed to regenerate the run."""

    config: ExperimentConfig
    rows: list                 # dicts: fold, graph_index, recovery, clean_success
    fold_recoveries: list      # list (per fold) of per-graph recovery lists
    fold_params: list          # trained (beta, gamma) per fold
    fold_epochs: list          # (epochs_run, best_epoch) per fold
    mean_recovery: float
    std_recovery: float
    clean_success_rate: float | None
    wall_time_s: float
    master_seed: int


def _fold_indices(graphs: int, folds: int):
    size = graphs // folds
    return [list(range(f * size, (f + 1) * size)) for f in range(folds)]


def run_cross_validation(cfg: ExperimentConfig) -> ExperimentResult:
    """Generate the dataset once, rotate folds so every graph is tested
    exactly once, train per rotation and average test recovery."""
    started = time.perf_counter()
    dataset = generate_dataset(cfg.n, cfg.p, cfg.kind, cfg.k, cfg.graphs,
                               seed=derive_seed(cfg.master_seed, 0))
    feats, _ = build_feature_matrices(dataset, cfg.feature_set)
    folds = _fold_indices(cfg.graphs, cfg.folds)

    rows = []
    fold_recoveries, fold_params, fold_epochs = [], [], []
    clean_successes = []
    for rotation in range(cfg.folds):
        test_idx = folds[rotation]
        eval_idx = folds[(rotation + 1) % cfg.folds]
        train_idx = [i for f, fold in enumerate(folds)
                     if f not in (rotation, (rotation + 1) % cfg.folds) for i in fold]
        seed = int(derive_seed(cfg.master_seed, 1, rotation).generate_state(1, np.uint64)[0])
        fold_cfg = replace(cfg.train, seed=seed)
        model, history = train([(dataset[i], feats[i]) for i in train_idx],
                               [(dataset[i], feats[i]) for i in eval_idx],
                               fold_cfg, edge_correction=cfg.edge_correction)
        fold_params.append((model.beta, model.gamma))
        fold_epochs.append((history.epochs_run, history.best_epoch))

        recoveries = []
        for i in test_idx:
            inst = dataset[i]
            scores = predict(model, inst.graph, feats[i])
            rec = recovery_metric(scores, inst.planted, cfg.k)
            recoveries.append(rec)
            row = {"fold": rotation, "graph_index": i, "recovery": rec}
            if cfg.run_cleaning:
                cands = top_candidates(scores, 2 * cfg.k)
                result = clean(inst.graph, cands, cfg.k, kind=cfg.kind)
                exact = bool(result.success and np.array_equal(result.vertices, inst.planted))
                clean_successes.append(exact)
                row["clean_success"] = exact
            rows.append(row)
        fold_recoveries.append(recoveries)
        log.info("fold %d/%d (%s n=%d k=%d): %d epochs, test recovery %.3f",
                 rotation + 1, cfg.folds, cfg.kind.label(), cfg.n, cfg.k,
                 history.epochs_run, float(np.mean(recoveries)))

    all_rec = np.array([r["recovery"] for r in rows])
    return ExperimentResult(
        config=cfg,
        rows=rows,
        fold_recoveries=fold_recoveries,
        fold_params=fold_params,
        fold_epochs=fold_epochs,
        mean_recovery=float(all_rec.mean()),
        std_recovery=float(all_rec.std()),
        clean_success_rate=float(np.mean(clean_successes)) if clean_successes else None,
        wall_time_s=time.perf_counter() - started,
        master_seed=cfg.master_seed,
    )


@dataclass
class SweepResult:
    """Smallest k whose mean recovery reaches one half, plus the whole curve."""

    threshold_k: int | None
    rows: list
    results: list


def threshold_sweep(cfg: ExperimentConfig, k_range) -> SweepResult:
    """Cross-validate every k in ascending k_range; the sweep threshold is
    the first k with mean recovery >= 0.5 ("above range" when none has)."""
    k_values = list(k_range)
    if k_values != sorted(k_values):
        raise ValueError("k_range must be ascending")
    rows, results = [], []
    threshold_k = None
    for k in k_values:
        res = run_cross_validation(replace(cfg, k=int(k)))
        results.append(res)
        per_graph = [r["recovery"] for r in res.rows]
        rows.append({
            "kind": cfg.kind.label(),
            "n": cfg.n,
            "p": cfg.p,
            "k": int(k),
            "feature_set": cfg.feature_set,
            "mean_recovery": res.mean_recovery,
            "std_recovery": res.std_recovery,
            "clean_success_rate": res.clean_success_rate,
            "median_recovery": float(np.median(per_graph)),
            "seed": cfg.master_seed,
        })
        if threshold_k is None and res.mean_recovery >= 0.5:
            threshold_k = int(k)
    return SweepResult(threshold_k=threshold_k, rows=rows, results=results)


def sqrt_regression(points) -> float:
    """Least-squares alpha for k ~ alpha * sqrt(n): alpha = sum(k sqrt(n)) / sum(n)."""
    pts = list(points)
    if not pts:
        raise ValueError("regression needs at least one (n, k) point")
    num = sum(k * math.sqrt(n) for n, k in pts)
    den = sum(n for n, _ in pts)
    return num / den


def ablation_edge_correction(cfg: ExperimentConfig):
    """The same cross-validation with and without the (1-p)/p edge weight
    factor; identical dataset and seeds, only the message matrix differs."""
    with_mu = run_cross_validation(replace(cfg, edge_correction=True))
    without_mu = run_cross_validation(replace(cfg, edge_correction=False))
    return with_mu, without_mu


def ablation_loss(cfg: ExperimentConfig, grid):
    """One cross-validation per (c1, c2) pair; (0, 0) is the plain WBCE arm."""
    settings = list(grid)
    if not settings:
        raise ValueError("loss ablation needs a non-empty (c1, c2) grid")
    out = []
    for c1, c2 in settings:
        tc = replace(cfg.train, loss_c1=float(c1), loss_c2=float(c2))
        out.append(((float(c1), float(c2)), run_cross_validation(replace(cfg, train=tc))))
    return out
