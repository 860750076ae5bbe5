"""Result tables and plots: deterministic CSV writers for sweep and
regression outputs, and SVG line charts rendered from those tables."""

from __future__ import annotations

import csv
import math

__all__ = [
    "SWEEP_COLUMNS",
    "write_sweep_csv",
    "read_sweep_csv",
    "write_xval_csv",
    "write_regression_csv",
    "plot_recovery_curve",
    "plot_threshold_scaling",
]

SWEEP_COLUMNS = ("kind", "n", "p", "k", "feature_set", "mean_recovery",
                 "std_recovery", "clean_success_rate", "seed")
XVAL_COLUMNS = ("fold", "graph_index", "recovery", "clean_success", "seed")


def _cell(value):
    if value is None:
        return ""
    if hasattr(value, "item"):  # numpy scalar
        value = value.item()
    if isinstance(value, bool):
        return int(value)
    if isinstance(value, float):
        return repr(value)
    return value


def write_sweep_csv(path, rows):
    """One row per swept k with the standard sweep columns."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SWEEP_COLUMNS)
        for row in rows:
            writer.writerow([_cell(row.get(col)) for col in SWEEP_COLUMNS])


def read_sweep_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def write_xval_csv(path, result):
    """One row per graph in its test role for a single cross-validation."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(XVAL_COLUMNS)
        for row in result.rows:
            record = dict(row, seed=result.master_seed)
            writer.writerow([_cell(record.get(col)) for col in XVAL_COLUMNS])


def write_regression_csv(path, entries):
    """entries: (feature_set, alpha, points) with points a list of (n, k)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("feature_set", "alpha", "points"))
        for feature_set, alpha, points in entries:
            encoded = ";".join(f"{n}:{k}" for n, k in points)
            writer.writerow((feature_set, _cell(float(alpha)), encoded))


def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def plot_recovery_curve(rows, path):
    """Mean recovery (with a std band) against k from sweep rows."""
    plt = _pyplot()
    groups = {}
    for row in rows:
        key = (row["kind"], row["feature_set"])
        groups.setdefault(key, []).append(
            (int(row["k"]), float(row["mean_recovery"]), float(row["std_recovery"])))
    fig, ax = plt.subplots(figsize=(6, 4))
    for (kind, feature_set), pts in sorted(groups.items()):
        pts.sort()
        ks = [p[0] for p in pts]
        means = [p[1] for p in pts]
        stds = [p[2] for p in pts]
        ax.plot(ks, means, marker="o", label=f"{kind} / {feature_set}")
        ax.fill_between(ks, [m - s for m, s in zip(means, stds)],
                        [m + s for m, s in zip(means, stds)], alpha=0.2)
    ax.axhline(0.5, color="grey", linestyle=":", linewidth=1)
    ax.set_xlabel("planted size k")
    ax.set_ylabel("mean recovery in top 2k")
    ax.set_ylim(-0.02, 1.02)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def plot_threshold_scaling(points_by_feature_set, path):
    """Sweep threshold k against n with the fitted alpha*sqrt(n) overlay."""
    from .harness import sqrt_regression

    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    for feature_set, points in sorted(points_by_feature_set.items()):
        pts = sorted(points)
        ns = [p[0] for p in pts]
        ks = [p[1] for p in pts]
        alpha = sqrt_regression(pts)
        ax.plot(ns, ks, marker="o", linestyle="none", label=f"{feature_set} thresholds")
        grid = [ns[0] + i * (ns[-1] - ns[0]) / 99 for i in range(100)] if len(ns) > 1 else ns
        ax.plot(grid, [alpha * math.sqrt(x) for x in grid], linestyle="--",
                label=f"{feature_set}: {alpha:.3f} sqrt(n)")
    ax.set_xlabel("graph size n")
    ax.set_ylabel("sweep threshold k")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
