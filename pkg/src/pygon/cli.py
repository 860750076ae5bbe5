"""Command-line entry point wiring generation, features, thresholds,
training, prediction, cleaning and the experiment harness behind
subcommands, a JSON config file and flag overrides.

Progress goes to stderr; results are machine-parsable CSV/JSON on stdout or
under the chosen output directory.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from dataclasses import asdict
from pathlib import Path

log = logging.getLogger("pygon")

CONFIG_KEYS = ("kind", "q", "n", "p", "k", "graphs", "folds", "feature_set",
               "edge_correction", "master_seed", "out", "train")
TRAIN_KEYS = ("max_epochs", "patience", "learning_rate", "l2_coeff", "dropout",
              "hidden_dims", "loss_c1", "loss_c2", "seed")


def _default_run_config() -> dict:
    from .model import TrainConfig

    return {
        "kind": "clique",
        "q": None,
        "n": 256,
        "p": 0.5,
        "k": 48,
        "graphs": 20,
        "folds": 5,
        "feature_set": "motifs3",
        "edge_correction": True,
        "master_seed": 0,
        "out": None,
        "train": asdict(TrainConfig()),
    }


def _load_config_file(path: str) -> dict:
    with open(path) as fh:
        data = json.load(fh)
    unknown = set(data) - set(CONFIG_KEYS)
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    train = data.get("train", {})
    unknown = set(train) - set(TRAIN_KEYS)
    if unknown:
        raise ValueError(f"unknown train config keys: {sorted(unknown)}")
    return data


def _merged_config(args) -> dict:
    """defaults <- config file <- explicit CLI flags."""
    cfg = _default_run_config()
    train_seed_from_file = False
    if getattr(args, "config", None):
        file_cfg = _load_config_file(args.config)
        train = file_cfg.pop("train", {})
        train_seed_from_file = "seed" in train
        cfg.update(file_cfg)
        cfg["train"].update(train)
    overrides = {
        "kind": args.kind, "q": args.q, "n": args.n, "p": args.p, "k": getattr(args, "k", None),
        "graphs": getattr(args, "graphs", None), "folds": getattr(args, "folds", None),
        "feature_set": getattr(args, "features", None), "master_seed": args.seed,
        "out": args.out,
    }
    if getattr(args, "no_edge_correction", False):
        overrides["edge_correction"] = False
    for key, value in overrides.items():
        if value is not None:
            cfg[key] = value
    train_overrides = {
        "max_epochs": getattr(args, "max_epochs", None),
        "patience": getattr(args, "patience", None),
        "learning_rate": getattr(args, "lr", None),
        "l2_coeff": getattr(args, "l2", None),
        "dropout": getattr(args, "dropout", None),
        "hidden_dims": getattr(args, "hidden", None),
        "loss_c1": getattr(args, "c1", None),
        "loss_c2": getattr(args, "c2", None),
    }
    for key, value in train_overrides.items():
        if value is not None:
            cfg["train"][key] = value
    if args.seed is not None or not train_seed_from_file:
        cfg["train"]["seed"] = cfg["master_seed"]
    return cfg


def _experiment_config(cfg: dict):
    from .harness import ExperimentConfig
    from .model import TrainConfig
    from .planting import SubgraphKind

    kind = SubgraphKind.parse(cfg["kind"], cfg.get("q"))
    train = TrainConfig(**cfg["train"])
    return ExperimentConfig(kind=kind, n=int(cfg["n"]), p=float(cfg["p"]), k=int(cfg["k"]),
                            graphs=int(cfg["graphs"]), folds=int(cfg["folds"]),
                            feature_set=cfg["feature_set"], train=train,
                            master_seed=int(cfg["master_seed"]),
                            edge_correction=bool(cfg["edge_correction"]))


def _resolve_out(cfg_out, seed) -> Path:
    base = cfg_out or os.environ.get("PYGON_OUT")
    if base:
        out = Path(base)
    else:
        stamp = time.strftime("%Y%m%d-%H%M%S")
        out = Path("runs") / f"run_{stamp}_seed{seed}"
    out.mkdir(parents=True, exist_ok=True)
    return out


def _maybe_dump_config(args, cfg: dict) -> bool:
    if getattr(args, "dump_config", False):
        print(json.dumps(cfg, indent=2, sort_keys=True))
        return True
    return False


def _parse_int_list(text: str):
    return [int(tok) for tok in text.split(",") if tok]


def _parse_float_list(text: str):
    return [float(tok) for tok in text.split(",") if tok]


def _add_common(parser):
    parser.add_argument("--config", help="JSON run config; flags override file values")
    parser.add_argument("--seed", type=int, default=None, help="master seed")
    parser.add_argument("--out", default=None, help="output directory or file")
    parser.add_argument("--threads", type=int, default=None,
                        help="BLAS thread cap (PYGON_THREADS env works too)")
    parser.add_argument("--dump-config", action="store_true",
                        help="print the fully merged config as JSON and exit")


def _add_experiment_flags(parser, need_k=True):
    parser.add_argument("--kind", choices=["clique", "dac", "twoplex", "biclique", "dense"],
                        default=None)
    parser.add_argument("--q", type=float, default=None, help="inner edge probability (dense kind)")
    parser.add_argument("--n", type=int, default=None)
    parser.add_argument("--p", type=float, default=None)
    if need_k:
        parser.add_argument("--k", type=int, default=None)
    parser.add_argument("--graphs", type=int, default=None)
    parser.add_argument("--folds", type=int, default=None)
    parser.add_argument("--features", choices=["degrees", "motifs3", "identity", "both"],
                        default=None)
    parser.add_argument("--no-edge-correction", action="store_true")
    parser.add_argument("--max-epochs", type=int, default=None)
    parser.add_argument("--patience", type=int, default=None)
    parser.add_argument("--lr", type=float, default=None)
    parser.add_argument("--l2", type=float, default=None)
    parser.add_argument("--dropout", type=float, default=None)
    parser.add_argument("--hidden", type=_parse_int_list, default=None,
                        help="hidden layer sizes, comma separated")
    parser.add_argument("--c1", type=float, default=None)
    parser.add_argument("--c2", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pygon",
        description="Recover planted dense subgraphs in G(n, p) with a trained GCN.")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a dataset of planted instances")
    _add_common(gen)
    _add_experiment_flags(gen)
    gen.add_argument("--count", type=int, default=None, help="number of graphs (default 20)")

    feat = sub.add_parser("features", help="compute and cache per-vertex features")
    _add_common(feat)
    feat.add_argument("--data", required=True, help="instance file or directory of them")
    feat.add_argument("--features", choices=["degrees", "motifs3", "identity", "both"],
                      default="motifs3")

    thr = sub.add_parser("thresholds", help="detection threshold table as CSV")
    _add_common(thr)
    thr.add_argument("--kind", default="all",
                     choices=["clique", "dac", "twoplex", "biclique", "dense", "all"])
    thr.add_argument("--n", type=_parse_int_list, required=True, help="comma separated sizes")
    thr.add_argument("--p", type=_parse_float_list, required=True,
                     help="comma separated probabilities")
    thr.add_argument("--q", type=float, default=0.9)

    tr = sub.add_parser("train", help="train a model on a saved dataset")
    _add_common(tr)
    _add_experiment_flags(tr, need_k=False)
    tr.add_argument("--data", required=True, help="directory of instance files")
    tr.add_argument("--eval-count", type=int, default=None,
                    help="graphs held out for early stopping (default count/5)")
    tr.add_argument("--model-out", default="model.json")

    pr = sub.add_parser("predict", help="score the vertices of one graph")
    _add_common(pr)
    pr.add_argument("--model", required=True)
    pr.add_argument("--graph", required=True)

    cl = sub.add_parser("clean", help="recover the exact set from scores")
    _add_common(cl)
    cl.add_argument("--graph", required=True)
    cl.add_argument("--scores", required=True, help="CSV from predict (vertex,score)")
    cl.add_argument("--k", type=int, required=True)
    cl.add_argument("--kind", choices=["clique", "dac", "twoplex", "biclique", "dense"],
                    default=None, help="pattern check (default: instance kind, else clique)")
    cl.add_argument("--q", type=float, default=None)
    cl.add_argument("--max-rounds", type=int, default=30)

    xv = sub.add_parser("xval", help="full cross-validation experiment")
    _add_common(xv)
    _add_experiment_flags(xv)

    sw = sub.add_parser("sweep", help="threshold sweep over a k range")
    _add_common(sw)
    _add_experiment_flags(sw, need_k=False)
    sw.add_argument("--k-range", required=True, help="LO:HI inclusive, step 1")

    rp = sub.add_parser("report", help="regression table and SVG plots from sweep CSVs")
    _add_common(rp)
    rp.add_argument("--sweep", nargs="+", required=True, help="sweep.csv files")

    return parser


def _setup(args):
    logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(message)s")
    threads = args.threads if getattr(args, "threads", None) else os.environ.get("PYGON_THREADS")
    if threads:
        try:
            from threadpoolctl import threadpool_limits

            threadpool_limits(limits=int(threads))
        except ImportError:
            log.warning("threadpoolctl not installed; --threads ignored")


def cmd_generate(args) -> int:
    from .planting import generate_dataset
    from .storage import save_instance

    cfg = _merged_config(args)
    if args.count is not None:
        cfg["graphs"] = args.count
    if _maybe_dump_config(args, cfg):
        return 0
    from .planting import SubgraphKind

    kind = SubgraphKind.parse(cfg["kind"], cfg.get("q"))
    out = _resolve_out(cfg["out"], cfg["master_seed"])
    dataset = generate_dataset(int(cfg["n"]), float(cfg["p"]), kind, int(cfg["k"]),
                               int(cfg["graphs"]), seed=int(cfg["master_seed"]))
    for i, inst in enumerate(dataset):
        save_instance(out / f"graph_{i:03d}.txt", inst)
    log.info("wrote %d instances to %s", len(dataset), out)
    return 0


def _instance_paths(data: str):
    path = Path(data)
    if path.is_dir():
        files = sorted(p for p in path.iterdir()
                       if p.suffix == ".txt" and not p.name.endswith(".features.csv"))
        if not files:
            raise ValueError(f"no instance files under {path}")
        return files
    return [path]


def _raw_features(g, feature_set):
    import numpy as np

    from .features import (FeatureMatrix, degree_features, identity_features,
                           motif3_features)

    if feature_set == "identity":
        return identity_features(g.n)
    parts = []
    if feature_set in ("degrees", "both"):
        parts.append(degree_features(g))
    if feature_set in ("motifs3", "both"):
        parts.append(motif3_features(g))
    return FeatureMatrix(np.hstack([p.values for p in parts]),
                         tuple(name for p in parts for name in p.feature_names))


def _graph_of(obj):
    from .planting import PlantedInstance

    return obj.graph if isinstance(obj, PlantedInstance) else obj


def cmd_features(args) -> int:
    from .storage import load_instance, save_features

    # caches are raw counts; normalization is experiment-scoped and pooled
    paths = _instance_paths(args.data)
    out_dir = Path(args.out) if args.out else None
    for path in paths:
        mat = _raw_features(_graph_of(load_instance(path)), args.features)
        target = (out_dir or path.parent) / (path.stem + ".features.csv")
        save_features(target, mat)
        log.info("cached %s", target)
    return 0


def cmd_thresholds(args) -> int:
    import csv as _csv

    from .planting import SubgraphKind
    from .thresholds import ThresholdQuery, closed_form_threshold, threshold_scan

    kinds = ["clique", "dac", "twoplex", "biclique", "dense"] if args.kind == "all" else [args.kind]
    rows = []
    for label in kinds:
        kind = SubgraphKind.parse(label, args.q if label == "dense" else None)
        for n in args.n:
            for p in args.p:
                query = ThresholdQuery(kind=kind, n=n, p=p)
                rows.append({
                    "kind": label, "n": n, "p": p,
                    "q": args.q if label == "dense" else "",
                    "k_scan": threshold_scan(query),
                    "k_closed_form": repr(closed_form_threshold(query)),
                })
    target = open(args.out, "w", newline="") if args.out else sys.stdout
    writer = _csv.DictWriter(target, fieldnames=["kind", "n", "p", "q", "k_scan", "k_closed_form"])
    writer.writeheader()
    writer.writerows(rows)
    if args.out:
        target.close()
    return 0


def cmd_train(args) -> int:
    from .harness import build_feature_matrices
    from .model import save_checkpoint, train
    from .storage import load_instance

    cfg = _merged_config(args)
    if _maybe_dump_config(args, cfg):
        return 0
    paths = _instance_paths(args.data)
    dataset = [load_instance(p) for p in paths]
    feature_set = cfg["feature_set"]
    feats, stats = build_feature_matrices(dataset, feature_set)
    eval_count = args.eval_count or max(1, len(dataset) // 5)
    if eval_count >= len(dataset):
        raise ValueError("eval split leaves no training graphs")
    pairs = list(zip(dataset, feats))
    train_pairs, eval_pairs = pairs[:-eval_count], pairs[-eval_count:]
    from .model import TrainConfig

    tc = TrainConfig(**cfg["train"])
    model, history = train(train_pairs, eval_pairs, tc,
                           edge_correction=bool(cfg["edge_correction"]))
    save_checkpoint(args.model_out, model, stats=stats, feature_set=feature_set,
                    train_config=tc)
    log.info("trained %d epochs (best %d, eval loss %.6f); wrote %s",
             history.epochs_run, history.best_epoch, history.best_eval_loss, args.model_out)
    return 0


def cmd_predict(args) -> int:
    from .features import apply_normalization
    from .model import load_checkpoint, predict
    from .storage import load_instance

    ckpt = load_checkpoint(args.model)
    g = _graph_of(load_instance(args.graph))
    feats = _raw_features(g, ckpt.feature_set)
    if ckpt.feature_set != "identity":
        feats = apply_normalization(feats, ckpt.stats)
    scores = predict(ckpt.model, g, feats)
    target = open(args.out, "w") if args.out else sys.stdout
    target.write("vertex,score\n")
    for v, s in enumerate(scores):
        target.write(f"{v},{float(s)!r}\n")
    if args.out:
        target.close()
    return 0


def cmd_clean(args) -> int:
    import csv as _csv

    import numpy as np

    from .cleaning import clean, top_candidates
    from .planting import CLIQUE, SubgraphKind
    from .storage import load_instance

    obj = load_instance(args.graph)
    g = _graph_of(obj)
    with open(args.scores, newline="") as fh:
        reader = _csv.DictReader(fh)
        pairs = sorted((int(r["vertex"]), float(r["score"])) for r in reader)
    scores = np.asarray([s for _, s in pairs])
    if args.kind:
        kind = SubgraphKind.parse(args.kind, args.q)
    elif hasattr(obj, "kind"):
        kind = obj.kind
    else:
        kind = CLIQUE
    cands = top_candidates(scores, min(2 * args.k, g.n))
    result = clean(g, cands, args.k, kind=kind, max_rounds=args.max_rounds)
    print(json.dumps({
        "recovered": [int(v) for v in result.vertices],
        "success": bool(result.success),
        "rounds": result.rounds,
    }))
    return 0


def cmd_xval(args) -> int:
    from .harness import run_cross_validation
    from .report import write_xval_csv

    cfg = _merged_config(args)
    if _maybe_dump_config(args, cfg):
        return 0
    ec = _experiment_config(cfg)
    out = _resolve_out(cfg["out"], ec.master_seed)
    result = run_cross_validation(ec)
    write_xval_csv(out / "results.csv", result)
    summary = {
        "mean_recovery": result.mean_recovery,
        "std_recovery": result.std_recovery,
        "clean_success_rate": result.clean_success_rate,
        "fold_params": result.fold_params,
        "fold_epochs": result.fold_epochs,
        "wall_time_s": result.wall_time_s,
        "master_seed": result.master_seed,
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2))
    (out / "config.json").write_text(json.dumps(cfg, indent=2, sort_keys=True))
    log.info("mean recovery %.4f (clean %.3s) -> %s", result.mean_recovery,
             str(result.clean_success_rate), out)
    return 0


def cmd_sweep(args) -> int:
    from .harness import threshold_sweep
    from .report import plot_recovery_curve, write_sweep_csv

    cfg = _merged_config(args)
    lo, hi = (int(tok) for tok in args.k_range.split(":"))
    cfg["k"] = lo
    if _maybe_dump_config(args, cfg):
        return 0
    ec = _experiment_config(cfg)
    out = _resolve_out(cfg["out"], ec.master_seed)
    sweep = threshold_sweep(ec, range(lo, hi + 1))
    write_sweep_csv(out / "sweep.csv", sweep.rows)
    plot_recovery_curve(sweep.rows, out / "sweep.svg")
    summary = {
        "threshold_k": sweep.threshold_k,
        "above_range": sweep.threshold_k is None,
        "median_recoveries": {row["k"]: row["median_recovery"] for row in sweep.rows},
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2))
    (out / "config.json").write_text(json.dumps(cfg, indent=2, sort_keys=True))
    log.info("sweep threshold: %s -> %s", sweep.threshold_k, out)
    return 0


def cmd_report(args) -> int:
    from .harness import sqrt_regression
    from .report import (plot_recovery_curve, plot_threshold_scaling,
                         read_sweep_csv, write_regression_csv)

    out = _resolve_out(args.out, 0)
    all_rows = []
    for path in args.sweep:
        all_rows.extend(read_sweep_csv(path))
    plot_recovery_curve(all_rows, out / "recovery.svg")

    points_by_fs = {}
    for path in args.sweep:
        rows = read_sweep_csv(path)
        passing = [r for r in rows if float(r["mean_recovery"]) >= 0.5]
        if not passing:
            continue
        best = min(passing, key=lambda r: int(r["k"]))
        key = best["feature_set"]
        points_by_fs.setdefault(key, []).append((int(best["n"]), int(best["k"])))
    entries = [(fs, sqrt_regression(pts), pts) for fs, pts in sorted(points_by_fs.items())]
    write_regression_csv(out / "regression.csv", entries)
    if points_by_fs:
        plot_threshold_scaling(points_by_fs, out / "scaling.svg")
    log.info("report written to %s", out)
    return 0


_COMMANDS = {
    "generate": cmd_generate,
    "features": cmd_features,
    "thresholds": cmd_thresholds,
    "train": cmd_train,
    "predict": cmd_predict,
    "clean": cmd_clean,
    "xval": cmd_xval,
    "sweep": cmd_sweep,
    "report": cmd_report,
}


def dispatch(argv) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _setup(args)
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, OSError, KeyError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1


def main():
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
