import numpy as np
import pytest

from pygon import (CLIQUE, ExperimentConfig, TrainConfig,
                   ablation_edge_correction, ablation_loss, gen_gnp, plant,
                   recovery_metric, run_cross_validation, sqrt_regression,
                   threshold_sweep)
from pygon.harness import _fold_indices, build_feature_matrices


def tiny_config(**overrides):
    base = dict(
        kind=CLIQUE, n=48, p=0.5, k=16, graphs=6, folds=3,
        feature_set="degrees",
        train=TrainConfig(max_epochs=6, patience=40, hidden_dims=(8, 6),
                          dropout=0.2, seed=0),
        master_seed=11,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


# ------------------------------------------------------------------ metric

def test_recovery_metric_perfect_and_partial():
    planted = np.arange(5)
    scores = np.zeros(40)
    scores[:5] = 1.0
    assert recovery_metric(scores, planted, 5) == 1.0
    partial = np.zeros(40)
    partial[[0, 1]] = 1.0       # 2 planted vertices rank highest
    partial[10:18] = 0.5        # 8 background fillers complete the top-10
    assert recovery_metric(partial, planted, 5) == pytest.approx(0.4)


def test_recovery_metric_split_exactly_half():
    planted = np.arange(4)
    scores = np.zeros(20)
    scores[[0, 1]] = 1.0        # 2 of 4 planted in the top-8
    scores[10:16] = 0.5
    assert recovery_metric(scores, planted, 4) == 0.5


def test_recovery_metric_random_scores_hypergeometric_mean():
    rng = np.random.default_rng(5)
    planted = np.arange(20)
    values = [recovery_metric(rng.permutation(500) / 500.0, planted, 20)
              for _ in range(1000)]
    # mean of the hypergeometric overlap: 2k/n = 0.08
    assert abs(np.mean(values) - 0.08) < 0.006


def test_recovery_metric_errors():
    with pytest.raises(ValueError):
        recovery_metric(np.zeros(10), np.arange(3), 4)  # |planted| != k
    with pytest.raises(ValueError):
        recovery_metric(np.zeros(10), np.arange(6), 6)  # 2k > n


# -------------------------------------------------------------- regression

def test_sqrt_regression_exact_fit():
    assert sqrt_regression([(100, 10), (400, 20)]) == pytest.approx(1.0, abs=1e-12)


def test_sqrt_regression_single_point():
    assert sqrt_regression([(256, 24)]) == pytest.approx(24 / 16, abs=1e-12)


def test_sqrt_regression_least_squares_value():
    assert sqrt_regression([(100, 10), (400, 24)]) == pytest.approx(1.16, abs=1e-12)


def test_sqrt_regression_matches_closed_form_on_synthetic():
    rng = np.random.default_rng(0)
    pts = [(int(n), float(rng.uniform(5, 40))) for n in rng.integers(50, 5000, size=12)]
    expect = sum(k * np.sqrt(n) for n, k in pts) / sum(n for n, _ in pts)
    assert sqrt_regression(pts) == pytest.approx(expect, abs=1e-12)


def test_sqrt_regression_empty_error():
    with pytest.raises(ValueError):
        sqrt_regression([])


# ---------------------------------------------------------------- protocol

def test_fold_partition_disjoint_and_complete():
    folds = _fold_indices(20, 5)
    flat = [i for fold in folds for i in fold]
    assert sorted(flat) == list(range(20))
    assert all(len(fold) == 4 for fold in folds)


def test_config_validation():
    with pytest.raises(ValueError):
        tiny_config(graphs=7)  # not divisible by folds
    with pytest.raises(ValueError):
        tiny_config(folds=2)
    with pytest.raises(ValueError):
        tiny_config(k=30)  # 2k > n
    with pytest.raises(ValueError):
        tiny_config(feature_set="nope")


def test_build_features_identity_passthrough():
    data = [plant(gen_gnp(12, 0.5, seed=s), CLIQUE, 4, seed=s) for s in range(2)]
    mats, stats = build_feature_matrices(data, "identity")
    assert stats is None
    assert all(m.normalized for m in mats)
    assert np.array_equal(mats[0].values, np.eye(12))


def test_build_features_both_concatenates_and_normalizes():
    data = [plant(gen_gnp(12, 0.5, seed=s), CLIQUE, 4, seed=s) for s in range(3)]
    mats, stats = build_feature_matrices(data, "both")
    assert mats[0].feature_names == ("degree", "path3", "triangle")
    pooled = np.vstack([m.values for m in mats])
    assert np.all(np.abs(pooled.mean(axis=0)) < 1e-9)


def test_cross_validation_protocol_and_determinism():
    cfg = tiny_config()
    result = run_cross_validation(cfg)
    tested = sorted(row["graph_index"] for row in result.rows)
    assert tested == list(range(cfg.graphs))  # each graph tested exactly once
    assert len(result.fold_recoveries) == cfg.folds
    assert all(0.0 <= row["recovery"] <= 1.0 for row in result.rows)
    assert len(result.fold_params) == cfg.folds
    assert result.clean_success_rate is not None

    again = run_cross_validation(tiny_config())
    assert again.rows == result.rows
    assert again.mean_recovery == result.mean_recovery
    assert again.fold_params == result.fold_params


def test_cross_validation_rotations_disjoint():
    folds = _fold_indices(6, 3)
    for rotation in range(3):
        test_f = set(folds[rotation])
        eval_f = set(folds[(rotation + 1) % 3])
        train_f = set(range(6)) - test_f - eval_f
        assert not (test_f & eval_f) and not (test_f & train_f) and not (eval_f & train_f)
        assert len(train_f) == 2


def test_threshold_sweep_easy_range():
    cfg = tiny_config(train=TrainConfig(max_epochs=12, patience=40,
                                        hidden_dims=(8, 6), dropout=0.2, seed=0))
    sweep = threshold_sweep(cfg, [20, 22])
    assert sweep.threshold_k == 20  # easy regime: first k already recovers
    assert [row["k"] for row in sweep.rows] == [20, 22]
    for row in sweep.rows:
        assert row["kind"] == "clique"
        assert 0.0 <= row["mean_recovery"] <= 1.0
        assert row["seed"] == cfg.master_seed


def test_threshold_sweep_above_range():
    cfg = tiny_config(train=TrainConfig(max_epochs=2, patience=40,
                                        hidden_dims=(6,), dropout=0.2, seed=0))
    sweep = threshold_sweep(cfg, [3, 4])
    assert sweep.threshold_k is None  # below the information threshold
    assert len(sweep.rows) == 2


def test_threshold_sweep_rejects_descending_range():
    with pytest.raises(ValueError):
        threshold_sweep(tiny_config(), [5, 4])


def test_ablation_loss_zero_grid_matches_plain_run():
    cfg = tiny_config()
    plain = run_cross_validation(cfg)
    (setting, result), = ablation_loss(cfg, [(0.0, 0.0)])
    assert setting == (0.0, 0.0)
    assert result.rows == plain.rows


def test_ablation_edge_correction_pairs_runs():
    cfg = tiny_config(p=0.4, train=TrainConfig(max_epochs=4, patience=40,
                                               hidden_dims=(6,), dropout=0.2, seed=0))
    with_mu, without_mu = ablation_edge_correction(cfg)
    assert with_mu.config.edge_correction and not without_mu.config.edge_correction
    assert len(with_mu.rows) == len(without_mu.rows) == cfg.graphs


def test_ablation_loss_empty_grid_error():
    with pytest.raises(ValueError):
        ablation_loss(tiny_config(), [])
