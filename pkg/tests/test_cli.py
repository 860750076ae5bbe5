import json
import subprocess
import sys

import pytest

CLI = [sys.executable, "-m", "pygon.cli"]


def run_cli(*args, check=True):
    proc = subprocess.run([*CLI, *args], capture_output=True, text=True)
    if check and proc.returncode != 0:
        raise AssertionError(f"cli failed ({proc.returncode}): {proc.stderr}")
    return proc


def test_no_arguments_usage_exit_2():
    proc = run_cli(check=False)
    assert proc.returncode == 2
    assert "usage" in proc.stderr.lower()


def test_unknown_flag_exit_2():
    proc = run_cli("thresholds", "--bogus", check=False)
    assert proc.returncode == 2


def test_thresholds_csv_row():
    proc = run_cli("thresholds", "--kind", "clique", "--n", "500", "--p", "0.5")
    lines = proc.stdout.strip().splitlines()
    assert lines[0] == "kind,n,p,q,k_scan,k_closed_form"
    kind, n, p, q, k_scan, k_closed = lines[1].split(",")
    assert (kind, n, p, q) == ("clique", "500", "0.5", "")
    assert float(k_closed) == pytest.approx(11.60, abs=0.01)
    assert int(k_scan) >= 2


def test_thresholds_all_kinds():
    proc = run_cli("thresholds", "--kind", "all", "--n", "128,256", "--p", "0.5")
    lines = proc.stdout.strip().splitlines()
    assert len(lines) == 1 + 5 * 2


def test_generate_deterministic_bytes(tmp_path):
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    args = ("generate", "--n", "32", "--p", "0.5", "--kind", "clique", "--k", "8",
            "--count", "3", "--seed", "7")
    run_cli(*args, "--out", str(out_a))
    run_cli(*args, "--out", str(out_b))
    files_a = sorted(p.name for p in out_a.iterdir())
    assert files_a == ["graph_000.txt", "graph_001.txt", "graph_002.txt"]
    for name in files_a:
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes()


def test_generate_dense_includes_q(tmp_path):
    run_cli("generate", "--n", "24", "--p", "0.5", "--kind", "dense", "--q", "0.9",
            "--k", "6", "--count", "1", "--seed", "1", "--out", str(tmp_path))
    header = json.loads((tmp_path / "graph_000.txt").read_text().splitlines()[0])
    assert header["kind"] == "dense" and header["q"] == 0.9


def test_pipeline_generate_features_train_predict_clean(tmp_path):
    data = tmp_path / "data"
    run_cli("generate", "--n", "40", "--p", "0.5", "--kind", "clique", "--k", "12",
            "--count", "5", "--seed", "3", "--out", str(data))
    run_cli("features", "--data", str(data), "--features", "degrees")
    assert (data / "graph_000.features.csv").exists()

    model = tmp_path / "model.json"
    run_cli("train", "--data", str(data), "--features", "degrees",
            "--max-epochs", "8", "--hidden", "8,6", "--seed", "3",
            "--model-out", str(model))
    assert model.exists()

    scores = tmp_path / "scores.csv"
    proc = run_cli("predict", "--model", str(model), "--graph", str(data / "graph_000.txt"))
    scores.write_text(proc.stdout)
    assert proc.stdout.splitlines()[0] == "vertex,score"
    assert len(proc.stdout.strip().splitlines()) == 41

    proc = run_cli("clean", "--graph", str(data / "graph_000.txt"),
                   "--scores", str(scores), "--k", "12")
    result = json.loads(proc.stdout)
    assert set(result) == {"recovered", "success", "rounds"}
    assert len(result["recovered"]) == 12


def test_xval_outputs_and_determinism(tmp_path):
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    args = ("xval", "--kind", "clique", "--n", "48", "--p", "0.5", "--k", "16",
            "--graphs", "6", "--folds", "3", "--features", "degrees",
            "--max-epochs", "5", "--hidden", "8,6", "--seed", "11")
    run_cli(*args, "--out", str(out_a))
    run_cli(*args, "--out", str(out_b))
    assert (out_a / "results.csv").read_bytes() == (out_b / "results.csv").read_bytes()
    summary = json.loads((out_a / "summary.json").read_text())
    assert 0.0 <= summary["mean_recovery"] <= 1.0
    header = (out_a / "results.csv").read_text().splitlines()[0]
    assert header == "fold,graph_index,recovery,clean_success,seed"


def test_dump_config_round_trip(tmp_path):
    args = ("xval", "--kind", "clique", "--n", "48", "--p", "0.5", "--k", "16",
            "--graphs", "6", "--folds", "3", "--features", "degrees", "--seed", "9")
    first = run_cli(*args, "--dump-config").stdout
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(first)
    second = run_cli("xval", "--config", str(cfg_path), "--dump-config").stdout
    assert json.loads(first) == json.loads(second)


def test_config_unknown_key_rejected(tmp_path):
    cfg_path = tmp_path / "bad.json"
    cfg_path.write_text(json.dumps({"n": 32, "bogus_key": 1}))
    proc = run_cli("xval", "--config", str(cfg_path), check=False)
    assert proc.returncode == 1
    err = json.loads(proc.stderr.strip().splitlines()[-1])
    assert "bogus_key" in err["message"]


def test_sweep_and_report(tmp_path):
    out = tmp_path / "sweep"
    run_cli("sweep", "--kind", "clique", "--n", "48", "--p", "0.5",
            "--graphs", "6", "--folds", "3", "--features", "degrees",
            "--max-epochs", "8", "--hidden", "8,6", "--seed", "11",
            "--k-range", "20:21", "--out", str(out))
    sweep_csv = out / "sweep.csv"
    assert sweep_csv.exists()
    header = sweep_csv.read_text().splitlines()[0]
    assert header == ("kind,n,p,k,feature_set,mean_recovery,std_recovery,"
                      "clean_success_rate,seed")
    assert (out / "sweep.svg").exists()

    report_out = tmp_path / "report"
    run_cli("report", "--sweep", str(sweep_csv), "--out", str(report_out))
    assert (report_out / "regression.csv").exists()
    assert (report_out / "recovery.svg").exists()
