import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from topoclust.cli import main
from topoclust.errors import ParseError, ValidationError
from topoclust.experiment import (
    AGGREGATE_COLUMNS,
    ExperimentConfig,
    SimulationSpec,
    aggregate,
    experiment_config_json,
    export_betti,
    parse_groups,
    read_run,
    run_experiment,
)
from topoclust.filtration import read_barcode_json
from topoclust.network import WeightedNetwork, load_dataset, load_network, save_network


def run_cli(*argv):
    return main([str(a) for a in argv])


def one_error_line(capsys, code):
    err = capsys.readouterr().err
    lines = err.strip().splitlines()
    assert len(lines) == 1, err
    assert lines[0].startswith(f"topoclust: error: {code}:")


@pytest.fixture
def dataset(tmp_path):
    assert run_cli("simulate", "--nodes", 12, "--groups", "2:4,4:4", "--r", 0.95,
                   "--sigma", 0.1, "--seed", 3, "--out-dir", tmp_path / "data") == 0
    return tmp_path / "data" / "manifest.json"


def small_config(tmp_path, **extra):
    doc = {"dataset": {"nodes": 12, "r": 0.95, "sigma": 0.1, "seed": 1, "groups": "2:4,4:4"},
           "k": 2, "lambdas": [0.0, 1.0], "seeds": 3, "perms": 200,
           "output_dir": str(tmp_path / "out")}
    doc.update(extra)
    return doc


# ---------------------------------------------------------------- config plumbing


def test_parse_groups():
    assert parse_groups("2:20,3:20,5:20") == ((2, 20), (3, 20), (5, 20))
    with pytest.raises(ValidationError):
        parse_groups("2-20")


def test_config_from_json_and_back(tmp_path):
    cfg = ExperimentConfig.from_json(small_config(tmp_path))
    assert cfg.seeds == [0, 1, 2]
    assert cfg.simulation == SimulationSpec(12, ((2, 4), (4, 4)), 0.95, 1.0, 0.1, 1)
    again = ExperimentConfig.from_json(experiment_config_json(cfg))
    assert again == cfg


def test_config_errors(tmp_path):
    with pytest.raises(ParseError):
        ExperimentConfig.from_json({"k": 2, "lambdas": [1.0], "seeds": 1})
    with pytest.raises(ParseError):
        ExperimentConfig.from_json(small_config(tmp_path, bogus=1))
    with pytest.raises(ValidationError):
        ExperimentConfig.from_json(small_config(tmp_path, lambdas=[]))
    with pytest.raises(ValidationError):
        ExperimentConfig.from_json(small_config(tmp_path, lambdas=[1.2]))


def test_manifest_path_relative_to_config(tmp_path, dataset):
    cfg = ExperimentConfig.from_json({"dataset": "data/manifest.json", "k": 2, "lambdas": [1.0],
                                      "seeds": 1}, str(tmp_path))
    assert len(cfg.load()[0]) == 8


# ---------------------------------------------------------------- sweeps


def test_experiment_outputs(tmp_path):
    cfg = ExperimentConfig.from_json(small_config(tmp_path))
    rows = run_experiment(cfg)
    out = tmp_path / "out"
    assert len(list((out / "runs").glob("*.json"))) == 6
    assert (out / "dataset" / "manifest.json").exists()
    run = read_run(out / "runs" / "lambda1.0_seed2.json")
    assert run["lambda"] == 1.0 and run["seed"] == 2
    assert len(run["assignments"]) == 8
    assert set(run["eval"]) >= {"accuracy", "ari", "p_value", "confusion"}
    with open(out / "aggregate.csv") as fh:
        table = list(csv.DictReader(fh))
    assert list(table[0]) == AGGREGATE_COLUMNS
    assert [float(r["lambda"]) for r in table] == [0.0, 1.0]
    assert all(int(r["runs"]) == 3 for r in table)
    assert rows[1]["accuracy_mean"] == 1.0


def test_aggregate_byte_identical_on_rerun(tmp_path):
    a = ExperimentConfig.from_json(small_config(tmp_path, output_dir=str(tmp_path / "a")))
    b = ExperimentConfig.from_json(small_config(tmp_path, output_dir=str(tmp_path / "b"),
                                                workers=2))
    run_experiment(a)
    run_experiment(b)
    assert (tmp_path / "a" / "aggregate.csv").read_bytes() == \
        (tmp_path / "b" / "aggregate.csv").read_bytes()


def test_lambda_sweep_five_rows(tmp_path):
    lambdas = [0.0, 0.25, 0.5, 0.75, 1.0]
    cfg = ExperimentConfig.from_json(small_config(tmp_path, lambdas=lambdas, seeds=2))
    rows = run_experiment(cfg)
    assert [r["lambda"] for r in rows] == lambdas
    for r in rows:
        assert 0.0 <= r["accuracy_mean"] <= 1.0 and r["runs"] == 2


def test_aggregate_population_std():
    runs = [{"lambda": 1.0, "objective": 1.0, "converged": True,
             "eval": {"accuracy": acc, "ari": 0.0, "p_value": 0.0}} for acc in (0.5, 1.0)]
    row = aggregate(runs, [1.0])[0]
    assert row["accuracy_mean"] == 0.75 and row["accuracy_std"] == 0.25


def test_unlabelled_manifest_skips_evaluation(tmp_path):
    save_network(WeightedNetwork(3, [1.0, 2.0, 3.0]), tmp_path / "a.csv")
    save_network(WeightedNetwork(3, [3.0, 2.0, 1.0]), tmp_path / "b.csv")
    (tmp_path / "m.json").write_text(json.dumps(
        {"format": "dense-csv", "entries": [{"path": "a.csv"}, {"path": "b.csv"}]}))
    cfg = ExperimentConfig(k=1, lambdas=[1.0], seeds=1, manifest=str(tmp_path / "m.json"),
                           output_dir=str(tmp_path / "out"))
    rows = run_experiment(cfg)
    assert np.isnan(rows[0]["accuracy_mean"])


# ---------------------------------------------------------------- Betti export


@pytest.mark.parametrize("grid", ["weights", "uniform"])
def test_export_betti(tmp_path, grid):
    nets = [WeightedNetwork(3, [3.0, 1.0, 2.0]), WeightedNetwork(3, [1.0, 1.0, 5.0])]
    res = export_betti(nets, ["A", "B"], tmp_path, grid=grid, points=7)
    with open(res["paths"]["networks"]) as fh:
        rows = list(csv.DictReader(fh))
    per_net = [r for r in rows if r["network"] == "0"]
    assert len(per_net) == (4 if grid == "weights" else 7)
    for r in rows:
        kept = int(np.sum(nets[int(r["network"])].weights > float(r["epsilon"])))
        assert int(r["beta0"]) - int(r["beta1"]) == 3 - kept
    assert set(res["centroids"]) == {"A", "B"}
    with open(res["paths"]["spread"]) as fh:
        spread = list(csv.DictReader(fh))
    assert len(spread) == 2 * 3 and all(float(r["std"]) == 0.0 for r in spread)


# ---------------------------------------------------------------- CLI


def test_cli_pipeline(tmp_path, dataset):
    nets, labels = load_dataset(dataset)
    assert len(nets) == 8 and labels[0] == "L1"
    first = tmp_path / "data" / "net0000.csv"

    assert run_cli("decompose", "--network", first, "--out", tmp_path / "bc.json") == 0
    assert read_barcode_json(tmp_path / "bc.json").births.size == 11

    assert run_cli("dist", "--manifest", dataset, "--lambda", 0.5, "--out", tmp_path / "d.csv") == 0
    d = np.loadtxt(tmp_path / "d.csv", delimiter=",")
    assert d.shape == (8, 8) and np.allclose(d, d.T)

    assert run_cli("centroid", "--manifest", dataset, "--lambda", 1, "--out", tmp_path / "c.json") == 0
    assert read_barcode_json(tmp_path / "c.json").node_count == 12
    assert run_cli("centroid", "--manifest", dataset, "--lambda", 0.5, "--out", tmp_path / "c.csv") == 0
    assert load_network(tmp_path / "c.csv").node_count == 12

    assert run_cli("cluster", "--manifest", dataset, "--k", 2, "--lambda", 1, "--seed", 4,
                   "--out", tmp_path / "run.json") == 0
    assert run_cli("eval", "--run", tmp_path / "run.json", "--manifest", dataset,
                   "--perms", 500, "--seed", 2, "--out", tmp_path / "rep.json") == 0
    report = json.loads((tmp_path / "rep.json").read_text())
    assert report["accuracy"] == 1.0 and report["p_value"] == 0.0

    assert run_cli("betti", "--manifest", dataset, "--out-dir", tmp_path / "betti") == 0
    assert (tmp_path / "betti" / "betti_centroids.csv").exists()


def test_cli_experiment(tmp_path, capsys):
    cfg_path = tmp_path / "exp.json"
    cfg_path.write_text(json.dumps(small_config(tmp_path)))
    assert run_cli("experiment", "--config", cfg_path, "--lambdas", "1.0", "--seeds", 2,
                   "--perms", 100, "--output-dir", tmp_path / "o") == 0
    assert "lambda=1.0" in capsys.readouterr().out
    assert len(list((tmp_path / "o" / "runs").glob("*.json"))) == 2


@pytest.mark.parametrize("argv, code", [
    ([], "E_USAGE"),
    (["cluster", "--k", "2"], "E_USAGE"),
    (["dist", "--manifest", "/nonexistent/m.json", "--lambda", "0.5", "--out", "x"], "E_IO"),
    (["experiment", "--config", "/nonexistent.json"], "E_IO"),
])
def test_cli_errors(argv, code, capsys):
    assert main(argv) == 2
    one_error_line(capsys, code)


def test_cli_bad_lambda_and_k(tmp_path, dataset, capsys):
    assert run_cli("dist", "--manifest", dataset, "--lambda", 1.5, "--out", tmp_path / "d") == 2
    one_error_line(capsys, "E_LAMBDA")
    assert run_cli("cluster", "--manifest", dataset, "--k", 20, "--out", tmp_path / "r") == 2
    one_error_line(capsys, "E_INVALID")


def test_cli_bad_config_json(tmp_path, capsys):
    (tmp_path / "c.json").write_text("{oops")
    assert run_cli("experiment", "--config", tmp_path / "c.json") == 2
    one_error_line(capsys, "E_PARSE")


def test_cli_eval_needs_labels(tmp_path, capsys):
    save_network(WeightedNetwork(3, [1.0, 2.0, 3.0]), tmp_path / "a.csv")
    (tmp_path / "m.json").write_text(json.dumps({"format": "dense-csv", "entries": [{"path": "a.csv"}]}))
    (tmp_path / "run.json").write_text(json.dumps({"assignments": [0]}))
    assert run_cli("eval", "--run", tmp_path / "run.json", "--manifest", tmp_path / "m.json",
                   "--out", tmp_path / "r.json") == 2
    one_error_line(capsys, "E_LABELS")


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "topoclust", "decompose", "--network",
                           str(tmp_path / "missing.csv"), "--out", str(tmp_path / "o.json")],
                          capture_output=True, text=True)
    assert proc.returncode == 2
    assert proc.stderr.count("\n") == 1 and "E_IO" in proc.stderr
