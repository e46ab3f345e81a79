import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from quregress.circuits import AnsatzFamily, Family, build_ansatz
from quregress.cli import main
from quregress.sim import expectation_z, run_circuit


def _json_out(capsys):
    return json.loads(capsys.readouterr().out)


def test_simulate_matches_library(capsys):
    params = "0.1,0.2,0.3,-0.4,0.5,0.6"
    assert main(["simulate", "--model", "SEL-1", "--qubits", "2", "--params", params, "--x", "0.7"]) == 0
    got = _json_out(capsys)["expectation"]
    circ = build_ansatz(AnsatzFamily(Family.STRONGLY_ENTANGLING, 1, 2))
    want = expectation_z(run_circuit(circ, np.array([0.1, 0.2, 0.3, -0.4, 0.5, 0.6]), np.array([0.7])), 0)
    assert got == pytest.approx(want, abs=1e-12)


def test_simulate_circuit_file_and_seed(tmp_path, capsys):
    circ = build_ansatz(AnsatzFamily(Family.BASIC_ENTANGLER, 2, 2))
    (tmp_path / "c.json").write_text(json.dumps(circ.to_json()))
    args = ["simulate", "--circuit", str(tmp_path / "c.json"), "--x", "0.3", "--seed", "4"]
    assert main(args) == 0
    a = _json_out(capsys)
    assert main(args + ["--out", str(tmp_path / "o.json")]) == 0
    assert _json_out(capsys) == a == json.loads((tmp_path / "o.json").read_text())


@pytest.mark.parametrize("argv", [
    ["simulate", "--model", "SEL-1", "--params", "1,2", "--x", "0"],
    ["simulate", "--model", "Nope-1", "--x", "0"],
    ["simulate", "--model", "SEL-1", "--x", "0", "--wire", "5"],
    ["simulate", "--circuit", "/nonexistent.json", "--x", "0"],
    ["train", "--function", "99", "--model", "knn3"],
    ["train", "--function", "1", "--model", "knn3", "--jobs", "0"],
    ["bench"],
])
def test_config_errors_exit_2(argv, capsys):
    assert main(argv) == 2
    assert "error" in capsys.readouterr().err


def test_bad_config_file_exit_2(tmp_path, capsys):
    (tmp_path / "c.json").write_text(json.dumps({"train": {"epochs": "many"}}))
    assert main(["bench", "--config", str(tmp_path / "c.json")]) == 2
    assert "train.epochs" in capsys.readouterr().err


def test_runtime_error_exit_1(tmp_path, capsys):
    (tmp_path / "e.jsonl").write_text("")
    assert main(["report", "--records", str(tmp_path / "e.jsonl"), "--kind", "table",
                 "--out", str(tmp_path)]) == 1


def test_bench_dry_run_reports_full_grid(tmp_path, capsys):
    (tmp_path / "c.json").write_text(json.dumps({"functions": ["all"], "models": ["full"], "seeds": 10}))
    assert main(["bench", "--config", str(tmp_path / "c.json"), "--dry-run",
                 "--out", str(tmp_path / "r.jsonl")]) == 0
    assert "planned runs: 9680" in capsys.readouterr().err
    assert not (tmp_path / "r.jsonl").exists()


def test_bench_train_and_report(tmp_path, capsys):
    cfg = {"functions": [1, 2], "models": ["knn3", "SEL-1", "SEL-2"], "seeds": 2,
           "n_samples": 40, "train": {"epochs": 3}}
    (tmp_path / "c.json").write_text(json.dumps(cfg))
    rec = str(tmp_path / "r.jsonl")
    assert main(["bench", "--config", str(tmp_path / "c.json"), "--out", rec]) == 0
    assert len(open(rec).readlines()) == 12
    assert main(["bench", "--config", str(tmp_path / "c.json"), "--out", rec]) == 0
    assert len(open(rec).readlines()) == 12
    assert main(["report", "--records", rec, "--kind", "table", "--out", str(tmp_path / "t")]) == 0
    assert (tmp_path / "t" / "table_2.csv").exists()
    assert main(["report", "--records", rec, "--kind", "layers_curve", "--out", str(tmp_path / "l")]) == 0
    assert (tmp_path / "l" / "layers_curve_1.svg").exists()
    capsys.readouterr()
    assert main(["train", "--function", "1", "--model", "DT", "--n-samples", "50", "--seed", "1"]) == 0
    out = _json_out(capsys)
    assert out["run_id"] == "1:DT:1" and out["full_r2"] <= 1


def test_ga_command(tmp_path, capsys):
    argv = ["ga", "--function", "1d-1", "--gates", "4", "--population", "3", "--generations", "1",
            "--elites", "1", "--fitness-epochs", "2", "--epochs", "3", "--n-samples", "30",
            "--seed", "2", "--out", str(tmp_path / "g.json")]
    assert main(argv) == 0
    res = json.loads((tmp_path / "g.json").read_text())
    assert res["best_chromosome"]["n_gates"] == 4 and len(res["best_fitness_history"]) == 2
    assert main(argv[:-2] + ["--elites", "3"]) == 2


def test_complexity_and_meta(tmp_path, capsys):
    prof = tmp_path / "p.csv"
    assert main(["complexity", "--functions", "all", "--n-samples", "60", "--out", str(prof)]) == 0
    rows = list(csv.DictReader(open(prof)))
    assert len(rows) == 22 and list(rows[0])[:3] == ["id", "c1", "c2"]
    labels = tmp_path / "l.csv"
    labels.write_text("function_id,label\n" + "".join(f"{i},{'AB'[i % 2]}\n" for i in range(1, 23)))
    out = tmp_path / "meta"
    assert main(["meta", "--labels", str(labels), "--profiles", str(prof), "--k-min", "1",
                 "--k-max", "1", "--n-trees", "5", "--out", str(out)]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["custom"]["baseline"] == 0.5
    assert len(list(csv.reader(open(out / "subsets_custom.csv")))) == 13
    assert (out / "custom" / "violin_data.csv").exists()
    assert main(["meta", "--labels", str(labels), "--k-min", "3", "--k-max", "2"]) == 2


def test_meta_from_records(tmp_path, capsys):
    from quregress.runner import RunRecord
    recs = []
    for fid in range(1, 12):
        for m, r2 in (("SimplifiedTwoDesign-1", fid / 20), ("StronglyEntanglingLayers-1", 0.3)):
            recs.append(RunRecord(f"{fid}:{m}:0", "bench", {}, fid, m, 0,
                                  {"full_r2": r2, "full_rmse": 0.1}, 1, 0.0))
    (tmp_path / "r.jsonl").write_text("".join(r.dumps() + "\n" for r in recs))
    assert main(["complexity", "--functions", ",".join(map(str, range(1, 12))), "--n-samples", "40",
                 "--out", str(tmp_path / "p.csv")]) == 0
    assert main(["meta", "--records", str(tmp_path / "r.jsonl"), "--profiles", str(tmp_path / "p.csv"),
                 "--scenario", "1", "--k-min", "1", "--k-max", "1", "--n-trees", "5",
                 "--out", str(tmp_path / "m")]) == 0
    s = json.loads((tmp_path / "m" / "summary.json").read_text())["s1"]
    # function 6 ties at 0.3 and goes to the lexicographically smaller family
    assert s["class_counts"] == {"SimplifiedTwoDesign": 6, "StronglyEntanglingLayers": 5}


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "quregress", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and "quregress" in out.stdout
