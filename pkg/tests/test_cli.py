import json
import subprocess
import sys

import pytest

from rsbm.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_no_args_is_usage_error(capsys):
    code, _, err = run(capsys)
    assert code == 2 and "usage" in err


def test_unknown_command_and_flag(capsys):
    assert run(capsys, "bogus")[0] == 2
    assert run(capsys, "score", "--nope")[0] == 2


def test_score_twin_stars(capsys, tmp_path):
    code, out, _ = run(capsys, "score", "--twin-stars", "--twin-partition", "assortative",
                       "--model", "dcsbm", "--out", str(tmp_path))
    assert code == 0
    doc = json.loads(out)
    assert doc["objective"] == -45.82902
    assert set(doc["breakdown"]) == {"block_term", "node_term", "theta_term"}
    assert json.loads((tmp_path / "score.json").read_text()) == doc
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man["command"] == "score" and man["seed"] == 0


def test_score_rsbm_floor_clamp(capsys, tmp_path):
    code, out, _ = run(capsys, "score", "--twin-stars", "--twin-partition", "twisted",
                       "--model", "rsbm", "--alpha", "0.3", "--out", str(tmp_path))
    assert code == 0 and json.loads(out)["objective"] == -377.52624


def test_score_needs_one_graph_source(capsys, tmp_path):
    code, _, err = run(capsys, "score", "--twin-stars", "--dataset", "karate",
                       "--twin-partition", "twisted", "--out", str(tmp_path))
    assert code == 2 and "exactly one" in err


def test_runtime_failures_exit_1(capsys, tmp_path):
    code, _, err = run(capsys, "score", "--graph", str(tmp_path / "missing.txt"),
                       "--partition", "x", "--out", str(tmp_path))
    assert code == 1 and "FileNotFoundError" in err
    bad = tmp_path / "bad.txt"
    bad.write_text("1 2\n3\n")
    code, _, err = run(capsys, "infer", "--graph", str(bad), "--blocks", "2",
                       "--out", str(tmp_path))
    assert code == 1 and "line 2" in err
    code, _, err = run(capsys, "score", "--twin-stars", "--twin-partition", "twisted",
                       "--model", "rsbm", "--theta", "fit", "--out", str(tmp_path))
    assert code == 1 and "ThetaFitError" in err


def test_pipeline_generate_infer_landscape(capsys, tmp_path):
    g = tmp_path / "gen"
    assert run(capsys, "generate", "--giant-component", "--seed", "3", "--out", str(g))[0] == 0
    assert (g / "graph.txt").exists() and (g / "planted.txt").exists()
    i = tmp_path / "inf"
    assert run(capsys, "infer", "--graph", str(g / "graph.txt"), "--blocks", "2",
               "--model", "rsbm", "--trials", "3", "--sweeps", "15", "--threads", "2",
               "--out", str(i))[0] == 0
    assert len(list((i / "traces").glob("*.json"))) == 3
    assert (i / "summary.csv").read_text().count("\n") == 4
    code, out, _ = run(capsys, "score", "--graph", str(g / "graph.txt"),
                       "--partition", str(i / "best_partition.txt"), "--model", "rsbm",
                       "--out", str(tmp_path / "sc"))
    assert code == 0
    best = min(float(l.split(",")[2]) for l in (i / "summary.csv").read_text().splitlines()[1:])
    assert json.loads(out)["objective"] >= best - 1e-5
    lo = tmp_path / "land"
    assert run(capsys, "landscape", "--graph", str(g / "graph.txt"), "--traces",
               str(i / "traces"), "--model", "rsbm", "--max-points", "40", "--out", str(lo))[0] == 0
    assert (lo / "landscape.csv").read_text().count("\n") == 41


def test_sweep_f_and_env_out_dir(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("RSBM_OUT_DIR", str(tmp_path / "env"))
    assert run(capsys, "sweep-f", "--dataset", "karate", "--schedule", "0.2,0.6",
               "--sweeps", "10")[0] == 0
    rows = (tmp_path / "env" / "f_sweep.csv").read_text().splitlines()
    assert rows[0] == "f,objective,coverage,modularity" and len(rows) == 3


def test_experiment_commands(capsys, tmp_path):
    code, out, _ = run(capsys, "experiment", "list")
    assert code == 0 and "convergence-rsbm" in out
    code, out, _ = run(capsys, "experiment", "run", "twin-stars-table", "--out", str(tmp_path))
    assert code == 0 and out.startswith("PASS")
    assert "-20385.51476" in (tmp_path / "twin_stars_table.csv").read_text()
    assert run(capsys, "experiment", "run", "nope", "--out", str(tmp_path))[0] == 2
    assert run(capsys, "experiment", "run", "--out", str(tmp_path))[0] == 2


def test_record_unit_move(capsys, tmp_path):
    assert run(capsys, "infer", "--twin-stars", "--blocks", "2", "--trials", "1", "--sweeps",
               "2", "--record-unit", "move", "--out", str(tmp_path))[0] == 0
    tr = json.loads((tmp_path / "traces" / "trace_000.json").read_text())
    assert len(tr["move_objectives"]) == 20


def test_seed_random_is_recorded(capsys, tmp_path):
    assert run(capsys, "generate", "--seed", "random", "--out", str(tmp_path))[0] == 0
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert isinstance(man["seed"], int)


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "rsbm", "score", "--twin-stars",
                        "--twin-partition", "core-periphery", "--model", "ssbm",
                        "--out", str(tmp_path)], capture_output=True, text=True)
    assert r.returncode == 0
    assert json.loads(r.stdout)["objective"] == pytest.approx(-12.47664, abs=1e-3)
