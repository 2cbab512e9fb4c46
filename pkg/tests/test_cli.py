import json
import subprocess
import sys
from importlib import resources

import jsonschema
import pytest

from combfit.cli import main

MODEL = {
    "marginals": [{"p": 0.4, "mu": 0.3, "sigma": 0.9}, {"p": 0.3, "mu": -0.2, "sigma": 1.1}, {"p": 0.2, "mu": 0.0, "sigma": 1.0}],
    "correlation": [[1, 0.6, 0.4], [0.6, 1, 0.5], [0.4, 0.5, 1]],
}


def schema(name):
    return json.loads(resources.files("combfit").joinpath("schemas", f"{name}.json").read_text())


def load(path):
    return json.loads(path.read_text())


def strip_time(doc):
    doc = dict(doc)
    doc["provenance"] = {k: v for k, v in doc["provenance"].items() if k != "timestamp"}
    return doc


@pytest.fixture
def claims(tmp_path):
    m = tmp_path / "model.json"
    m.write_text(json.dumps(MODEL))
    jsonschema.validate(MODEL, schema("model"))
    out = tmp_path / "sim.csv"
    assert main(["simulate", "--model", str(m), "--rows", "2000", "--seed", "7", "--output", str(out)]) == 0
    return out


def test_simulate_deterministic(tmp_path, claims):
    other = tmp_path / "again.csv"
    m = tmp_path / "model.json"
    assert main(["simulate", "--model", str(m), "--rows", "2000", "--seed", "7", "--output", str(other)]) == 0
    assert other.read_text() == claims.read_text()


def test_stats(tmp_path, claims, capsys):
    out = tmp_path / "s.json"
    assert main(["stats", "--input", str(claims), "--output", str(out)]) == 0
    doc = load(out)
    jsonschema.validate(doc, schema("stats"))
    assert doc["n_days"] == 2000
    assert "co-jumps" in capsys.readouterr().out
    two = tmp_path / "s2.json"
    assert main(["stats", "--input", str(claims), "--columns", "x1,x2", "--output", str(two)]) == 0
    assert list(load(two)["pairs"]) == ["x1,x2"]


def test_fit_reproducible_and_valid(tmp_path, claims):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["fit", "--input", str(claims), "--seed", "1", "--restarts", "1", "--output", str(a)]) == 0
    assert main(["fit", "--input", str(claims), "--seed", "1", "--restarts", "1", "--output", str(b)]) == 0
    jsonschema.validate(load(a), schema("fit"))
    assert strip_time(load(a)) == strip_time(load(b))
    prov = load(a)["provenance"]
    assert prov["seed"] == 1 and prov["mvn_tol"] == 1e-7 and prov["version"]


def test_seed_from_environment(tmp_path, claims, monkeypatch):
    out = tmp_path / "f.json"
    assert main(["fit", "--input", str(claims), "--restarts", "1", "--output", str(out)]) == 2
    monkeypatch.setenv("COMBFIT_SEED", "8")
    assert main(["fit", "--input", str(claims), "--restarts", "1", "--output", str(out)]) == 0
    assert load(out)["provenance"]["seed"] == 8


def test_no_overwrite_without_force(tmp_path, claims):
    out = tmp_path / "s.json"
    out.write_text("keep")
    assert main(["stats", "--input", str(claims), "--output", str(out)]) == 2
    assert out.read_text() == "keep"
    assert main(["stats", "--input", str(claims), "--output", str(out), "--force"]) == 0


def test_bootstrap_round_trip(tmp_path, claims):
    out = tmp_path / "b.json"
    rc = main(["bootstrap", "--input", str(claims), "--seed", "2", "--replicas", "30", "--restarts", "1",
               "--tol", "1e-4", "--output", str(out)])
    assert rc == 0
    doc = load(out)
    jsonschema.validate(doc, schema("bootstrap"))
    truth = [0.6, 0.4, 0.5]
    for (lo, hi), t in zip(doc["bootstrap"]["intervals"], truth):
        assert lo < t < hi
    assert doc["bootstrap"]["bonferroni"] is True
    assert doc["fit"]["ci"] is not None


def test_spearman_and_zero_mixed(tmp_path, claims):
    sp, zm = tmp_path / "sp.json", tmp_path / "zm.json"
    assert main(["spearman", "--input", str(claims), "--output", str(sp)]) == 0
    doc = load(sp)
    jsonschema.validate(doc, schema("spearman"))
    assert len(doc["pairs"]) == 3
    assert main(["zero-mixed", "--input", str(claims), "--seed", "1", "--replicas", "10", "--output", str(zm)]) == 0
    jsonschema.validate(load(zm), schema("zero_mixed"))


def test_levy_simulation(tmp_path):
    m = tmp_path / "model.json"
    m.write_text(json.dumps(MODEL))
    out = tmp_path / "ev.csv"
    assert main(["simulate", "--model", str(m), "--rows", "100", "--seed", "1", "--levy", "--output", str(out)]) == 0
    assert out.read_text().startswith("time,x_1,x_2,x_3")


def test_bench_small(tmp_path):
    out = tmp_path / "bench.csv"
    assert main(["bench", "--dims", "3,2", "--rows", "100", "--repetitions", "2", "--seed", "0",
                 "--output", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "d,comb_seconds,levy_seconds,levy_status" and len(lines) == 3
    jsonschema.validate(load(out.with_suffix(".json")), schema("bench"))


def test_exit_codes(tmp_path):
    assert main(["stats", "--input", str(tmp_path / "missing.csv")]) == 2
    bad = tmp_path / "bad.csv"
    bad.write_text("x1,x2\n1,abc\n")
    assert main(["stats", "--input", str(bad)]) == 2
    neg = tmp_path / "neg.csv"
    neg.write_text("x1,x2\n1,-1\n")
    assert main(["stats", "--input", str(neg)]) == 3
    few = tmp_path / "few.csv"
    few.write_text("x1,x2\n" + "0,1\n" * 6 + "3,2\n")
    assert main(["fit", "--input", str(few), "--seed", "1"]) == 3
    assert main(["nonsense"]) == 2
    assert main(["bench", "--dims", "a,b", "--seed", "1"]) == 2


def test_numerical_failure_exit(tmp_path):
    # replicas of a five-row series rarely keep two positives per column
    small = tmp_path / "small.csv"
    small.write_text("x1,x2,x3\n1,2,0\n2,1,1\n0,3,2\n3,0,1.5\n0,0,0\n")
    out = tmp_path / "b.json"
    assert main(["bootstrap", "--input", str(small), "--seed", "1", "--replicas", "20", "--output", str(out)]) == 4


def test_non_convergence_writes_report(tmp_path, claims):
    out = tmp_path / "f.json"
    assert main(["fit", "--input", str(claims), "--seed", "1", "--restarts", "1", "--max-iter", "2",
                 "--output", str(out)]) == 5
    assert load(out)["fit"]["converged"] is False


def test_console_entry_point(tmp_path, claims):
    res = subprocess.run(
        [sys.executable, "-m", "combfit.cli", "stats", "--input", str(claims)], capture_output=True, text=True
    )
    assert res.returncode == 0 and "days: 2000" in res.stdout
    res = subprocess.run([sys.executable, "-m", "combfit.cli", "fit"], capture_output=True, text=True)
    assert res.returncode == 2 and res.stderr
