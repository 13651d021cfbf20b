import io
import json

import pytest

from qolci import dataio
from qolci.cli import run_cli
from qolci.experiment import demo_experiment


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run_cli(list(argv), out=out, err=err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def demo_csv(tmp_path):
    path = tmp_path / "demo.csv"
    dataio.write_dataset(demo_experiment(), path)
    return str(path)


def test_pmf():
    code, out, _ = run("pmf", "--i", "1", "--n", "2", "--m", "3")
    assert code == 0
    assert out.split() == ["0.4", "0.3", "0.2", "0.1"]
    code, out, _ = run("pmf", "--i", "1", "--n", "2", "--m", "3", "--exact")
    assert out.split() == ["2/5", "3/10", "1/5", "1/10"]


def test_interval_conservative_reproduces_published_median():
    code, out, _ = run("interval", "--i", "163", "--n", "325", "--m", "325",
                       "--alpha", "0.05", "--policy", "conservative", "--digits", "3")
    assert code == 0
    assert "interval: (138, 189)" in out
    assert "conservative_coverage: 0.951" in out


def test_interval_paper_policy():
    code, out, _ = run("interval", "--i", "163", "--n", "325", "--m", "325", "--policy", "paper")
    assert code == 0
    assert "interval: (138, 188)" in out
    assert "(equal_tail)" in out


def test_interval_infeasible_exit_4():
    code, out, _ = run("interval", "--i", "1", "--n", "1", "--m", "1")
    assert code == 4
    assert "max_eq1_coverage: 0.5" in out


@pytest.mark.parametrize("argv", [
    [],
    ["bogus"],
    ["interval", "--i", "0", "--n", "3", "--m", "3"],
    ["interval", "--i", "1", "--n", "3", "--m", "3", "--alpha", "2"],
    ["pmf", "--i", "1", "--n", "0", "--m", "3"],
    ["interval", "--i", "1", "--n", "3", "--m", "3", "--policy", "nope"],
])
def test_usage_errors_exit_2(argv):
    code, _, _ = run(*argv)
    assert code == 2


def test_analyze_table(demo_csv):
    code, out, _ = run("analyze", "--input", demo_csv, "--cut", "-inf", "--cut", "3.5")
    assert code == 0
    lines = out.splitlines()
    assert any(l.startswith("3.5") and "ControlSuperior" in l for l in lines)
    assert any(l.startswith("-inf") and " 163 " in l and "TreatedSuperior" in l for l in lines)


def test_analyze_json_and_csv(demo_csv):
    code, out, _ = run("analyze", "--input", demo_csv, "--format", "json", "--policy", "conservative")
    assert code == 0
    d = json.loads(out)
    assert [(r["a"], r["b"]) for r in d["rows"]] == [
        (25, 60), (61, 106), (138, 189), (221, 266), (267, 302)]
    code, out, _ = run("analyze", "--input", demo_csv, "--format", "csv", "--quantiles", "1/2")
    assert out.splitlines()[1].startswith("-inf,1/2,163,")


def test_analyze_malformed_row_exit_3(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("id,arm,status,qol\ns1,T,dead,\ns3,T,dead,2.0\n")
    code, _, err = run("analyze", "--input", str(path))
    assert code == 3
    assert "row 3" in err


def test_analyze_missing_file_exit_3(tmp_path):
    code, _, _ = run("analyze", "--input", str(tmp_path / "nope.csv"))
    assert code == 3


def test_simulate_and_coverage(tmp_path):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"N": 80, "death_treated": 0.1, "death_control": 0.3, "seed": 5}))
    out_csv, pop_csv = tmp_path / "obs.csv", tmp_path / "pop.csv"
    code, out, _ = run("simulate", "--spec", str(spec), "--seed", "2", "--out", str(out_csv),
                       "--population-out", str(pop_csv))
    assert code == 0
    obs = dataio.ingest_csv(out_csv)
    assert (obs.n, obs.m) == (40, 40)
    code, out, _ = run("coverage", "--input", str(pop_csv), "--i", "10", "--alpha", "0.1",
                       "--trials", "300", "--seed", "1")
    assert code == 0
    rep = json.loads(out)
    assert rep["schema_version"] == 1 and rep["trials"] == 300
    assert rep["population"]["source"] == "population_csv"
    # Same seed, same answer.
    assert run("coverage", "--input", str(pop_csv), "--i", "10", "--alpha", "0.1",
               "--trials", "300", "--seed", "1")[1] == out
    code, out, _ = run("coverage", "--input", str(out_csv), "--i", "10", "--trials", "50")
    assert json.loads(out)["population"]["source"] == "observed_csv_sharp_null"


def test_simulate_fixed_demo(tmp_path):
    path = tmp_path / "d.csv"
    code, _, _ = run("simulate", "--fixed-demo", "--out", str(path))
    assert code == 0
    assert dataio.ingest_csv(path) == demo_experiment()


def test_coverage_bad_spec_exit_3(tmp_path):
    spec = tmp_path / "spec.json"
    spec.write_text("{not json")
    code, _, _ = run("coverage", "--spec", str(spec), "--i", "1")
    assert code == 3


def test_coverage_infeasible_exit_4(tmp_path):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"N": 2}))
    code, out, _ = run("coverage", "--spec", str(spec), "--i", "1", "--trials", "5")
    assert code == 4
    assert json.loads(out)["infeasible_trials"] == 5
