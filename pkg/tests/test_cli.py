import csv
import json

import pytest

from ddqaoa import io
from ddqaoa.cli import main
from ddqaoa.graph import WeightedGraph


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def as_json(out):
    return json.loads(out)


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    """Seeds, targets and a database with p=1,2 tables, built through the CLI."""
    d = tmp_path_factory.mktemp("cli")
    assert main(["gen-graphs", "--count", "3", "--n", "6", "--no-weighted", "--seed", "1", "--out", str(d / "seeds")]) == 0
    assert main(["gen-graphs", "--count", "4", "--n", "7", "--seed", "2", "--out", str(d / "targets")]) == 0
    assert main(["optimize-seeds", "--graphs", str(d / "seeds"), "--p", "1,2", "--starts", "8",
                 "--db", str(d / "db.json")]) == 0
    assert main(["build-table", "--db", str(d / "db.json"), "--targets", str(d / "targets"), "--p", "1,2"]) == 0
    return d


def test_gen_graphs_deterministic(tmp_path, capsys):
    for name in ("a", "b"):
        code, out, _ = run(capsys, "gen-graphs", "--count", 3, "--n", 5, "--seed", 4, "--out", tmp_path / name)
        assert code == 0
    for k in range(3):
        assert (tmp_path / "a" / f"g{k:04d}.json").read_text() == (tmp_path / "b" / f"g{k:04d}.json").read_text()


def test_maxcut_exact(tmp_path, capsys):
    io.write_graph(tmp_path / "k4.json", WeightedGraph.complete(4))
    code, out, _ = run(capsys, "maxcut-exact", "--graph", tmp_path / "k4.json")
    assert code == 0 and as_json(out)["value"] == 4.0


def test_run_qaoa_seed_determinism(tmp_path, capsys):
    io.write_graph(tmp_path / "g.json", WeightedGraph.complete(5))
    argv = ["run-qaoa", "--graph", tmp_path / "g.json", "--gamma", "0.4", "--beta", "0.3", "--shots", 500,
            "--seed", 9, "--hist", tmp_path / "h.csv"]
    code, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv)
    assert code == 0 and a == b
    with open(tmp_path / "h.csv") as fh:
        assert sum(int(r["count"]) for r in csv.DictReader(fh)) == 500
    _, c, _ = run(capsys, *argv[:-4], "--seed", 10)
    assert as_json(c)["expectation"] == as_json(a)["expectation"]


def test_run_noisy_both_methods(tmp_path, capsys):
    io.write_graph(tmp_path / "g.json", WeightedGraph.complete(4))
    for method in ("density", "trajectory"):
        code, out, _ = run(capsys, "run-noisy", "--graph", tmp_path / "g.json", "--gamma", "0.4", "--beta", "0.3",
                           "--model", "II", "--method", method, "--shots", 200, "--traj", 20)
        assert code == 0
        assert 0 < as_json(out)["best_ratio"] <= 1


def test_pipeline_transfer_and_compare(pipeline, capsys):
    target = sorted((pipeline / "targets").glob("*.json"))[0]
    code, out, _ = run(capsys, "transfer", "--db", pipeline / "db.json", "--graph", target, "--p", 2, "--shots", 300)
    assert code == 0
    res = as_json(out)
    assert 0 < res["mean_ratio"] <= 1 and len(res["params"]["gamma"]) == 2
    out_csv = pipeline / "cmp.csv"
    code, _, _ = run(capsys, "compare", "--db", pipeline / "db.json", "--graph", target, "--p", "1,2",
                     "--random", 3, "--cuts", 200, "--shots", 200, "--out", out_csv)
    assert code == 0
    rows = io.read_results_csv(out_csv)
    assert [r.method for r in rows] == ["transfer", "random", "transfer", "random", "gw"]


def test_transfer_refine_add(pipeline, tmp_path, capsys):
    db = tmp_path / "db.json"
    db.write_text((pipeline / "db.json").read_text())
    target = sorted((pipeline / "targets").glob("*.json"))[1]
    before = len(io.read_database(db).records)
    code, out, _ = run(capsys, "transfer", "--db", db, "--graph", target, "--p", 1, "--refine", "--budget", 15,
                       "--shots", 200, "--add")
    assert code == 0 and as_json(out)["refined"]["added"]
    assert len(io.read_database(db).records) == before + 1


def test_db_list_and_validate(pipeline, capsys):
    code, out, _ = run(capsys, "db", "list", "--db", pipeline / "db.json")
    listing = as_json(out)
    assert code == 0 and len(listing["records"]) == 6 and len(listing["tables"]) == 2
    code, out, _ = run(capsys, "db", "validate", "--db", pipeline / "db.json")
    assert code == 0 and as_json(out)["invalid"] == []


def test_db_validate_flags_tampered_record(pipeline, tmp_path, capsys):
    doc = json.loads((pipeline / "db.json").read_text())
    doc["records"][0]["seed_ratio"] = 0.999
    (tmp_path / "db.json").write_text(json.dumps(doc))
    code, out, err = run(capsys, "db", "validate", "--db", tmp_path / "db.json")
    assert code == 3
    assert "claimed" in as_json(out)["invalid"][0]["error"]
    assert json.loads(err)["exit"] == 3


def test_gw_histogram(tmp_path, capsys):
    io.write_graph(tmp_path / "g.json", WeightedGraph.complete(5))
    code, out, _ = run(capsys, "gw", "--graph", tmp_path / "g.json", "--cuts", 500, "--hist", tmp_path / "h.csv")
    assert code == 0
    with open(tmp_path / "h.csv") as fh:
        assert sum(int(r["count"]) for r in csv.DictReader(fh)) == 500


def test_pf_weights_scenarios(tmp_path, capsys):
    for scenario in (None, "der_low", "der_high"):
        extra = ["--scenario", scenario] if scenario else []
        code, out, _ = run(capsys, "pf-weights", "--out", tmp_path / f"{scenario}.json", *extra)
        assert code == 0
        res = as_json(out)
        assert res["n"] == 24 and res["iterations"] <= 10
        g = io.read_graph(tmp_path / f"{scenario}.json")
        assert max(w for *_, w in g.edges) == pytest.approx(1.0)


def test_exit_code_usage(tmp_path, capsys):
    io.write_graph(tmp_path / "g.json", WeightedGraph.complete(3))
    code, _, err = run(capsys, "run-qaoa", "--graph", tmp_path / "g.json", "--gamma", "0.1")
    assert code == 2 and json.loads(err)["error"] == "UsageError"
    code, _, _ = run(capsys, "pf-weights", "--scenario", "nope")
    assert code == 2
    with pytest.raises(SystemExit) as exc:
        main(["maxcut-exact"])
    assert exc.value.code == 2


def test_exit_code_data(tmp_path, capsys):
    (tmp_path / "bad.json").write_text('{"schema_version": 1, "kind": "graph", "n": }')
    code, _, err = run(capsys, "maxcut-exact", "--graph", tmp_path / "bad.json")
    assert code == 3
    msg = json.loads(err)
    assert msg["error"] == "FormatError" and "at byte" in msg["message"]
    (tmp_path / "v2.json").write_text('{"schema_version": 2, "kind": "graph", "n": 2, "edges": []}')
    code, _, err = run(capsys, "maxcut-exact", "--graph", tmp_path / "v2.json")
    assert code == 3 and "expected 1, found 2" in err


def test_exit_code_numeric(tmp_path, capsys):
    case = {"base_mva": 100, "buses": [{"id": 1, "kind": "slack", "Vm": 1.0}, {"id": 2, "kind": "PQ", "P": -50.0}],
            "branches": [{"from": 1, "to": 2, "r": 0.01, "x": 0.1}]}
    (tmp_path / "case.json").write_text(json.dumps(case))
    code, _, err = run(capsys, "pf-weights", "--case", tmp_path / "case.json")
    assert code == 4 and json.loads(err)["error"] == "PowerFlowError"
