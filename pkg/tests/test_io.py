import csv
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ddqaoa import io
from ddqaoa.graph import WeightedGraph
from ddqaoa.gw import RatioDistribution
from ddqaoa.simulator import QaoaParams, SampleDistribution
from ddqaoa.transfer import MappingTable, ParamRecord, ParameterDatabase

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)
unit = st.floats(0.0, 1.0)


@st.composite
def graphs(draw):
    n = draw(st.integers(1, 9))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    keep = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    edges = tuple((i, j, draw(finite)) for (i, j), k in zip(pairs, keep) if k)
    return WeightedGraph(n, edges)


@st.composite
def records(draw, p=None, ref=None):
    p = p or draw(st.integers(1, 4))
    return ParamRecord(draw(st.integers(2, 20)), draw(unit), p,
                       tuple(draw(st.lists(finite, min_size=p, max_size=p))),
                       tuple(draw(st.lists(finite, min_size=p, max_size=p))),
                       draw(unit), ref or draw(st.text("abcdef0123456789", min_size=1, max_size=12)))


@st.composite
def databases(draw):
    recs = draw(st.lists(records(), max_size=5))
    tables = []
    for _ in range(draw(st.integers(0, 2))):
        p = draw(st.integers(1, 3))
        rows = sorted(draw(st.lists(records(p=p), min_size=1, max_size=3)), key=lambda r: r.density)
        rows = [ParamRecord(rows[0].n, r.density, p, r.gamma, r.beta, r.seed_ratio, r.graph_ref) for r in rows]
        M = draw(st.integers(0, 3))
        cols = sorted(draw(st.lists(unit, min_size=M, max_size=M)))
        entries = np.array(draw(st.lists(unit, min_size=len(rows) * M, max_size=len(rows) * M)))
        tables.append(MappingTable(p, rows[0].n, 12, rows, [f"c{j}" for j in range(M)], cols, entries,
                                   entries * 3.0, np.full(M, 3.0)))
    gs = draw(st.lists(graphs(), max_size=3))
    from ddqaoa.graph import graph_id
    journal = [{"time": draw(finite), "action": "add", "ratio": draw(unit)} for _ in range(draw(st.integers(0, 2)))]
    return ParameterDatabase(recs, tables, {graph_id(g): g for g in gs}, journal, [])


def db_equal(a, b):
    assert a.records == b.records
    assert a.graphs == b.graphs
    assert a.journal == b.journal
    assert len(a.tables) == len(b.tables)
    for s, t in zip(a.tables, b.tables):
        assert (s.p, s.n_s, s.n_t, s.rows, s.col_refs) == (t.p, t.n_s, t.n_t, t.rows, t.col_refs)
        for name in ("col_densities", "entries", "expectations", "col_optima"):
            assert np.array_equal(getattr(s, name), getattr(t, name))


@settings(max_examples=500)
@given(graphs())
def test_graph_roundtrip(tmp_path_factory, g):
    path = tmp_path_factory.mktemp("g") / "g.json"
    io.write_graph(path, g)
    back = io.read_graph(path)
    assert back == g
    assert [w for *_, w in back.edges] == [w for *_, w in g.edges]


@settings(max_examples=500)
@given(databases())
def test_database_roundtrip(tmp_path_factory, db):
    path = tmp_path_factory.mktemp("db") / "db.json"
    io.write_database(path, db)
    db_equal(io.read_database(path), db)


@settings(max_examples=500)
@given(st.lists(st.tuples(st.integers(0, 255), st.integers(1, 1000)), min_size=1, max_size=20, unique_by=lambda t: t[0]))
def test_distribution_roundtrip(tmp_path_factory, items):
    counts = dict(items)
    dist = SampleDistribution(counts, sum(counts.values()), 8)
    path = tmp_path_factory.mktemp("d") / "d.json"
    io.write_distribution(path, dist)
    back = io.read_distribution(path)
    assert back.counts == dist.counts and back.n_shots == dist.n_shots and back.n == 8


@settings(max_examples=500)
@given(st.lists(st.tuples(st.text("gabcdef0123456789,\" _-", min_size=1, max_size=17),
                          unit, st.integers(1, 10), st.sampled_from(io.METHODS), unit, unit,
                          st.integers(0, 10**6), st.integers(0, 2**63 - 1), st.floats(0, 1e4)), max_size=6))
def test_results_csv_roundtrip(tmp_path_factory, items):
    rows = [io.ResultRow(*t) for t in items]
    path = tmp_path_factory.mktemp("r") / "r.csv"
    io.write_results_csv(path, rows)
    assert io.read_results_csv(path) == rows


def test_k10_graph_roundtrip(tmp_path):
    g = WeightedGraph.complete(10)
    io.write_graph(tmp_path / "k10.json", g)
    assert io.read_graph(tmp_path / "k10.json").edges == g.edges


def test_27_record_database_roundtrip(tmp_path):
    rng = np.random.default_rng(0)
    recs = [ParamRecord(10, float(d), p, tuple(rng.normal(size=p)), tuple(rng.normal(size=p)), float(rng.random()), f"s{k}")
            for k, d in enumerate(np.linspace(0.2, 1, 9)) for p in (1, 2, 3)]
    rows = [r for r in recs if r.p == 3]
    table = MappingTable(3, 10, 24, rows, ["a", "b"], [0.1, 0.3], rng.random((9, 2)))
    db = ParameterDatabase(recs, [table])
    io.write_database(tmp_path / "db.json", db)
    db_equal(io.read_database(tmp_path / "db.json"), db)


def test_histogram_csv_known_distribution(tmp_path):
    dist = SampleDistribution({0: 1, 1: 2, 2: 3, 3: 4}, 10, 2)
    io.write_histogram_csv(tmp_path / "h.csv", dist)
    with open(tmp_path / "h.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 4
    assert sum(float(r["probability"]) for r in rows) == pytest.approx(1.0, abs=1e-15)
    assert [r["bitstring"] for r in rows] == ["00", "10", "01", "11"]


def test_ratio_histogram_csv(tmp_path):
    d = RatioDistribution(np.array([1.0, 2.0]), np.array([0.505, 1.0]), 2.0)
    io.write_histogram_csv(tmp_path / "r.csv", d)
    with open(tmp_path / "r.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 100
    assert sum(int(r["count"]) for r in rows) == 2


def test_results_columns_fixed(tmp_path):
    io.write_results_csv(tmp_path / "r.csv", [io.ResultRow("g", 0.5, 1, "gw", 0.9, 1.0, 10, 0, 0.1)])
    assert (tmp_path / "r.csv").read_text().splitlines()[0] == ",".join(io.RESULT_COLUMNS)


def test_result_row_validation():
    with pytest.raises(ValueError):
        io.ResultRow("g", 0.5, 1, "magic", 0.9, 1.0, 10, 0, 0.1)
    with pytest.raises(ValueError):
        io.ResultRow("g", 0.5, 1, "gw", 1.2, 1.0, 10, 0, 0.1)


def test_malformed_json_reports_offset(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"schema_version": 1, "kind": "graph", "n": 3,, }')
    with pytest.raises(io.FormatError) as exc:
        io.read_graph(path)
    assert exc.value.offset == 46
    assert str(path) in str(exc.value)


def test_schema_version_mismatch(tmp_path):
    path = tmp_path / "v.json"
    path.write_text(json.dumps({"schema_version": 7, "kind": "graph", "n": 2, "edges": []}))
    with pytest.raises(io.FormatError, match="expected 1, found 7"):
        io.read_graph(path)
    path.write_text(json.dumps({"kind": "graph", "n": 2, "edges": []}))
    with pytest.raises(io.FormatError, match="missing schema_version"):
        io.read_graph(path)


def test_wrong_kind_and_tampered_ref(tmp_path):
    io.write_params(tmp_path / "p.json", QaoaParams([0.1], [0.2]))
    with pytest.raises(io.FormatError, match="expected a 'graph'"):
        io.read_graph(tmp_path / "p.json")
    doc = json.loads(io.dumps(io.graph_to_dict(WeightedGraph.complete(3)), "graph"))
    doc["edges"][0][2] = 2.0
    (tmp_path / "t.json").write_text(json.dumps(doc))
    with pytest.raises(io.FormatError, match="content hash"):
        io.read_graph(tmp_path / "t.json")


def test_atomic_write_leaves_no_temp_files(tmp_path):
    io.atomic_write_text(tmp_path / "a.txt", "x")
    io.atomic_write_text(tmp_path / "a.txt", "y")
    assert (tmp_path / "a.txt").read_text() == "y"
    assert [p.name for p in tmp_path.iterdir()] == ["a.txt"]


def test_params_and_record_roundtrip(tmp_path):
    p = QaoaParams([0.1, 1 / 3], [np.pi, 2.0])
    io.write_params(tmp_path / "p.json", p)
    assert io.read_params(tmp_path / "p.json") == p
    r = ParamRecord(8, 0.25, 2, (0.1, 0.2), (0.3, 0.4), 0.75, "abc")
    io.write_record(tmp_path / "r.json", r)
    assert io.read_record(tmp_path / "r.json") == r
