"""JSON and CSV persistence with schema versioning and atomic writes.

Every JSON document carries ``schema_version`` and ``kind``.  Floats go
through :func:`repr`, which is the shortest string that round-trips, so
``read(write(x)) == x`` bit for bit.
"""
from __future__ import annotations

import csv
import io as _io
import json
import math
import os
import tempfile
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from .graph import WeightedGraph, graph_id
from .simulator import QaoaParams, SampleDistribution
from .transfer import MappingTable, ParamRecord, ParameterDatabase

SCHEMA_VERSION = 1
METHODS = ("transfer", "transfer+refine", "random", "gw", "noisy")
RESULT_COLUMNS = ("graph_ref", "density", "p", "method", "mean_ratio", "best_ratio", "shots", "seed", "wall_time")
_RATIO_SLOP = 1e-9


class FormatError(ValueError):
    """Unreadable or incompatible file; ``path`` and ``offset`` locate the problem."""

    def __init__(self, message: str, path=None, offset: int | None = None):
        where = str(path) if path is not None else "<data>"
        if offset is not None:
            where += f" at byte {offset}"
        super().__init__(f"{where}: {message}")
        self.path = path
        self.offset = offset


def atomic_write_text(path, text: str):
    """Write to a temporary file in the target directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dumps(payload: dict, kind: str) -> str:
    doc = {"schema_version": SCHEMA_VERSION, "kind": kind, **payload}
    return json.dumps(doc, allow_nan=False, indent=1) + "\n"


def loads(text: str, kind: str | None = None, path=None) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        offset = len(text[: exc.pos].encode("utf-8"))
        raise FormatError(f"malformed JSON ({exc.msg})", path, offset) from None
    if not isinstance(doc, dict):
        raise FormatError("top-level JSON value must be an object", path, 0)
    found = doc.get("schema_version")
    if found is None:
        raise FormatError(f"missing schema_version (expected {SCHEMA_VERSION})", path)
    if found != SCHEMA_VERSION:
        raise FormatError(f"schema version mismatch: expected {SCHEMA_VERSION}, found {found!r}", path)
    if kind is not None and doc.get("kind") != kind:
        raise FormatError(f"expected a {kind!r} document, found {doc.get('kind')!r}", path)
    return doc


def _read(path, kind):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise FormatError(f"cannot read file ({exc.strerror})", path) from None
    return loads(text, kind, path)


def _field(doc, key, path):
    try:
        return doc[key]
    except KeyError:
        raise FormatError(f"missing field {key!r}", path) from None


# graphs

def graph_to_dict(g: WeightedGraph) -> dict:
    return {"n": g.n, "edges": [[i, j, w] for i, j, w in g.edges], "graph_ref": graph_id(g)}


def graph_from_dict(d: dict, path=None) -> WeightedGraph:
    try:
        g = WeightedGraph(int(_field(d, "n", path)), tuple((int(i), int(j), float(w)) for i, j, w in d["edges"]))
    except (TypeError, ValueError) as exc:
        raise FormatError(f"invalid graph: {exc}", path) from None
    ref = d.get("graph_ref")
    if ref is not None and ref != graph_id(g):
        raise FormatError(f"graph_ref {ref} does not match content hash {graph_id(g)}", path)
    return g


def write_graph(path, g: WeightedGraph):
    atomic_write_text(path, dumps(graph_to_dict(g), "graph"))


def read_graph(path) -> WeightedGraph:
    return graph_from_dict(_read(path, "graph"), path)


def read_graph_dir(directory) -> list[WeightedGraph]:
    """Every ``*.json`` graph in a directory, in file-name order."""
    files = sorted(Path(directory).glob("*.json"))
    if not files:
        raise FormatError("no graph files (*.json) found", directory)
    return [read_graph(f) for f in files]


# parameters and databases

def params_to_dict(params: QaoaParams) -> dict:
    return {"gamma": params.gamma.tolist(), "beta": params.beta.tolist()}


def params_from_dict(d: dict, path=None) -> QaoaParams:
    try:
        return QaoaParams(np.array(d["gamma"], dtype=float), np.array(d["beta"], dtype=float))
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"invalid parameters: {exc}", path) from None


def record_to_dict(r: ParamRecord) -> dict:
    d = asdict(r)
    d["gamma"], d["beta"] = list(r.gamma), list(r.beta)
    return d


def record_from_dict(d: dict, path=None) -> ParamRecord:
    try:
        return ParamRecord(int(d["n"]), float(d["density"]), int(d["p"]), tuple(d["gamma"]),
                           tuple(d["beta"]), float(d["seed_ratio"]), str(d["graph_ref"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"invalid record: {exc}", path) from None


def _matrix(a):
    return None if a is None else np.asarray(a).tolist()


def table_to_dict(t: MappingTable) -> dict:
    return {
        "p": t.p, "n_s": t.n_s, "n_t": t.n_t,
        "row_refs": list(t.row_refs),
        "col_refs": list(t.col_refs),
        "rows": [record_to_dict(r) for r in t.rows],
        "col_densities": t.col_densities.tolist(),
        "entries": _matrix(t.entries),
        "expectations": _matrix(t.expectations),
        "col_optima": _matrix(t.col_optima),
    }


def table_from_dict(d: dict, path=None) -> MappingTable:
    try:
        rows = tuple(record_from_dict(r, path) for r in d["rows"])
        if [r.graph_ref for r in rows] != list(d["row_refs"]):
            raise FormatError("row_refs disagree with stored rows", path)
        N, M = len(rows), len(d["col_refs"])

        def arr(key, shape):
            v = d.get(key)
            return None if v is None else np.array(v, dtype=float).reshape(shape)

        return MappingTable(int(d["p"]), int(d["n_s"]), int(d["n_t"]), rows, tuple(d["col_refs"]),
                            np.array(d["col_densities"], dtype=float), arr("entries", (N, M)),
                            arr("expectations", (N, M)), arr("col_optima", (M,)))
    except FormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"invalid mapping table: {exc}", path) from None


def database_to_dict(db: ParameterDatabase) -> dict:
    return {
        "records": [record_to_dict(r) for r in db.records],
        "tables": [table_to_dict(t) for t in db.tables],
        "graphs": {ref: {"n": g.n, "edges": [[i, j, w] for i, j, w in g.edges]} for ref, g in db.graphs.items()},
        "journal": list(db.journal),
        "failures": list(db.failures),
    }


def database_from_dict(d: dict, path=None) -> ParameterDatabase:
    records = [record_from_dict(r, path) for r in _field(d, "records", path)]
    tables = [table_from_dict(t, path) for t in d.get("tables", [])]
    graphs = {ref: graph_from_dict({**gd, "graph_ref": ref}, path) for ref, gd in d.get("graphs", {}).items()}
    return ParameterDatabase(records, tables, graphs, list(d.get("journal", [])), list(d.get("failures", [])))


def write_database(path, db: ParameterDatabase):
    atomic_write_text(path, dumps(database_to_dict(db), "database"))


def read_database(path) -> ParameterDatabase:
    return database_from_dict(_read(path, "database"), path)


# distributions

def distribution_to_dict(dist: SampleDistribution) -> dict:
    return {"n": dist.n, "n_shots": dist.n_shots, "counts": [[int(k), int(c)] for k, c in sorted(dist.counts.items())]}


def distribution_from_dict(d: dict, path=None) -> SampleDistribution:
    try:
        return SampleDistribution({int(k): int(c) for k, c in d["counts"]}, int(d["n_shots"]), int(d.get("n", 0)))
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"invalid distribution: {exc}", path) from None


def write_distribution(path, dist: SampleDistribution):
    atomic_write_text(path, dumps(distribution_to_dict(dist), "distribution"))


def read_distribution(path) -> SampleDistribution:
    return distribution_from_dict(_read(path, "distribution"), path)


# CSV feeds

@dataclass(frozen=True)
class ResultRow:
    graph_ref: str
    density: float
    p: int
    method: str
    mean_ratio: float
    best_ratio: float
    shots: int
    seed: int
    wall_time: float

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method {self.method!r} not in {METHODS}")
        for name in ("mean_ratio", "best_ratio"):
            v = getattr(self, name)
            if not (-_RATIO_SLOP <= v <= 1 + _RATIO_SLOP) or math.isnan(v):
                raise ValueError(f"{name}={v} outside [0, 1]")


def _csv_text(header, rows) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _cell(v):
    return repr(float(v)) if isinstance(v, (float, np.floating)) else v


def results_csv_text(rows) -> str:
    return _csv_text(RESULT_COLUMNS, ([_cell(getattr(r, c)) for c in RESULT_COLUMNS] for r in rows))


def write_results_csv(path, rows):
    atomic_write_text(path, results_csv_text(rows))


def read_results_csv(path) -> list[ResultRow]:
    types = {f.name: f.type for f in fields(ResultRow)}
    conv = {"str": str, "float": float, "int": int}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != RESULT_COLUMNS:
            raise FormatError(f"expected columns {RESULT_COLUMNS}, found {reader.fieldnames}", path)
        return [ResultRow(**{k: conv[types[k]](v) for k, v in row.items()}) for row in reader]


def histogram_rows(dist) -> tuple[tuple[str, ...], list[list]]:
    """Rows for a sample distribution (per outcome) or a ratio distribution (per bin)."""
    if isinstance(dist, SampleDistribution):
        n = max(dist.n, max(dist.counts, default=0).bit_length(), 1)
        freq = dist.frequencies()
        rows = [[format(k, f"0{n}b")[::-1], k, dist.counts[k], repr(freq[k])] for k in sorted(dist.counts)]
        return ("bitstring", "index", "count", "probability"), rows
    edges, counts = dist.histogram()
    total = counts.sum()
    rows = [[repr(float(lo)), repr(float(hi)), int(c), repr(float(c / total))]
            for lo, hi, c in zip(edges[:-1], edges[1:], counts)]
    return ("bin_lo", "bin_hi", "count", "fraction"), rows


def write_histogram_csv(path, dist):
    """Bitstrings are written vertex 0 first."""
    header, rows = histogram_rows(dist)
    atomic_write_text(path, _csv_text(header, rows))


def write_params(path, params: QaoaParams):
    atomic_write_text(path, dumps(params_to_dict(params), "params"))


def read_params(path) -> QaoaParams:
    return params_from_dict(_read(path, "params"), path)


def write_record(path, record: ParamRecord):
    atomic_write_text(path, dumps(record_to_dict(record), "record"))


def read_record(path) -> ParamRecord:
    return record_from_dict(_read(path, "record"), path)


def write_rows_csv(path, rows, columns: tuple[str, ...]):
    """Any attribute-bearing rows as CSV in ``columns`` order."""
    atomic_write_text(path, _csv_text(columns, ([_cell(getattr(r, c)) for c in columns] for r in rows)))
