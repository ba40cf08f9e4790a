"""Seed parameter database, mapping tables and density-based parameter transfer.

A seed record stores optimized angles for one seed graph at one depth.  A
mapping table applies every seed record of one size and depth to a set of
target graphs and stores the resulting approximation ratios, rows sorted by
seed density and columns by target density.  Transfer picks the column whose
density is nearest the new graph's and returns the best rows of that column.
"""
from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .graph import WeightedGraph, graph_id
from .maxcut import brute_force_maxcut
from .optimize import equivalent_small_angles, fourier_optimize, has_integer_weights, multistart_optimize
from .simulator import QaoaEvaluator, QaoaParams

log = logging.getLogger(__name__)

MAX_DENSITY_GAP = 0.25
VALIDATION_TOL = 1e-6
_RATIO_SLOP = 1e-9


class TransferError(ValueError):
    """Invalid database, table or selection request."""


@dataclass(frozen=True)
class ParamRecord:
    n: int
    density: float
    p: int
    gamma: tuple[float, ...]
    beta: tuple[float, ...]
    seed_ratio: float
    graph_ref: str

    def __post_init__(self):
        g = tuple(float(x) for x in self.gamma)
        b = tuple(float(x) for x in self.beta)
        if len(g) != self.p or len(b) != self.p:
            raise TransferError(f"record {self.graph_ref}: vector lengths {len(g)}/{len(b)} != p={self.p}")
        if not 0.0 <= self.density <= 1.0:
            raise TransferError(f"record {self.graph_ref}: density {self.density} outside [0, 1]")
        object.__setattr__(self, "gamma", g)
        object.__setattr__(self, "beta", b)
        object.__setattr__(self, "density", float(self.density))
        object.__setattr__(self, "seed_ratio", float(self.seed_ratio))

    @property
    def params(self) -> QaoaParams:
        return QaoaParams(np.array(self.gamma), np.array(self.beta))

    @property
    def key(self) -> tuple[str, int]:
        return self.graph_ref, self.p

    @classmethod
    def from_params(cls, g: WeightedGraph, params: QaoaParams, ratio: float, graph_ref: str | None = None):
        return cls(g.n, g.density, params.p, tuple(params.gamma), tuple(params.beta), ratio,
                   graph_ref or graph_id(g))


def _sort_rows(rows):
    return sorted(rows, key=lambda r: (r.density, r.graph_ref))


@dataclass
class MappingTable:
    """Approximation ratios of seed rows applied to target columns.

    ``entries[i, j]`` is the mean ratio of ``rows[i].params`` on target ``j``;
    ``expectations`` keeps the raw cut expectations and ``col_optima`` the
    brute-force optima so every entry can be re-derived.
    """

    p: int
    n_s: int
    n_t: int
    rows: tuple[ParamRecord, ...]
    col_refs: tuple[str, ...]
    col_densities: np.ndarray
    entries: np.ndarray
    expectations: np.ndarray | None = None
    col_optima: np.ndarray | None = None

    def __post_init__(self):
        self.rows = tuple(self.rows)
        self.col_refs = tuple(self.col_refs)
        self.col_densities = np.asarray(self.col_densities, dtype=float)
        self.entries = np.asarray(self.entries, dtype=float).reshape(len(self.rows), len(self.col_refs))
        N, M = self.entries.shape
        if self.col_densities.shape != (M,):
            raise TransferError(f"{M} columns but {self.col_densities.size} column densities")
        if any(r.p != self.p for r in self.rows):
            raise TransferError(f"table p={self.p} holds records of another depth")
        if any(r.n != self.n_s for r in self.rows):
            raise TransferError(f"table n_s={self.n_s} holds records of another size")
        rd = self.row_densities
        if np.any(np.diff(rd) < 0) or np.any(np.diff(self.col_densities) < 0):
            raise TransferError("table axes must be sorted ascending by density")
        if N * M and (self.entries.min() < -_RATIO_SLOP or self.entries.max() > 1 + _RATIO_SLOP):
            raise TransferError(f"entries outside [0, 1]: [{self.entries.min()}, {self.entries.max()}]")
        if self.expectations is not None:
            self.expectations = np.asarray(self.expectations, dtype=float).reshape(N, M)
        if self.col_optima is not None:
            self.col_optima = np.asarray(self.col_optima, dtype=float).reshape(M)

    @property
    def row_refs(self) -> tuple[str, ...]:
        return tuple(r.graph_ref for r in self.rows)

    @property
    def row_densities(self) -> np.ndarray:
        return np.array([r.density for r in self.rows], dtype=float)

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape


@dataclass(frozen=True)
class SelectionPolicy:
    slack: float = 0.01
    top_k: int = 3

    def __post_init__(self):
        if self.slack < 0 or self.top_k < 1:
            raise TransferError("slack must be >= 0 and top_k >= 1")


@dataclass
class TransferSelection:
    interval: tuple[float, float]
    records: list[ParamRecord]
    scores: list[float]
    columns: list[int] = field(default_factory=list)

    @property
    def best(self) -> ParamRecord:
        return self.records[0]


@dataclass
class ParameterDatabase:
    """Seed records, mapping tables, stored graphs and an append-only journal.

    Mutating helpers return a new database and leave the old one untouched.
    """

    records: list[ParamRecord] = field(default_factory=list)
    tables: list[MappingTable] = field(default_factory=list)
    graphs: dict[str, WeightedGraph] = field(default_factory=dict)
    journal: list[dict] = field(default_factory=list)
    failures: list[dict] = field(default_factory=list)

    def copy(self) -> "ParameterDatabase":
        return ParameterDatabase(list(self.records), list(self.tables), dict(self.graphs),
                                 list(self.journal), list(self.failures))

    def get(self, graph_ref: str, p: int) -> ParamRecord | None:
        for r in self.records:
            if r.key == (graph_ref, p):
                return r
        return None

    def records_for(self, n: int | None = None, p: int | None = None) -> list[ParamRecord]:
        out = [r for r in self.records if (n is None or r.n == n) and (p is None or r.p == p)]
        return _sort_rows(out)

    def find_table(self, p: int, n_t: int) -> MappingTable:
        """Table of depth ``p`` whose target size is closest to ``n_t`` (largest on ties)."""
        cands = [t for t in self.tables if t.p == p and t.shape[0] and t.shape[1]]
        if not cands:
            raise TransferError(f"no mapping table for p={p}")
        return min(cands, key=lambda t: (abs(t.n_t - n_t), -t.n_t))

    def log(self, action: str, **info):
        self.journal.append({"time": time.time(), "action": action, **info})


def max_density_gap(densities) -> float:
    """Largest gap between consecutive sorted densities (0 for fewer than two)."""
    d = np.sort(np.asarray(densities, dtype=float))
    return float(np.diff(d).max()) if d.size > 1 else 0.0


def build_database(
    seed_graphs: list[WeightedGraph],
    p_list: list[int],
    n_starts: int | None = None,
    rng_seed: int = 0,
    fourier_p1_starts: int | None = None,
) -> ParameterDatabase:
    """Optimize every seed at every depth in ``p_list``.

    Depths up to 3 use the Newton multistart; deeper ones come from one
    FOURIER ladder per seed.  A seed whose optimization raises is skipped and
    reported in ``failures``.
    """
    for g in seed_graphs:
        if g.m and not g.is_normalized:
            raise TransferError("seed graphs must be weight-normalized")
    p_list = sorted(set(int(p) for p in p_list))
    if not p_list or p_list[0] < 1:
        raise TransferError("p_list must contain depths >= 1")
    gap = max_density_gap([g.density for g in seed_graphs])
    if gap > MAX_DENSITY_GAP:
        log.warning("seed densities leave a gap of %.3f (> %.2f); transfer may be poor there", gap, MAX_DENSITY_GAP)
    db = ParameterDatabase()
    for s, g in enumerate(seed_graphs):
        ref = graph_id(g)
        db.graphs[ref] = g
        try:
            opt = brute_force_maxcut(g).value
            ev = QaoaEvaluator(g, optimum=opt)
            found = {}
            for p in [p for p in p_list if p <= 3]:
                found[p] = multistart_optimize(g, p, n_starts=n_starts, rng_seed=rng_seed + 1000 * s + p,
                                               optimum=opt, evaluator=ev).params
            deep = [p for p in p_list if p > 3]
            if deep:
                ladder = fourier_optimize(g, max(deep), optimum=opt, evaluator=ev,
                                          p1_starts=fourier_p1_starts, rng_seed=rng_seed + 1000 * s)
                found.update({p: ladder[p - 1].params for p in deep})
            integer = has_integer_weights(g)
            for p, params in found.items():
                # store the small-angle image; optimizers may return any equivalent copy
                params = equivalent_small_angles(params, integer)
                ratio = float(ev.expectation_batch(params.gamma[None], params.beta[None])[0] / opt)
                db.records.append(ParamRecord.from_params(g, params, ratio, ref))
        except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
            log.warning("seed %s skipped: %s", ref, exc)
            db.failures.append({"graph_ref": ref, "error": str(exc)})
            db.records = [r for r in db.records if r.graph_ref != ref]
    db.records = _sort_rows(db.records)
    db.log("build", seeds=len(seed_graphs), p_list=p_list, rng_seed=rng_seed)
    return db


def _column(args):
    rows, target, optimum = args
    ev = QaoaEvaluator(target, optimum=optimum)
    G = np.array([r.gamma for r in rows])
    B = np.array([r.beta for r in rows])
    return ev.expectation_batch(G, B)


def build_mapping_table(
    records: list[ParamRecord],
    targets: list[WeightedGraph],
    optima: list[float | None] | None = None,
    jobs: int = 1,
) -> MappingTable:
    """Evaluate every record on every target and divide by the target's optimum.

    ``optima`` defaults to brute force; a column whose optimum is missing or
    non-positive is dropped with a warning.
    """
    if not records:
        raise TransferError("no seed records for the table")
    ps = {r.p for r in records}
    ns = {r.n for r in records}
    if len(ps) != 1 or len(ns) != 1:
        raise TransferError(f"records must share p and n, got p={sorted(ps)} n={sorted(ns)}")
    nts = {t.n for t in targets}
    if len(nts) > 1:
        raise TransferError(f"targets must share a size, got {sorted(nts)}")
    if optima is None:
        optima = [brute_force_maxcut(t).value if t.m else None for t in targets]
    if len(optima) != len(targets):
        raise TransferError("optima and targets differ in length")
    cols = []
    for t, opt in zip(targets, optima):
        if opt is None or not np.isfinite(opt) or opt <= 0:
            log.warning("target %s rejected: no usable optimum (%r)", graph_id(t), opt)
            continue
        cols.append((t.density, graph_id(t), t, float(opt)))
    cols.sort(key=lambda c: (c[0], c[1]))
    rows = _sort_rows(records)
    work = [(rows, t, opt) for _, _, t, opt in cols]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            columns = list(pool.map(_column, work))
    else:
        columns = [_column(w) for w in work]
    N, M = len(rows), len(cols)
    expect = np.column_stack(columns) if columns else np.zeros((N, 0))
    optv = np.array([c[3] for c in cols])
    entries = expect / optv if M else expect
    return MappingTable(rows[0].p, rows[0].n, nts.pop() if nts else 0, tuple(rows),
                        tuple(c[1] for c in cols), np.array([c[0] for c in cols]),
                        entries, expect, optv)


def select_params(
    table: MappingTable,
    db: ParameterDatabase | None,
    target_density: float,
    policy: SelectionPolicy = SelectionPolicy(),
) -> TransferSelection:
    """Best seed rows for a graph of density ``target_density``.

    The nearest column (both, on an exact tie) is located; rows scoring at
    least ``column max - slack`` are kept, best first, up to ``top_k``.  With
    two tied columns a row's score is its mean over them.  ``db``, when given,
    supplies the current version of each chosen record.
    """
    N, M = table.shape
    if N == 0 or M == 0:
        raise TransferError("cannot select from an empty mapping table")
    dist = np.abs(table.col_densities - float(target_density))
    cols = np.flatnonzero(dist <= dist.min() + 1e-12)
    score = table.entries[:, cols].mean(axis=1)
    keep = np.flatnonzero(score >= score.max() - policy.slack)
    rd = table.row_densities
    order = sorted(keep, key=lambda i: (-score[i], rd[i], table.rows[i].graph_ref))[: policy.top_k]
    chosen = []
    for i in order:
        rec = table.rows[i]
        if db is not None:
            rec = db.get(rec.graph_ref, rec.p) or rec
        chosen.append(rec)
    dens = [table.rows[i].density for i in order]
    return TransferSelection((min(dens), max(dens)), chosen, [float(score[i]) for i in order], cols.tolist())


def validate_record(record: ParamRecord, g: WeightedGraph, optimum: float | None = None,
                    tol: float = VALIDATION_TOL) -> float:
    """Re-evaluate a record on its graph; raise unless the ratio matches within ``tol``."""
    if g.n != record.n:
        raise TransferError(f"record n={record.n} but graph has n={g.n}")
    if abs(g.density - record.density) > tol:
        raise TransferError(f"record density {record.density!r} != graph density {g.density!r}")
    optimum = brute_force_maxcut(g).value if optimum is None else optimum
    ev = QaoaEvaluator(g, optimum=optimum)
    ratio = float(ev.expectation_batch(np.array([record.gamma]), np.array([record.beta]))[0] / optimum)
    if abs(ratio - record.seed_ratio) > tol:
        raise TransferError(
            f"record {record.graph_ref} p={record.p}: claimed ratio {record.seed_ratio!r}, re-evaluated {ratio!r}")
    return ratio


def expand_database(
    db: ParameterDatabase,
    new_record: ParamRecord | None = None,
    graph: WeightedGraph | None = None,
    new_entry: tuple | None = None,
    tol: float = VALIDATION_TOL,
) -> ParameterDatabase:
    """Return a copy of ``db`` with one new seed record or one new table entry.

    ``new_record`` is re-evaluated on ``graph`` (or the stored graph of the
    same ref) before it is accepted.  An existing record with the same
    ``(graph_ref, p)`` is replaced only by a strictly better ratio.

    ``new_entry`` is ``(table_index, row_record, col_graph, score)``.  The
    score is re-derived; a new column is filled for every row and a new row
    for every stored column graph, then the axes are re-sorted.
    """
    if (new_record is None) == (new_entry is None):
        raise TransferError("pass exactly one of new_record or new_entry")
    out = db.copy()
    if new_record is not None:
        g = graph if graph is not None else db.graphs.get(new_record.graph_ref)
        if g is None:
            raise TransferError(f"no graph stored for {new_record.graph_ref}; pass graph=")
        if graph is not None and graph_id(graph) != new_record.graph_ref:
            raise TransferError(f"graph id {graph_id(graph)} does not match record ref {new_record.graph_ref}")
        validate_record(new_record, g, tol=tol)
        out.graphs[new_record.graph_ref] = g
        old = out.get(*new_record.key)
        if old is None:
            out.records = _sort_rows(out.records + [new_record])
            out.log("add", graph_ref=new_record.graph_ref, p=new_record.p, ratio=new_record.seed_ratio)
        elif new_record.seed_ratio > old.seed_ratio:
            out.records = _sort_rows([r for r in out.records if r.key != old.key] + [new_record])
            out.log("replace", graph_ref=new_record.graph_ref, p=new_record.p,
                    ratio=new_record.seed_ratio, previous=old.seed_ratio)
        else:
            out.log("keep", graph_ref=new_record.graph_ref, p=new_record.p,
                    ratio=new_record.seed_ratio, existing=old.seed_ratio)
        return out

    t_idx, row, col_graph, score = new_entry
    table = out.tables[t_idx]
    if row.p != table.p or row.n != table.n_s or col_graph.n != table.n_t:
        raise TransferError("entry does not match the table's p, n_s or n_t")
    opt = brute_force_maxcut(col_graph).value
    derived = float(_column(([row], col_graph, opt))[0] / opt)
    if abs(derived - score) > tol:
        raise TransferError(f"entry score {score!r} does not match re-evaluated {derived!r}")
    col_ref = graph_id(col_graph)
    out.graphs.setdefault(col_ref, col_graph)
    rows = list(table.rows)
    col_graphs = [out.graphs.get(r) for r in table.col_refs]
    if col_ref not in table.col_refs:
        if not any(r.key == row.key for r in rows):
            rows.append(row)
        col_graphs.append(col_graph)
    elif not any(r.key == row.key for r in rows):
        rows.append(row)
    else:
        rows = [row if r.key == row.key else r for r in rows]
    if any(c is None for c in col_graphs):
        raise TransferError("table columns without stored graphs cannot be re-evaluated")
    out.tables[t_idx] = build_mapping_table(rows, col_graphs)
    out.log("entry", table=t_idx, graph_ref=row.graph_ref, col_ref=col_ref, score=derived)
    return out


def refined_record(g: WeightedGraph, params: QaoaParams, optimum: float | None = None) -> ParamRecord:
    """Record for a refined target graph with its exactly re-evaluated ratio."""
    optimum = brute_force_maxcut(g).value if optimum is None else optimum
    ev = QaoaEvaluator(g, optimum=optimum)
    ratio = float(ev.expectation_batch(params.gamma[None], params.beta[None])[0] / optimum)
    return ParamRecord.from_params(g, params, ratio)

