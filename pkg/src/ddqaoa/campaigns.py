"""Desk-scale experiment runners: transfer vs random, warm starts, GW comparison, noise.

Each runner is deterministic in its ``rng_seed`` and returns plain rows that
the CLI writes as CSV.  Mean ratios are exact expectations divided by the
brute-force optimum; sampled shots feed the best-cut column.
"""
from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .graph import WeightedGraph, generate_test_suite, graph_id
from .gw import gw_baseline
from .io import ResultRow
from .maxcut import brute_force_maxcut
from .noise import (
    NoiseModel,
    noisy_expectation,
    run_noisy_qaoa_density,
    sample_density,
    trajectory_expectations,
)
from .optimize import cobyla_optimize, random_starts
from .simulator import (
    N_SHOTS_CAMPAIGN,
    N_SHOTS_QUICK,
    QaoaEvaluator,
    QaoaParams,
    estimate_from_samples,
    run_qaoa_circuit,
    sample,
)
from .transfer import (
    MappingTable,
    ParameterDatabase,
    SelectionPolicy,
    build_database,
    build_mapping_table,
    select_params,
)

log = logging.getLogger(__name__)

FIDELITY_SHOTS = {"quick": N_SHOTS_QUICK, "campaign": N_SHOTS_CAMPAIGN}


def pmap(fn, items, jobs: int = 1):
    """Ordered map, optionally over a process pool."""
    items = list(items)
    if jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


@dataclass
class Target:
    graph: WeightedGraph
    optimum: float

    @property
    def ref(self) -> str:
        return graph_id(self.graph)

    @property
    def density(self) -> float:
        return self.graph.density

    @classmethod
    def of(cls, g: WeightedGraph) -> "Target":
        return cls(g, brute_force_maxcut(g).value)


@dataclass
class DeskSetup:
    """Seeds, database, one mapping table per depth and fresh evaluation targets."""

    db: ParameterDatabase
    tables: dict[int, MappingTable]
    targets: list[Target]
    rng_seed: int
    config: dict = field(default_factory=dict)


def desk_setup(
    n_s: int = 8,
    n_seeds: int = 7,
    n_t: int = 12,
    n_table_targets: int = 20,
    n_targets: int = 60,
    p_list=(1, 2, 3),
    rng_seed: int = 0,
    jobs: int = 1,
    fourier_p1_starts: int | None = None,
) -> DeskSetup:
    """Unweighted seeds of size ``n_s``, weighted targets of size ``n_t``.

    Table columns and evaluation targets are independent draws, so no
    evaluated graph was used to rank the seed rows.
    """
    seeds = generate_test_suite(n_seeds, n_s, weighted=False, rng_seed=rng_seed)
    db = build_database(seeds, list(p_list), rng_seed=rng_seed, fourier_p1_starts=fourier_p1_starts)
    cols = pmap(Target.of, generate_test_suite(n_table_targets, n_t, weighted=True, rng_seed=rng_seed + 1), jobs)
    tables = {}
    for p in p_list:
        t = build_mapping_table(db.records_for(n_s, p), [c.graph for c in cols], [c.optimum for c in cols], jobs=jobs)
        tables[p] = t
        db.tables.append(t)
    for c in cols:
        db.graphs[c.ref] = c.graph
    targets = pmap(Target.of, generate_test_suite(n_targets, n_t, weighted=True, rng_seed=rng_seed + 2), jobs)
    cfg = dict(n_s=n_s, n_seeds=n_seeds, n_t=n_t, n_table_targets=n_table_targets,
               n_targets=n_targets, p_list=list(p_list), rng_seed=rng_seed)
    return DeskSetup(db, tables, targets, rng_seed, cfg)


def _sampled_best(g, params, shots, seed, optimum):
    dist = sample(run_qaoa_circuit(g, params), shots, seed)
    return estimate_from_samples(dist, g)[2] / optimum


def _exact_ratios(target: Target, gammas, betas) -> np.ndarray:
    ev = QaoaEvaluator(target.graph, optimum=target.optimum)
    return ev.expectation_batch(np.atleast_2d(gammas), np.atleast_2d(betas)) / target.optimum


def _seed_for(base: int, i: int, p: int) -> int:
    return int(np.random.SeedSequence([base, i, p]).generate_state(1)[0])


def random_vs_transfer(
    setup: DeskSetup,
    n_random: int = 10,
    shots: int = N_SHOTS_QUICK,
    policy: SelectionPolicy = SelectionPolicy(),
) -> list[ResultRow]:
    """Per target and depth: transferred parameters versus ``n_random`` uniform draws."""
    work = [(i, t, p) for p in setup.tables for i, t in enumerate(setup.targets)]

    def one(item):
        i, t, p = item
        seed = _seed_for(setup.rng_seed, i, p)
        t0 = time.perf_counter()
        sel = select_params(setup.tables[p], setup.db, t.density, policy)
        params = sel.best.params
        mean = float(_exact_ratios(t, params.gamma, params.beta)[0])
        best = _sampled_best(t.graph, params, shots, seed, t.optimum)
        row_t = ResultRow(t.ref, t.density, p, "transfer", mean, best, shots, seed, time.perf_counter() - t0)
        t0 = time.perf_counter()
        X = random_starts(p, n_random, seed)
        ratios = _exact_ratios(t, X[:, :p], X[:, p:])
        bests = [_sampled_best(t.graph, QaoaParams.from_vector(x), shots, seed + k, t.optimum)
                 for k, x in enumerate(X)]
        row_r = ResultRow(t.ref, t.density, p, "random", float(ratios.mean()), float(max(bests)),
                          shots, seed, time.perf_counter() - t0)
        return [row_t, row_r]

    return [r for item in work for r in one(item)]


def summarize(rows: list[ResultRow], low_density: float = 0.3) -> dict:
    """Mean ratio per (method, p), overall and on the ``D < low_density`` subset."""
    out: dict = {}
    for r in rows:
        for key in ((r.method, r.p, "all"), (r.method, r.p, "low") if r.density < low_density else None):
            if key:
                out.setdefault(key, []).append(r.mean_ratio)
    return {k: (float(np.mean(v)), len(v)) for k, v in out.items()}


@dataclass
class WarmStartRow:
    graph_ref: str
    density: float
    p: int
    start: str
    initial_ratio: float
    final_ratio: float
    evaluations: int
    seed: int

    @property
    def improvement(self) -> float:
        return self.final_ratio - self.initial_ratio


def warm_start(
    setup: DeskSetup,
    budget: int = 100,
    shots: int = N_SHOTS_QUICK,
    max_targets: int | None = None,
    policy: SelectionPolicy = SelectionPolicy(),
) -> list[WarmStartRow]:
    """COBYLA on the sampled cut mean from the transferred row and from the worst row.

    The worst row is the lowest entry of the table column nearest the
    target's density.  Initial and final ratios are exact.
    """
    targets = setup.targets[:max_targets] if max_targets else setup.targets
    rows = []
    for p, table in setup.tables.items():
        for i, t in enumerate(targets):
            seed = _seed_for(setup.rng_seed + 7, i, p)
            sel = select_params(table, setup.db, t.density, policy)
            col = sel.columns
            worst = table.rows[int(np.argmin(table.entries[:, col].mean(axis=1)))]
            ev = QaoaEvaluator(t.graph, optimum=t.optimum)
            for label, rec in (("transfer", sel.best), ("worst", worst)):
                counter = iter(range(10**9))

                def objective(params, ev=ev, seed=seed):
                    dist = sample(ev.state(params), shots, seed + next(counter))
                    return estimate_from_samples(dist, t.graph)[0]

                init = rec.params
                res = cobyla_optimize(objective, init, budget=budget, optimum=t.optimum)
                r0 = float(_exact_ratios(t, init.gamma, init.beta)[0])
                r1 = float(_exact_ratios(t, res.params.gamma, res.params.beta)[0])
                rows.append(WarmStartRow(t.ref, t.density, p, label, r0, r1, res.evaluations, seed))
    return rows


@dataclass
class GwCompareRow:
    graph_ref: str
    density: float
    p: int
    qaoa_ratio: float
    gw_mean: float
    gw_max: float
    gw_stderr: float

    @property
    def qaoa_wins(self) -> bool:
        return self.qaoa_ratio > self.gw_mean


def gw_compare(
    setup: DeskSetup,
    p_list=None,
    n_cuts: int = 10_000,
    policy: SelectionPolicy = SelectionPolicy(),
) -> list[GwCompareRow]:
    """Transferred QAOA mean ratio against the mean GW rounding ratio per target."""
    p_list = sorted(setup.tables) if p_list is None else list(p_list)
    rows = []
    for i, t in enumerate(setup.targets):
        gw = gw_baseline(t.graph, n_cuts=n_cuts, rng_seed=_seed_for(setup.rng_seed + 11, i, 0), optimum=t.optimum)
        for p in p_list:
            sel = select_params(setup.tables[p], setup.db, t.density, policy)
            q = float(_exact_ratios(t, sel.best.gamma, sel.best.beta)[0])
            rows.append(GwCompareRow(t.ref, t.density, p, q, gw.mean, gw.max, gw.stderr))
    return rows


def table_structure(table: MappingTable) -> dict:
    """Which seed rows win the lowest- and highest-density columns."""
    rd = table.row_densities
    low_best = int(np.argmax(table.entries[:, 0]))
    high_best = int(np.argmax(table.entries[:, -1]))
    return {
        "low_col_best_row": low_best,
        "low_col_best_is_lowest_seed": low_best == 0,
        "high_col_best_row": high_best,
        "high_col_best_density": float(rd[high_best]),
        "high_col_best_in_upper_half": high_best >= table.shape[0] // 2,
    }


@dataclass
class NoiseRow:
    graph_ref: str
    density: float
    p: int
    model: str
    noiseless_ratio: float
    noisy_ratio: float
    best_ratio: float = float("nan")
    shots: int = 0
    seed: int = 0

    @property
    def degradation(self) -> float:
        return self.noiseless_ratio - self.noisy_ratio


def noise_campaign(
    setup: DeskSetup,
    models: dict[str, NoiseModel],
    n: int = 8,
    p: int = 3,
    n_instances: int = 3,
    shots: int = N_SHOTS_QUICK,
    policy: SelectionPolicy = SelectionPolicy(),
) -> list[NoiseRow]:
    """Exact density-matrix ratios of transferred parameters on the sparsest ``n``-vertex graphs."""
    pool = generate_test_suite(max(3 * n_instances, 6), n, weighted=True, rng_seed=setup.rng_seed + 3)
    graphs = sorted(pool, key=lambda g: g.density)[:n_instances]
    table = setup.tables[p]
    rows = []
    for i, g in enumerate(graphs):
        t = Target.of(g)
        params = select_params(table, setup.db, g.density, policy).best.params
        clean = float(_exact_ratios(t, params.gamma, params.beta)[0])
        for name, model in models.items():
            seed = _seed_for(setup.rng_seed + 13, i, p)
            rho = run_noisy_qaoa_density(g, params, model)
            best = estimate_from_samples(sample_density(rho, shots, seed), g)[2] / t.optimum
            rows.append(NoiseRow(t.ref, g.density, p, name, clean, noisy_expectation(rho, g) / t.optimum,
                                 best, shots, seed))
    return rows


def density_vs_trajectories(g: WeightedGraph, params: QaoaParams, model: NoiseModel,
                            n_traj: int = 400, rng_seed: int = 0) -> dict:
    """Exact noisy expectation against the trajectory mean and its standard error."""
    exact = noisy_expectation(run_noisy_qaoa_density(g, params, model), g)
    traj = trajectory_expectations(g, params, model, n_traj, rng_seed)
    se = float(traj.std(ddof=1) / np.sqrt(n_traj))
    return {"density": exact, "trajectory": float(traj.mean()), "stderr": se,
            "z": abs(float(traj.mean()) - exact) / se if se > 0 else 0.0}
