"""Command-line pipeline: graphs, seed optimization, mapping tables, transfer and campaigns.

File formats
------------
graph      JSON ``{schema_version, kind: "graph", n, edges: [[i, j, w], ...], graph_ref}``
params     JSON ``{schema_version, kind: "params", gamma: [...], beta: [...]}``
record     JSON ``{schema_version, kind: "record", n, density, p, gamma, beta, seed_ratio, graph_ref}``
database   JSON ``{schema_version, kind: "database", records, tables, graphs, journal, failures}``
case       power-flow JSON ``{base_mva, buses: [{id, kind, P, Q, Vm, Va}], branches: [{from, to, r, x, b_sh}]}``
results    CSV ``graph_ref,density,p,method,mean_ratio,best_ratio,shots,seed,wall_time``

Results go to stdout as one JSON object unless ``--out`` names a file.
Errors print one JSON line ``{"error": ..., "message": ..., "exit": code}`` to
stderr.  Exit codes: 0 ok, 2 usage, 3 data error, 4 numeric failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import io
from .campaigns import (
    FIDELITY_SHOTS,
    Target,
    density_vs_trajectories,
    desk_setup,
    gw_compare,
    noise_campaign,
    random_vs_transfer,
    summarize,
    table_structure,
    warm_start,
)
from .graph import GraphGenerationError, GraphGenSpec, generate_test_suite, graph_id, random_graph
from .gw import gw_baseline
from .maxcut import brute_force_maxcut
from .noise import (
    NoiseModel,
    noisy_expectation,
    run_noisy_qaoa_density,
    run_noisy_qaoa_trajectories,
    sample_density,
)
from .optimize import cobyla_optimize, random_starts
from .powerflow import (
    PowerFlowCase,
    PowerFlowError,
    line_weights,
    load_sample_case,
    sample_scenarios,
    solve_power_flow,
)
from .simulator import QaoaEvaluator, QaoaParams, estimate_from_samples, run_qaoa_circuit, sample
from .transfer import (
    ParamRecord,
    SelectionPolicy,
    TransferError,
    build_database,
    build_mapping_table,
    expand_database,
    refined_record,
    select_params,
    validate_record,
)

log = logging.getLogger("ddqaoa")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4


class UsageError(Exception):
    pass


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _emit(obj, out=None):
    text = json.dumps(obj, indent=1, default=_jsonable) + "\n"
    if out:
        io.atomic_write_text(out, text)
    else:
        sys.stdout.write(text)


def _jsonable(x):
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"cannot serialize {type(x).__name__}")


def _shots(args) -> int:
    return args.shots if getattr(args, "shots", None) else FIDELITY_SHOTS[args.fidelity]


def _params_arg(args) -> QaoaParams:
    if args.params:
        return io.read_params(args.params)
    if args.gamma is None or args.beta is None:
        raise UsageError("give --params FILE or both --gamma and --beta")
    return QaoaParams(np.array(args.gamma), np.array(args.beta))


def _record_json(r: ParamRecord) -> dict:
    return io.record_to_dict(r)


# subcommands

def cmd_gen_graphs(args):
    if args.suite:
        graphs = generate_test_suite(args.count, args.n, weighted=args.weighted, rng_seed=args.seed)
    else:
        graphs = [random_graph(GraphGenSpec(args.n, args.zero_prob, args.weighted, s))
                  for s in np.random.SeedSequence(args.seed).generate_state(args.count).tolist()]
    out = Path(args.out)
    listing = []
    for k, g in enumerate(graphs):
        path = out / f"g{k:04d}.json"
        io.write_graph(path, g)
        listing.append({"file": str(path), "graph_ref": graph_id(g), "m": g.m, "density": g.density})
    _emit({"graphs": listing})


def cmd_maxcut_exact(args):
    g = io.read_graph(args.graph)
    sol = brute_force_maxcut(g)
    _emit({"graph_ref": graph_id(g), "value": sol.value, "index": sol.index,
           "assignment": sol.assignment.tolist()}, args.out)


def cmd_run_qaoa(args):
    g = io.read_graph(args.graph)
    params = _params_arg(args)
    opt = brute_force_maxcut(g).value
    state = run_qaoa_circuit(g, params)
    ev = QaoaEvaluator(g, optimum=opt)
    exact = ev.expectation(params)
    shots = _shots(args)
    dist = sample(state, shots, args.seed)
    mean, z, best = estimate_from_samples(dist, g)
    if args.hist:
        io.write_histogram_csv(args.hist, dist)
    _emit({"graph_ref": graph_id(g), "p": params.p, "expectation": exact, "mean_ratio": exact / opt,
           "sampled_mean": mean, "best_cut": best, "best_ratio": best / opt, "best_assignment": z.tolist(),
           "shots": shots, "seed": args.seed, "optimum": opt}, args.out)


def cmd_run_noisy(args):
    g = io.read_graph(args.graph)
    params = _params_arg(args)
    model = NoiseModel.parse(args.model)
    opt = brute_force_maxcut(g).value
    shots = _shots(args)
    if args.method == "density":
        rho = run_noisy_qaoa_density(g, params, model)
        exact = noisy_expectation(rho, g)
        dist = sample_density(rho, shots, args.seed)
    else:
        dist = run_noisy_qaoa_trajectories(g, params, model, args.traj, max(1, shots // args.traj), args.seed)
        exact = None
    mean, z, best = estimate_from_samples(dist, g)
    if args.hist:
        io.write_histogram_csv(args.hist, dist)
    _emit({"graph_ref": graph_id(g), "model": {"p1": model.p1, "p2": model.p2}, "method": args.method,
           "expectation": exact, "mean_ratio": None if exact is None else exact / opt,
           "sampled_mean": mean, "sampled_ratio": mean / opt, "best_ratio": best / opt,
           "best_assignment": z.tolist(), "shots": dist.n_shots, "seed": args.seed}, args.out)


def cmd_optimize_seeds(args):
    graphs = io.read_graph_dir(args.graphs)
    db = build_database(graphs, args.p, n_starts=args.starts, rng_seed=args.seed)
    io.write_database(args.db, db)
    _emit({"db": args.db, "records": len(db.records), "failures": db.failures,
           "ratios": [[r.graph_ref, r.p, r.density, r.seed_ratio] for r in db.records]})


def cmd_build_table(args):
    db = io.read_database(args.db)
    targets = io.read_graph_dir(args.targets)
    n_t = targets[0].n
    out = []
    for p in args.p:
        recs = db.records_for(args.n_s, p) if args.n_s else db.records_for(p=p)
        if not recs:
            raise TransferError(f"database has no records for p={p}")
        sizes = sorted({r.n for r in recs})
        n_s = min(sizes, key=lambda s: (abs(s - n_t), -s))
        table = build_mapping_table([r for r in recs if r.n == n_s], targets, jobs=args.jobs)
        db.tables = [t for t in db.tables if (t.p, t.n_s, t.n_t) != (p, n_s, n_t)] + [table]
        for g in targets:
            db.graphs.setdefault(graph_id(g), g)
        db.log("table", p=p, n_s=n_s, n_t=n_t, rows=table.shape[0], cols=table.shape[1])
        out.append({"p": p, "n_s": n_s, "n_t": n_t, "shape": list(table.shape),
                    "structure": table_structure(table) if table.shape[1] else None})
    io.write_database(args.db, db)
    _emit({"db": args.db, "tables": out})


def _transfer(db, g, p, policy):
    table = db.find_table(p, g.n)
    return select_params(table, db, g.density, policy)


def cmd_transfer(args):
    db = io.read_database(args.db)
    g = io.read_graph(args.graph)
    policy = SelectionPolicy(args.slack, args.top_k)
    sel = _transfer(db, g, args.p, policy)
    opt = brute_force_maxcut(g).value
    ev = QaoaEvaluator(g, optimum=opt)
    params = sel.best.params
    shots = _shots(args)
    mean_ratio = ev.ratio(params)
    _, z, best = estimate_from_samples(sample(ev.state(params), shots, args.seed), g)
    result = {"graph_ref": graph_id(g), "density": g.density, "p": args.p,
              "interval": list(sel.interval), "records": [_record_json(r) for r in sel.records],
              "scores": sel.scores, "params": io.params_to_dict(params), "mean_ratio": mean_ratio,
              "best_cut": best, "best_ratio": best / opt, "best_assignment": z.tolist(),
              "shots": shots, "seed": args.seed}
    if args.refine:
        calls = iter(range(10**9))

        def objective(q):
            return estimate_from_samples(sample(ev.state(q), shots, args.seed + 1 + next(calls)), g)[0]

        res = cobyla_optimize(objective, params, budget=args.budget, optimum=opt)
        rec = refined_record(g, res.params, opt)
        result["refined"] = {"params": io.params_to_dict(res.params), "mean_ratio": rec.seed_ratio,
                             "evaluations": res.evaluations, "converged": res.converged}
        if args.add:
            db = expand_database(db, new_record=rec, graph=g)
            io.write_database(args.db, db)
            result["refined"]["added"] = True
    _emit(result, args.out)


def cmd_gw(args):
    g = io.read_graph(args.graph)
    dist = gw_baseline(g, n_cuts=args.cuts, rng_seed=args.seed)
    if args.hist:
        io.write_histogram_csv(args.hist, dist)
    _emit({"graph_ref": graph_id(g), **dist.summary(), "seed": args.seed}, args.out)


def cmd_compare(args):
    """Transfer, random parameters and GW on one graph as result rows."""
    db = io.read_database(args.db)
    g = io.read_graph(args.graph)
    t = Target.of(g)
    shots = _shots(args)
    rows = []
    for p in args.p:
        t0 = time.perf_counter()
        sel = _transfer(db, g, p, SelectionPolicy())
        params = sel.best.params
        ev = QaoaEvaluator(g, optimum=t.optimum)
        mean = ev.ratio(params)
        best = estimate_from_samples(sample(ev.state(params), shots, args.seed), g)[2] / t.optimum
        rows.append(io.ResultRow(t.ref, g.density, p, "transfer", mean, best, shots, args.seed,
                                 time.perf_counter() - t0))
        t0 = time.perf_counter()
        X = random_starts(p, args.random, args.seed)
        ratios = ev.vector_batch(X) / t.optimum
        bests = [estimate_from_samples(sample(ev.state(QaoaParams.from_vector(x)), shots, args.seed + k), g)[2]
                 for k, x in enumerate(X)]
        rows.append(io.ResultRow(t.ref, g.density, p, "random", float(ratios.mean()),
                                 max(bests) / t.optimum, shots, args.seed, time.perf_counter() - t0))
    t0 = time.perf_counter()
    dist = gw_baseline(g, n_cuts=args.cuts, rng_seed=args.seed, optimum=t.optimum)
    rows.append(io.ResultRow(t.ref, g.density, 0, "gw", dist.mean, dist.max, args.cuts, args.seed,
                             time.perf_counter() - t0))
    _write_results(rows, args.out)


def _write_results(rows, out):
    if out:
        io.write_results_csv(out, rows)
        _emit({"rows": len(rows), "out": out})
    else:
        sys.stdout.write(io.results_csv_text(rows))


def cmd_pf_weights(args):
    if args.case:
        try:
            doc = json.loads(Path(args.case).read_text())
            case = PowerFlowCase.from_dict(doc)
        except json.JSONDecodeError as exc:
            raise io.FormatError(f"malformed JSON ({exc.msg})", args.case, exc.pos) from None
        except (KeyError, TypeError, PowerFlowError) as exc:
            raise io.FormatError(f"invalid case: {exc}", args.case) from None
        scenarios = doc.get("scenarios", {})
    else:
        case, scenarios = load_sample_case(), sample_scenarios()
    if args.scenario:
        if args.scenario not in scenarios:
            raise UsageError(f"unknown scenario {args.scenario!r}; available: {sorted(scenarios)}")
        case = case.with_overrides(scenarios[args.scenario])
    sol = solve_power_flow(case, tol=args.tol)
    g = line_weights(case, sol)
    if args.out:
        io.write_graph(args.out, g)
    _emit({"graph_ref": graph_id(g), "n": g.n, "m": g.m, "density": g.density,
           "iterations": sol.iterations, "residual": sol.residual_trace[-1],
           "scenario": args.scenario, "out": args.out})


def cmd_db_list(args):
    db = io.read_database(args.db)
    _emit({"records": [[r.graph_ref, r.n, r.p, r.density, r.seed_ratio] for r in db.records],
           "tables": [{"p": t.p, "n_s": t.n_s, "n_t": t.n_t, "shape": list(t.shape)} for t in db.tables],
           "journal_entries": len(db.journal)})


def cmd_db_add(args):
    db = io.read_database(args.db)
    g = io.read_graph(args.graph) if args.graph else None
    if args.record:
        rec = io.read_record(args.record)
    else:
        if g is None:
            raise UsageError("db add needs --record FILE or --graph with --params")
        rec = refined_record(g, _params_arg(args))
    new = expand_database(db, new_record=rec, graph=g)
    io.write_database(args.db, new)
    _emit({"db": args.db, "action": new.journal[-1]["action"], "graph_ref": rec.graph_ref,
           "p": rec.p, "ratio": rec.seed_ratio})


def cmd_db_validate(args):
    db = io.read_database(args.db)
    bad = []
    for r in db.records:
        g = db.graphs.get(r.graph_ref)
        if g is None:
            bad.append({"graph_ref": r.graph_ref, "p": r.p, "error": "graph not stored"})
            continue
        try:
            validate_record(r, g, tol=args.tol)
        except TransferError as exc:
            bad.append({"graph_ref": r.graph_ref, "p": r.p, "error": str(exc)})
    for k, t in enumerate(db.tables):
        if t.expectations is not None and t.col_optima is not None:
            err = float(np.abs(t.expectations / t.col_optima - t.entries).max()) if t.entries.size else 0.0
            if err > args.tol:
                bad.append({"table": k, "error": f"entries disagree with expectations by {err}"})
        for j, ref in enumerate(t.col_refs):
            g = db.graphs.get(ref)
            if g is None:
                continue
            vals = build_mapping_table(list(t.rows), [g], [float(t.col_optima[j])] if t.col_optima is not None else None)
            order = [vals.row_refs.index(r.graph_ref) for r in t.rows]
            err = float(np.abs(vals.entries[order, 0] - t.entries[:, j]).max())
            if err > args.tol:
                bad.append({"table": k, "col": ref, "error": f"column re-derivation off by {err}"})
    _emit({"db": args.db, "records": len(db.records), "tables": len(db.tables), "invalid": bad})
    if bad:
        raise TransferError(f"{len(bad)} stored values failed re-derivation")


def _setup(args, p_list):
    return desk_setup(n_s=args.n_s, n_seeds=args.seeds, n_t=args.n, n_table_targets=args.table_targets,
                      n_targets=args.targets, p_list=p_list, rng_seed=args.seed, jobs=args.jobs)


def cmd_campaign_rvt(args):
    setup = _setup(args, args.p)
    rows = random_vs_transfer(setup, n_random=args.random, shots=_shots(args))
    if args.db:
        io.write_database(args.db, setup.db)
    if args.out:
        io.write_results_csv(args.out, rows)
    summary = {f"{m}/p{p}/{sub}": v for (m, p, sub), v in sorted(summarize(rows).items())}
    _emit({"config": setup.config, "summary": summary, "out": args.out})


def cmd_campaign_warm(args):
    setup = _setup(args, args.p)
    rows = warm_start(setup, budget=args.budget, shots=_shots(args))
    if args.out:
        io.write_rows_csv(args.out, rows, ("graph_ref", "density", "p", "start", "initial_ratio",
                                           "final_ratio", "improvement", "evaluations", "seed"))
    summary = {}
    for p in args.p:
        for start in ("transfer", "worst"):
            imp = [r.improvement for r in rows if r.p == p and r.start == start]
            summary[f"{start}/p{p}"] = float(np.mean(imp))
    _emit({"config": setup.config, "mean_improvement": summary, "out": args.out})


def cmd_campaign_gw(args):
    setup = _setup(args, args.p)
    rows = gw_compare(setup, n_cuts=args.cuts)
    if args.out:
        io.write_rows_csv(args.out, rows, ("graph_ref", "density", "p", "qaoa_ratio", "gw_mean",
                                           "gw_max", "gw_stderr", "qaoa_wins"))
    wins = {f"p{p}": int(sum(r.qaoa_wins for r in rows if r.p == p)) for p in args.p}
    structure = {f"p{p}": table_structure(setup.tables[p]) for p in args.p}
    _emit({"config": setup.config, "qaoa_wins": wins, "instances": len(setup.targets),
           "structure": structure, "out": args.out})


def cmd_campaign_noise(args):
    setup = _setup(args, [args.depth])
    models = {m: NoiseModel.parse(m) for m in args.models.split(",")}
    rows = noise_campaign(setup, models, n=args.noise_n, p=args.depth, shots=_shots(args))
    if args.out:
        io.write_rows_csv(args.out, rows, ("graph_ref", "density", "p", "model", "noiseless_ratio",
                                           "noisy_ratio", "degradation", "best_ratio", "shots", "seed"))
    summary = {m: float(np.mean([r.degradation for r in rows if r.model == m])) for m in models}
    check = None
    if args.check_n:
        g = generate_test_suite(3, args.check_n, weighted=True, rng_seed=args.seed + 5)[0]
        params = select_params(setup.tables[args.depth], setup.db, g.density).best.params
        check = {m: density_vs_trajectories(g, params, model, args.traj, args.seed) for m, model in models.items()}
    _emit({"config": setup.config, "mean_degradation": summary, "density_vs_trajectories": check,
           "out": args.out})


# parser

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ddqaoa", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--log-level", default="WARNING")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="RNG seed (identical seeds give identical output)")
    common.add_argument("--fidelity", choices=sorted(FIDELITY_SHOTS), default="quick",
                        help="quick = 2048 shots, campaign = 2^19 shots")
    common.add_argument("--shots", type=int, default=None, help="override the fidelity shot count")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for independent evaluations")
    common.add_argument("--out", default=None, help="output file (default stdout)")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, parents=[common], help=help_, description=help_)
        p.set_defaults(func=fn)
        return p

    def params_opts(p):
        p.add_argument("--params", help="params JSON file")
        p.add_argument("--gamma", type=_floats)
        p.add_argument("--beta", type=_floats)

    p = add("gen-graphs", cmd_gen_graphs, "write random non-planar graphs as JSON files into --out DIR")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--weighted", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--suite", action=argparse.BooleanOptionalAction, default=True,
                   help="density-spread non-planar suite (default) or independent draws")
    p.add_argument("--zero-prob", type=float, default=0.5, help="edge drop probability without --suite")

    p = add("maxcut-exact", cmd_maxcut_exact, "brute-force maximum cut of a graph")
    p.add_argument("--graph", required=True)

    p = add("run-qaoa", cmd_run_qaoa, "exact and sampled QAOA on one graph")
    p.add_argument("--graph", required=True)
    params_opts(p)
    p.add_argument("--hist", help="write a per-outcome histogram CSV")

    p = add("run-noisy", cmd_run_noisy, "QAOA under depolarizing gate noise")
    p.add_argument("--graph", required=True)
    params_opts(p)
    p.add_argument("--model", default="I", help="I, II or custom:p1,p2")
    p.add_argument("--method", choices=("density", "trajectory"), default="density")
    p.add_argument("--traj", type=int, default=100, help="trajectories for --method trajectory")
    p.add_argument("--hist")

    p = add("optimize-seeds", cmd_optimize_seeds, "optimize seed graphs into a new parameter database")
    p.add_argument("--graphs", required=True, help="directory of graph JSON files")
    p.add_argument("--p", type=_ints, required=True, help="comma-separated depths")
    p.add_argument("--db", required=True)
    p.add_argument("--starts", type=int, default=None, help="multistart count (default min(200, p(n+m)))")

    p = add("build-table", cmd_build_table, "add mapping tables for a directory of target graphs")
    p.add_argument("--db", required=True)
    p.add_argument("--targets", required=True)
    p.add_argument("--p", type=_ints, required=True)
    p.add_argument("--n-s", type=int, default=None, help="seed size (default closest to the targets)")

    p = add("transfer", cmd_transfer, "select transferred parameters for a graph, optionally refine")
    p.add_argument("--db", required=True)
    p.add_argument("--graph", required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--slack", type=float, default=0.01)
    p.add_argument("--top-k", type=int, default=3)
    p.add_argument("--refine", action="store_true", help="COBYLA refinement on the sampled objective")
    p.add_argument("--budget", type=int, default=100)
    p.add_argument("--add", action="store_true", help="store the refined record in the database")

    p = add("gw", cmd_gw, "Goemans-Williamson relaxation and hyperplane rounding")
    p.add_argument("--graph", required=True)
    p.add_argument("--cuts", type=int, default=10_000)
    p.add_argument("--hist", help="ratio histogram CSV (0.01 bins)")

    p = add("compare", cmd_compare, "transfer vs random parameters vs GW on one graph (results CSV)")
    p.add_argument("--db", required=True)
    p.add_argument("--graph", required=True)
    p.add_argument("--p", type=_ints, default=[1, 2, 3])
    p.add_argument("--random", type=int, default=10)
    p.add_argument("--cuts", type=int, default=10_000)

    p = add("pf-weights", cmd_pf_weights, "AC power flow and apparent-power edge weights")
    p.add_argument("--case", help="case JSON (default: bundled 24-bus sample)")
    p.add_argument("--scenario", help="named bus override set from the case file")
    p.add_argument("--tol", type=float, default=1e-8)

    db = sub.add_parser("db", help="inspect or extend a parameter database")
    dsub = db.add_subparsers(dest="db_command", required=True)
    for name, fn, help_ in (("list", cmd_db_list, "summarize records and tables"),
                            ("add", cmd_db_add, "validate and add a record"),
                            ("validate", cmd_db_validate, "re-derive every stored ratio")):
        p = dsub.add_parser(name, parents=[common], help=help_, description=help_)
        p.set_defaults(func=fn)
        p.add_argument("--db", required=True)
        if name == "add":
            p.add_argument("--record", help="record JSON with a claimed ratio")
            p.add_argument("--graph")
            params_opts(p)
        if name == "validate":
            p.add_argument("--tol", type=float, default=1e-6)

    camp = sub.add_parser("campaign", help="desk-scale experiment campaigns")
    csub = camp.add_subparsers(dest="campaign", required=True)

    def add_campaign(name, fn, help_, p_default):
        p = csub.add_parser(name, parents=[common], help=help_, description=help_)
        p.set_defaults(func=fn)
        p.add_argument("--n", type=int, default=12, help="target size")
        p.add_argument("--n-s", type=int, default=8, help="seed size")
        p.add_argument("--seeds", type=int, default=7)
        p.add_argument("--table-targets", type=int, default=20)
        p.add_argument("--targets", type=int, default=60)
        if p_default is not None:
            p.add_argument("--p", type=_ints, default=p_default)
        return p

    p = add_campaign("random-vs-transfer", cmd_campaign_rvt, "transferred vs random parameters", [1, 2, 3])
    p.add_argument("--random", type=int, default=10)
    p.add_argument("--db", help="also save the campaign database")
    p = add_campaign("warm-start", cmd_campaign_warm, "COBYLA from transferred vs worst rows", [1, 2, 3])
    p.add_argument("--budget", type=int, default=100)
    p = add_campaign("gw-compare", cmd_campaign_gw, "transferred QAOA vs GW", [1, 2, 3, 10])
    p.add_argument("--cuts", type=int, default=10_000)
    p = add_campaign("noise", cmd_campaign_noise, "noiseless vs depolarizing models", None)
    p.add_argument("--models", default="I,II")
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--noise-n", type=int, default=8)
    p.add_argument("--check-n", type=int, default=6, help="size for the density vs trajectory check (0 skips)")
    p.add_argument("--traj", type=int, default=2000)
    return ap


_DATA_ERRORS = (io.FormatError, TransferError, GraphGenerationError, FileNotFoundError, KeyError, ValueError)
_NUMERIC_ERRORS = (PowerFlowError, np.linalg.LinAlgError, ArithmeticError)


def _fail(exc: BaseException, code: int) -> int:
    msg = str(exc).replace("\n", " ")
    sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": msg, "exit": code}) + "\n")
    return code


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except UsageError as exc:
        return _fail(exc, EXIT_USAGE)
    except _NUMERIC_ERRORS as exc:
        return _fail(exc, EXIT_NUMERIC)
    except _DATA_ERRORS as exc:
        return _fail(exc, EXIT_DATA)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
