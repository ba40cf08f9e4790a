"""
Reusing optimized angles across graphs by density
=================================================

Optimize a handful of small unweighted seed graphs, score every seed on a
set of larger weighted graphs, then hand parameters to fresh graphs by
matching their density.  Compares against random angles and shows a short
COBYLA refinement and a database update.
"""

import numpy as np

from ddqaoa import (
    QaoaEvaluator,
    brute_force_maxcut,
    build_database,
    build_mapping_table,
    cobyla_optimize,
    expand_database,
    generate_test_suite,
    select_params,
)
from ddqaoa.optimize import random_starts
from ddqaoa.simulator import estimate_from_samples, sample
from ddqaoa.transfer import refined_record

P = 2

seeds = generate_test_suite(5, 7, weighted=False, rng_seed=0)
print("seed densities:", [round(g.density, 3) for g in seeds])
db = build_database(seeds, [P], rng_seed=0)
for r in db.records:
    print(f"  seed {r.graph_ref}  D={r.density:.3f}  ratio {r.seed_ratio:.4f}")

# Rows are seeds, columns are target graphs, entries are approximation ratios.
cols = generate_test_suite(8, 10, weighted=True, rng_seed=1)
table = build_mapping_table(db.records_for(7, P), cols)
np.set_printoptions(precision=3, suppress=True)
print("\nmapping table (rows by seed density, columns by target density)")
print("col D:", table.col_densities)
print(table.entries)

# Fresh targets never seen by the table.
print("\nseed used  D      transfer  random(10)")
for g in generate_test_suite(6, 10, weighted=True, rng_seed=2):
    opt = brute_force_maxcut(g).value
    ev = QaoaEvaluator(g, optimum=opt)
    sel = select_params(table, db, g.density)
    rnd = ev.vector_batch(random_starts(P, 10, 7)).mean() / opt
    print(f"{sel.best.graph_ref[:8]}  {g.density:.3f}  {ev.ratio(sel.best.params):.4f}    {rnd:.4f}")

# COBYLA on the shot-estimated mean, starting from the transferred angles.
g = generate_test_suite(6, 10, weighted=True, rng_seed=2)[0]
opt = brute_force_maxcut(g).value
ev = QaoaEvaluator(g, optimum=opt)
init = select_params(table, db, g.density).best.params
calls = iter(range(10**6))


def noisy_objective(params):
    return estimate_from_samples(sample(ev.state(params), 2048, next(calls)), g)[0]


res = cobyla_optimize(noisy_objective, init, budget=60, optimum=opt)
print(f"\nrefinement: {ev.ratio(init):.4f} -> {ev.ratio(res.params):.4f} in {res.evaluations} evaluations")

# The refined angles go back into the database; the old one is untouched.
rec = refined_record(g, res.params, opt)
db2 = expand_database(db, new_record=rec, graph=g)
print(f"database records {len(db.records)} -> {len(db2.records)}; last journal entry {db2.journal[-1]['action']}")
