"""
Classical baseline and noisy circuits
=====================================

Goemans-Williamson rounding against transferred QAOA angles, then the same
angles under two depolarizing noise levels.
"""

import numpy as np

from ddqaoa import QaoaEvaluator, brute_force_maxcut, generate_test_suite, gw_baseline, solve_relaxation
from ddqaoa.campaigns import desk_setup
from ddqaoa.noise import NOISE_MODELS, noisy_expectation, run_noisy_qaoa_density
from ddqaoa.transfer import select_params

setup = desk_setup(n_s=7, n_seeds=5, n_t=10, n_table_targets=8, n_targets=6, p_list=(3,), rng_seed=4)
table = setup.tables[3]

print("target   D      SDP/opt  GW mean  GW best  QAOA p=3")
for t in setup.targets:
    emb = solve_relaxation(t.graph)
    gw = gw_baseline(t.graph, n_cuts=5000, rng_seed=0, optimum=t.optimum)
    params = select_params(table, setup.db, t.density).best.params
    q = QaoaEvaluator(t.graph, optimum=t.optimum).ratio(params)
    print(f"{t.ref[:7]}  {t.density:.3f}  {emb.objective / t.optimum:.4f}   {gw.mean:.4f}   {gw.max:.4f}   {q:.4f}")

# Depolarizing noise after every gate.  Model I is ten times noisier than Model II.
g = generate_test_suite(3, 8, weighted=True, rng_seed=9)[0]
opt = brute_force_maxcut(g).value
params = select_params(table, setup.db, g.density).best.params
clean = QaoaEvaluator(g, optimum=opt).ratio(params)
print(f"\nn=8 graph with D={g.density:.3f}, {g.m} edges; noiseless ratio {clean:.4f}")
for name in ("II", "I"):
    m = NOISE_MODELS[name]
    rho = run_noisy_qaoa_density(g, params, m)
    r = noisy_expectation(rho, g) / opt
    print(f"model {name:2s} (p1={m.p1:g}, p2={m.p2:g}): ratio {r:.4f}, loss {clean - r:.4f}, purity {np.vdot(rho.rho, rho.rho).real:.4f}")
print("fully mixed state ratio", np.round(g.total_weight / 2 / opt, 4))
