"""
QAOA on weighted Max-Cut, from one edge to K10
==============================================

Builds a few graphs, runs the state-vector simulator and the seed optimizer,
and checks the numbers against things we can work out by hand.
"""

import numpy as np

from ddqaoa import (
    QaoaEvaluator,
    QaoaParams,
    WeightedGraph,
    brute_force_maxcut,
    estimate_from_samples,
    multistart_optimize,
    run_qaoa_circuit,
    sample,
)

# A single edge.  At depth 1 the expected cut is 1/2 + sin(4 beta) sin(gamma) / 2,
# so (gamma, beta) = (pi/2, pi/8) cuts the edge with certainty.
edge = WeightedGraph(2, ((0, 1, 1.0),))
ev = QaoaEvaluator(edge, optimum=1.0)
for gamma, beta in [(0.3, 0.2), (np.pi / 2, np.pi / 8)]:
    closed = 0.5 + np.sin(4 * beta) * np.sin(gamma) / 2
    print(f"edge  gamma={gamma:.3f} beta={beta:.3f}  simulator {ev.ratio(QaoaParams([gamma], [beta])):.6f}"
          f"  closed form {closed:.6f}")

# Density is total normalized weight over the number of vertex pairs.
k10 = WeightedGraph.complete(10)
print(f"\nK10: n={k10.n} m={k10.m} D={k10.density:.4f} max cut {brute_force_maxcut(k10).value}")

# Seed optimization: multistart Newton ascent on the exact expectation.
for p in (1, 2):
    res = multistart_optimize(k10, p, rng_seed=0)
    print(f"K10 p={p}: ratio {res.ratio:.4f}  gamma {np.round(res.params.gamma, 3)}  beta {np.round(res.params.beta, 3)}")

# Shots: the sampled mean converges to the exact value, and the best
# sampled bitstring is what a device run would report.
params = res.params
state = run_qaoa_circuit(k10, params)
exact = QaoaEvaluator(k10).expectation(params)
for shots in (256, 4096, 65536):
    mean, z, best = estimate_from_samples(sample(state, shots, rng_seed=1), k10)
    print(f"{shots:6d} shots: mean {mean:.4f} (exact {exact:.4f}), best cut {best:.0f}, partition {z.astype(int)}")
