import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_small_graph
from oracles import cost_matrix, qaoa_state, same_up_to_phase
from ddqaoa.graph import GraphGenSpec, WeightedGraph, random_graph
from ddqaoa.simulator import (
    QaoaEvaluator,
    QaoaParams,
    SampleDistribution,
    StateVector,
    apply_cost_layer,
    apply_mixer_layer,
    cost_variance,
    estimate_from_samples,
    exact_expectation,
    prepare_plus_state,
    run_qaoa_circuit,
    sample,
)


def random_params(rng, p):
    return QaoaParams(rng.uniform(0, 2 * np.pi, p), rng.uniform(0, np.pi, p))


def test_plus_state():
    s = prepare_plus_state(3)
    assert np.allclose(s.amplitudes, 1 / np.sqrt(8))


def test_matches_dense_oracle(rng):
    for _ in range(20):
        g = random_small_graph(rng)
        params = random_params(rng, int(rng.integers(1, 4)))
        state = run_qaoa_circuit(g, params)
        ref = qaoa_state(g, params.gamma, params.beta)
        assert same_up_to_phase(state.amplitudes, ref) < 1e-10
        C = np.real(np.diag(cost_matrix(g)))
        assert exact_expectation(state, g) == pytest.approx(float(np.abs(ref) ** 2 @ C), abs=1e-10)


def test_single_edge_closed_form():
    # one edge: <C> = 1/2 + sin(4 beta) sin(gamma) / 2
    g = WeightedGraph(2, ((0, 1, 1.0),))
    for gam, bet in [(0.3, 0.2), (1.1, -0.7), (2.5, 0.9)]:
        val = exact_expectation(run_qaoa_circuit(g, QaoaParams([gam], [bet])), g)
        assert val == pytest.approx(0.5 + 0.5 * np.sin(4 * bet) * np.sin(gam), abs=1e-12)


def test_layers_compose(small_weighted, rng):
    params = random_params(rng, 2)
    s = prepare_plus_state(small_weighted.n)
    for gk, bk in zip(params.gamma, params.beta):
        s = apply_mixer_layer(apply_cost_layer(s, small_weighted, gk), bk)
    ref = run_qaoa_circuit(small_weighted, params)
    assert np.abs(s.amplitudes - ref.amplitudes).max() < 1e-12


def test_batched_evaluator_matches_single(rng):
    for n in (3, 7, 11):
        g = random_graph(GraphGenSpec(n, 0.3, n != 7, int(rng.integers(100))))
        ev = QaoaEvaluator(g)
        G = rng.uniform(0, 2 * np.pi, (5, 3))
        B = rng.uniform(0, np.pi, (5, 3))
        batch = ev.expectation_batch(G, B)
        single = [exact_expectation(run_qaoa_circuit(g, QaoaParams(a, b)), g) for a, b in zip(G, B)]
        assert np.allclose(batch, single, atol=1e-10)


def test_batch_chunking_is_transparent(small_weighted, rng):
    G = rng.uniform(0, 2, (9, 2))
    B = rng.uniform(0, 2, (9, 2))
    full = QaoaEvaluator(small_weighted).expectation_batch(G, B)
    tiny = QaoaEvaluator(small_weighted, max_batch_bytes=1).expectation_batch(G, B)
    assert np.allclose(full, tiny, rtol=0, atol=1e-13)


@settings(max_examples=500)
@given(st.integers(1, 8), st.integers(0, 2**31), st.lists(st.floats(-10, 10), min_size=2, max_size=6))
def test_norm_preserved(n, seed, angles):
    g = random_graph(GraphGenSpec(n, 0.4, True, seed)) if n > 1 else WeightedGraph(1)
    p = len(angles) // 2
    s = run_qaoa_circuit(g, QaoaParams(angles[:p], angles[p : 2 * p]))
    assert s.norm() == pytest.approx(1.0, abs=1e-12)


def test_params_validation():
    with pytest.raises(ValueError):
        QaoaParams([0.1, 0.2], [0.3])
    with pytest.raises(ValueError):
        QaoaParams([], [])
    p = QaoaParams([0.1, 0.2], [0.3, 0.4])
    assert QaoaParams.from_vector(p.to_vector()) == p
    assert hash(p) == hash(QaoaParams([0.1, 0.2], [0.3, 0.4]))
    with pytest.raises(ValueError):
        p.gamma[0] = 1.0


def test_qubit_cap():
    with pytest.raises(ValueError):
        prepare_plus_state(5, max_qubits=4)


def test_sampling_is_reproducible(small_weighted, rng):
    s = run_qaoa_circuit(small_weighted, random_params(rng, 2))
    a, b = sample(s, 4096, 9), sample(s, 4096, 9)
    assert a.counts == b.counts
    assert sum(a.counts.values()) == 4096
    assert a.counts != sample(s, 4096, 10).counts


def test_sampling_basis_state():
    s = StateVector.basis(4, 5)
    d = sample(s, 100, 0)
    assert d.counts == {5: 100}


def test_estimate_from_samples():
    g = WeightedGraph(2, ((0, 1, 2.0),))
    dist = SampleDistribution({0: 1, 1: 3}, 4, 2)
    mean, z, best = estimate_from_samples(dist, g)
    assert mean == pytest.approx(1.5)
    assert best == 2.0
    assert z.tolist() == [-1, 1]


def test_distribution_validates_counts():
    with pytest.raises(ValueError):
        SampleDistribution({0: 2}, 3)
    with pytest.raises(ValueError):
        SampleDistribution({8: 1}, 1, 3)


def test_variance_nonnegative(small_weighted, rng):
    s = run_qaoa_circuit(small_weighted, random_params(rng, 1))
    C = np.real(np.diag(cost_matrix(small_weighted)))
    pr = s.probabilities
    assert cost_variance(s, small_weighted) == pytest.approx(pr @ C**2 - (pr @ C) ** 2, abs=1e-10)
