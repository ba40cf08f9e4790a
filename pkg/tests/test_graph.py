import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ddqaoa.graph import (
    GraphGenerationError,
    GraphGenSpec,
    WeightedGraph,
    generate_test_suite,
    graph_id,
    is_planar,
    normalize_weights,
    normalized_density,
    random_graph,
)


def test_edges_are_validated():
    with pytest.raises(ValueError):
        WeightedGraph(3, ((1, 0, 1.0),))
    with pytest.raises(ValueError):
        WeightedGraph(3, ((0, 1, 1.0), (0, 1, 2.0)))
    with pytest.raises(ValueError):
        WeightedGraph(3, ((0, 3, 1.0),))
    with pytest.raises(ValueError):
        WeightedGraph(3, ((0, 1, float("nan")),))


def test_from_edges_orients_and_sorts():
    g = WeightedGraph.from_edges(4, [(3, 1, 2.0), (2, 0)])
    assert g.edges == ((0, 2, 1.0), (1, 3, 2.0))


def test_complete_graph_density_is_one():
    for n in range(2, 12):
        assert normalized_density(WeightedGraph.complete(n)) == pytest.approx(1.0, abs=1e-15)


def test_normalize_weights():
    g = WeightedGraph(3, ((0, 1, 4.0), (1, 2, 2.0)))
    h = normalize_weights(g)
    assert h.weights.max() == 1.0
    assert h.weights.tolist() == [1.0, 0.5]
    with pytest.raises(ValueError):
        normalize_weights(WeightedGraph(3))
    with pytest.raises(ValueError):
        normalize_weights(WeightedGraph(3, ((0, 1, -1.0),)))


def test_density_needs_two_vertices():
    with pytest.raises(ValueError):
        normalized_density(WeightedGraph(1))


@settings(max_examples=500)
@given(st.integers(2, 12), st.data())
def test_density_bounds_and_unweighted_formula(n, data):
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    mask = data.draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    weights = data.draw(st.lists(st.floats(0.01, 1.0), min_size=len(pairs), max_size=len(pairs)))
    unweighted = WeightedGraph(n, tuple((i, j, 1.0) for (i, j), k in zip(pairs, mask) if k))
    m = unweighted.m
    assert unweighted.density == 2 * m / (n * (n - 1))
    assert 0.0 <= unweighted.density <= 1.0
    weighted = WeightedGraph(n, tuple((i, j, w) for (i, j), k, w in zip(pairs, mask, weights) if k))
    if weighted.m:
        d = normalize_weights(weighted).density
        assert 0.0 < d <= 1.0 + 1e-12
        assert d <= unweighted.density + 1e-12


def test_random_graph_is_deterministic_and_normalized():
    spec = GraphGenSpec(9, 0.4, True, 3)
    a, b = random_graph(spec), random_graph(spec)
    assert a == b
    assert a.weights.max() == 1.0
    assert np.all(a.weights > 0)
    assert random_graph(GraphGenSpec(9, 0.4, True, 4)) != a


def test_unweighted_random_graph_has_unit_weights():
    g = random_graph(GraphGenSpec(8, 0.5, False, 1))
    assert set(g.weights.tolist()) == {1.0}


@pytest.mark.parametrize("G,expected", [
    (nx.complete_graph(5), False),
    (nx.complete_bipartite_graph(3, 3), False),
    (nx.petersen_graph(), False),
    (nx.grid_2d_graph(4, 4), True),
    (nx.complete_graph(4), True),
    (nx.wheel_graph(9), True),
])
def test_planarity_known_graphs(G, expected):
    G = nx.convert_node_labels_to_integers(G)
    assert is_planar(WeightedGraph.from_networkx(G)) is expected


def test_planarity_agrees_with_certificate(rng):
    for _ in range(40):
        n = int(rng.integers(5, 11))
        g = random_graph(GraphGenSpec(n, float(rng.uniform(0.2, 0.8)), False, int(rng.integers(2**31))))
        planar, cert = nx.check_planarity(g.to_networkx(), counterexample=True)
        if planar:
            cert.check_structure()
        else:
            # a Kuratowski subgraph must be a subdivision of K5 or K3,3
            degrees = sorted(d for _, d in cert.degree() if d > 2)
            assert degrees in ([4] * 5, [3] * 6)
        assert is_planar(g) is planar


def test_suite_properties():
    suite = generate_test_suite(12, 9, weighted=True, rng_seed=5)
    assert len(suite) == 12
    d = [g.density for g in suite]
    assert d == sorted(d)
    assert all(not is_planar(g) for g in suite)
    assert all(g.is_normalized for g in suite)
    assert suite == generate_test_suite(12, 9, weighted=True, rng_seed=5)


def test_suite_spreads_unweighted_densities():
    suite = generate_test_suite(9, 10, weighted=False, rng_seed=0)
    d = np.array([g.density for g in suite])
    assert d.max() - d.min() >= 0.4
    assert len({round(x, 12) for x in d}) >= 7


def test_suite_rejects_tiny_graphs():
    with pytest.raises(GraphGenerationError):
        generate_test_suite(3, 4, weighted=True, rng_seed=0)


def test_graph_id_is_content_hash():
    g = WeightedGraph.complete(5)
    assert graph_id(g) == graph_id(WeightedGraph.complete(5))
    assert graph_id(g) != graph_id(g.scaled(0.5))
    assert graph_id(g) != graph_id(WeightedGraph.complete(6))


def test_relabel_keeps_density(small_weighted):
    perm = list(reversed(range(small_weighted.n)))
    h = small_weighted.relabel(perm)
    assert h.density == pytest.approx(small_weighted.density, abs=1e-15)
    assert h.m == small_weighted.m
