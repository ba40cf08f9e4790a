import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ddqaoa.graph import GraphGenSpec, WeightedGraph, random_graph
from ddqaoa.maxcut import (
    approximation_ratio,
    assignment_to_index,
    brute_force_maxcut,
    cut_table,
    cut_value,
    cut_values,
    index_to_assignment,
)


def naive_maxcut(g):
    """Plain loop over every assignment, no symmetry trick."""
    best = -np.inf
    for z in itertools.product((1, -1), repeat=g.n):
        val = sum(w for i, j, w in g.edges if z[i] != z[j])
        best = max(best, val)
    return best


graphs = st.integers(2, 10).flatmap(lambda n: st.tuples(
    st.just(n),
    st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1), st.floats(0.0, 3.0)), max_size=3 * n),
)).map(lambda t: WeightedGraph.from_edges(
    t[0], list({(min(i, j), max(i, j)): (i, j, w) for i, j, w in t[1] if i != j}.values())))


@pytest.mark.parametrize("n,expected", [(2, 1), (3, 2), (4, 4), (5, 6), (6, 9), (7, 12)])
def test_complete_graph_maxcut(n, expected):
    assert brute_force_maxcut(WeightedGraph.complete(n)).value == expected


def test_solution_conventions():
    g = WeightedGraph(3, ((0, 1, 1.0), (1, 2, 1.0)))
    sol = brute_force_maxcut(g)
    assert sol.value == 2.0
    assert sol.assignment[0] == 1
    # both +,-,+ (index 2) and its mirror reach 2; smallest index with z_0 = +1 wins
    assert sol.index == 2
    assert sol.assignment.tolist() == [1, -1, 1]


def test_index_assignment_roundtrip():
    for k in range(64):
        assert assignment_to_index(index_to_assignment(k, 6)) == k


def test_cut_table_matches_cut_values(small_weighted):
    N = 1 << small_weighted.n
    assert np.allclose(cut_table(small_weighted), cut_values(small_weighted, np.arange(N)), atol=1e-12)


def test_cut_value_rejects_bad_assignment(k4):
    with pytest.raises(ValueError):
        cut_value(k4, [1, 0, 1, 1])
    with pytest.raises(ValueError):
        cut_value(k4, [1, 1, 1])


@settings(max_examples=500)
@given(graphs, st.data())
def test_spin_flip_symmetry(g, data):
    z = np.array(data.draw(st.lists(st.sampled_from([-1, 1]), min_size=g.n, max_size=g.n)))
    assert cut_value(g, z) == cut_value(g, -z)
    k = assignment_to_index(z)
    assert cut_values(g, [k])[0] == pytest.approx(cut_value(g, z), abs=1e-12)


@settings(max_examples=500)
@given(graphs)
def test_brute_force_matches_naive_enumeration(g):
    sol = brute_force_maxcut(g)
    assert sol.value == pytest.approx(naive_maxcut(g), abs=1e-9)
    assert sol.value == pytest.approx(cut_value(g, sol.assignment), abs=1e-12)
    assert sol.assignment[0] == 1


def test_blocked_search_agrees_with_table():
    g = random_graph(GraphGenSpec(22, 0.6, True, 11))
    sol = brute_force_maxcut(g)
    table = cut_table(g, fix_first=True)
    assert sol.value == pytest.approx(table.max(), abs=1e-9)
    assert sol.assignment[0] == 1


def test_size_limit():
    with pytest.raises(ValueError):
        brute_force_maxcut(WeightedGraph(31), max_n=30)


def test_approximation_ratio(k4):
    assert approximation_ratio(k4, 2.0) == 0.5
    assert approximation_ratio(k4, 5.0, optimum=4.0) == 1.25
    with pytest.raises(ValueError):
        approximation_ratio(WeightedGraph(3), 0.0)
    with pytest.raises(ValueError):
        approximation_ratio(k4, -1.0)
