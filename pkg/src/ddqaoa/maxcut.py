"""Classical Max-Cut cost, exact enumeration and approximation ratios.

Assignments are ``{-1, +1}`` vectors with ``z[i] = +1`` meaning vertex ``i``
is in the chosen subset.  Basis index ``k`` maps to an assignment through
its bits: bit ``b`` of ``k`` is vertex ``b``, bit value 0 is ``z = +1``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import WeightedGraph

MAX_BRUTE_FORCE_N = 30
# vertices enumerated by the in-memory table; the rest go through Gray-code sweeps
_LOW_BLOCK = 20


@dataclass(frozen=True)
class MaxCutSolution:
    assignment: np.ndarray
    value: float
    index: int

    def __eq__(self, other):
        if not isinstance(other, MaxCutSolution):
            return NotImplemented
        return (
            self.index == other.index
            and self.value == other.value
            and np.array_equal(self.assignment, other.assignment)
        )


def index_to_assignment(k: int, n: int) -> np.ndarray:
    bits = (int(k) >> np.arange(n)) & 1
    return (1 - 2 * bits).astype(np.int8)


def assignment_to_index(z) -> int:
    z = np.asarray(z)
    return int(((z == -1).astype(np.int64) << np.arange(z.size)).sum())


def _check_assignment(g: WeightedGraph, z) -> np.ndarray:
    z = np.asarray(z)
    if z.shape != (g.n,):
        raise ValueError(f"assignment length {z.size} does not match n={g.n}")
    if not np.all(np.abs(z) == 1):
        raise ValueError("assignment entries must be -1 or +1")
    return z


def edge_contributions(g: WeightedGraph, z) -> np.ndarray:
    """Per-edge cut contribution, ``w_ij`` when the edge crosses the cut else 0."""
    z = _check_assignment(g, z)
    return g.weights * (1 - z[g.edge_i] * z[g.edge_j]) / 2


def cut_value(g: WeightedGraph, z) -> float:
    return float(edge_contributions(g, z).sum())


def cut_values(g: WeightedGraph, indices) -> np.ndarray:
    """Cut value of each basis index in ``indices`` (vectorised)."""
    k = np.asarray(indices, dtype=np.int64)
    out = np.zeros(k.shape)
    for i, j, w in g.edges:
        out += w * (((k >> i) ^ (k >> j)) & 1)
    return out


def _prefix_sums(weights_to_j: np.ndarray, first: int) -> np.ndarray:
    """``s[k] = sum_b weights_to_j[first + b] * bit_b(k)`` for every ``k < 2**(len - first)``."""
    s = np.zeros(1)
    for w in weights_to_j[first:]:
        s = np.concatenate((s, s + w))
    return s


def cut_table(g: WeightedGraph, fix_first: bool = False) -> np.ndarray:
    """Cut values of all basis states, built vertex by vertex.

    Adding vertex ``j`` doubles the table: the half with ``z_j = +1`` gains the
    weight to earlier vertices on the ``-1`` side and the other half the
    complement.  With ``fix_first`` vertex 0 is pinned to ``z = +1`` and entry
    ``k`` of the result is basis index ``2 k``.
    """
    W = g.adjacency
    start = 1 if fix_first else 0
    table = np.zeros(1 if fix_first else 2)
    for j in range(1, g.n):
        s = _prefix_sums(W[j, :j], start)
        total = W[j, :j].sum()
        table = np.concatenate((table + s, table + (total - s)))
    return table


def _argmax_first(values: np.ndarray, tol: float) -> int:
    vmax = values.max()
    return int(np.flatnonzero(values >= vmax - tol)[0])


def brute_force_maxcut(g: WeightedGraph, max_n: int = MAX_BRUTE_FORCE_N) -> MaxCutSolution:
    """Exact Max-Cut by enumerating the ``2**(n-1)`` assignments with ``z_0 = +1``.

    Ties are broken by the smallest basis index.  Graphs with more than
    ``_LOW_BLOCK + 1`` vertices are swept block by block in Gray-code order
    over the high vertices so memory stays bounded.
    """
    if g.n > max_n:
        raise ValueError(f"brute force limited to n <= {max_n}, got n={g.n}")
    tol = 1e-12 * max(1.0, float(np.abs(g.weights).sum()))
    if g.n - 1 <= _LOW_BLOCK:
        table = cut_table(g, fix_first=True)
        kk = _argmax_first(table, tol)
        k = 2 * kk
    else:
        k = _blocked_search(g, tol)
    z = index_to_assignment(k, g.n)
    return MaxCutSolution(assignment=z, value=cut_value(g, z), index=k)


def _blocked_search(g: WeightedGraph, tol: float) -> int:
    W = g.adjacency
    L = _LOW_BLOCK
    low = WeightedGraph.from_edges(L + 1, [(i, j, w) for i, j, w in g.edges if j <= L])
    table = cut_table(low, fix_first=True)
    high = list(range(L + 1, g.n))
    # s_j[k] = weight from high vertex j to low vertices on the z=-1 side
    s = [_prefix_sums(W[j, : L + 1], 1) for j in high]
    tot = [W[j, : L + 1].sum() for j in high]
    H = len(high)
    Whh = W[np.ix_(high, high)]

    hbits = np.zeros(H, dtype=np.int64)
    acc = table + sum(s)  # every high vertex starts on the z=+1 side
    best_val, best_k = -np.inf, -1
    for step in range(1 << H):
        if step:
            b = (step & -step).bit_length() - 1
            # moving high vertex b across: low contribution s -> tot - s (or back)
            if hbits[b] == 0:
                acc += tot[b] - 2 * s[b]
            else:
                acc -= tot[b] - 2 * s[b]
            hbits[b] ^= 1
        hz = 1 - 2 * hbits
        c_high = 0.25 * float(np.sum(Whh * (1 - np.outer(hz, hz))))
        vals_max = acc.max() + c_high
        if vals_max >= best_val - tol:
            kk = _argmax_first(acc, tol)
            k = (kk << 1) | int((hbits << np.arange(L + 1, g.n)).sum())
            v = float(acc[kk] + c_high)
            if v > best_val + tol or (abs(v - best_val) <= tol and k < best_k):
                best_val, best_k = v, k
    return best_k


def approximation_ratio(g: WeightedGraph, achieved: float, optimum: float | None = None) -> float:
    """``achieved / optimum``; values above 1 are returned unclamped."""
    if achieved < 0:
        raise ValueError("achieved cut value must be non-negative")
    if optimum is None:
        optimum = brute_force_maxcut(g).value
    if optimum <= 0:
        raise ValueError("optimum cut is zero (graph has no positive-weight edges)")
    return float(achieved) / float(optimum)
