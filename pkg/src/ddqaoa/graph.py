"""Weighted graphs, weight normalization, normalized density and test-graph generation.

Vertices are ``0..n-1`` and every edge is stored once as ``(i, j, w)`` with
``i < j``.  Graphs are immutable; derived arrays are cached on first use.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import networkx as nx
import numpy as np


class GraphGenerationError(RuntimeError):
    """Raised when random generation cannot produce the requested graphs."""


@dataclass(frozen=True)
class WeightedGraph:
    n: int
    edges: tuple[tuple[int, int, float], ...] = ()

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"vertex count must be a positive integer, got {self.n!r}")
        seen = set()
        canon = []
        for e in self.edges:
            i, j, w = int(e[0]), int(e[1]), float(e[2])
            if not (0 <= i < j < self.n):
                raise ValueError(f"edge ({i}, {j}) violates 0 <= i < j < n={self.n}")
            if (i, j) in seen:
                raise ValueError(f"duplicate edge ({i}, {j})")
            if not np.isfinite(w):
                raise ValueError(f"edge ({i}, {j}) has non-finite weight {w}")
            seen.add((i, j))
            canon.append((i, j, w))
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "edges", tuple(canon))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[float]], default_weight: float = 1.0):
        """Build a graph from ``(i, j)`` or ``(i, j, w)`` items in any orientation.

        Edges are reordered to ``i < j`` and sorted lexicographically.
        """
        out = []
        for e in edges:
            i, j = int(e[0]), int(e[1])
            w = float(e[2]) if len(e) > 2 else default_weight
            if i > j:
                i, j = j, i
            out.append((i, j, w))
        out.sort(key=lambda t: (t[0], t[1]))
        return cls(n, tuple(out))

    @classmethod
    def complete(cls, n: int) -> "WeightedGraph":
        return cls(n, tuple((i, j, 1.0) for i in range(n) for j in range(i + 1, n)))

    @classmethod
    def from_networkx(cls, G: nx.Graph, weight: str = "weight") -> "WeightedGraph":
        nodes = sorted(G.nodes)
        index = {v: k for k, v in enumerate(nodes)}
        return cls.from_edges(
            len(nodes),
            ((index[u], index[v], d.get(weight, 1.0)) for u, v, d in G.edges(data=True)),
        )

    def to_networkx(self) -> nx.Graph:
        G = nx.Graph()
        G.add_nodes_from(range(self.n))
        G.add_weighted_edges_from(self.edges)
        return G

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def edge_i(self) -> np.ndarray:
        return np.array([e[0] for e in self.edges], dtype=np.int64)

    @cached_property
    def edge_j(self) -> np.ndarray:
        return np.array([e[1] for e in self.edges], dtype=np.int64)

    @cached_property
    def weights(self) -> np.ndarray:
        return np.array([e[2] for e in self.edges], dtype=float)

    @cached_property
    def adjacency(self) -> np.ndarray:
        """Dense symmetric weight matrix."""
        W = np.zeros((self.n, self.n))
        if self.m:
            W[self.edge_i, self.edge_j] = self.weights
            W[self.edge_j, self.edge_i] = self.weights
        return W

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())

    @property
    def is_normalized(self) -> bool:
        return self.m == 0 or (bool(np.all(self.weights > 0)) and self.weights.max() == 1.0)

    @cached_property
    def density(self) -> float:
        return normalized_density(self)

    def relabel(self, perm: Sequence[int]) -> "WeightedGraph":
        """Return the graph with vertex ``v`` renamed to ``perm[v]``."""
        perm = list(perm)
        if sorted(perm) != list(range(self.n)):
            raise ValueError("perm must be a permutation of range(n)")
        return WeightedGraph.from_edges(self.n, ((perm[i], perm[j], w) for i, j, w in self.edges))

    def scaled(self, factor: float) -> "WeightedGraph":
        return WeightedGraph(self.n, tuple((i, j, w * factor) for i, j, w in self.edges))


def normalize_weights(g: WeightedGraph) -> WeightedGraph:
    """Divide every weight by the largest one so that ``max(w) == 1``.

    The Max-Cut argmax is unchanged by a positive rescaling.
    """
    if g.m == 0:
        raise ValueError("cannot normalize a graph without edges")
    w = g.weights
    if np.any(w <= 0):
        bad = g.edges[int(np.argmin(w))]
        raise ValueError(f"weights must be strictly positive, edge {bad[:2]} has {bad[2]}")
    wmax = w.max()
    edges = tuple((i, j, wij / wmax) for i, j, wij in g.edges)
    return WeightedGraph(g.n, edges)


def normalized_density(g: WeightedGraph) -> float:
    """Normalized weighted density ``sum(2 w_ij) / (n (n - 1))``."""
    if g.n < 2:
        raise ValueError("density needs at least 2 vertices")
    return float(2.0 * g.weights.sum() / (g.n * (g.n - 1)))


@dataclass(frozen=True)
class GraphGenSpec:
    n: int
    zero_probability: float = 0.0
    weighted: bool = True
    rng_seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if not 0.0 <= self.zero_probability <= 1.0:
            raise ValueError(f"zero_probability must lie in [0, 1], got {self.zero_probability}")


def random_graph(spec: GraphGenSpec) -> WeightedGraph:
    """Draw a random symmetric adjacency and drop each entry with ``spec.zero_probability``.

    Weights are uniform on (0, 1] for weighted graphs (1 otherwise) and are
    normalized afterwards.  An empty edge set is returned as-is.
    """
    rng = np.random.default_rng(spec.rng_seed)
    iu, ju = np.triu_indices(spec.n, k=1)
    if spec.weighted:
        w = 1.0 - rng.random(iu.size)
    else:
        w = np.ones(iu.size)
    keep = rng.random(iu.size) >= spec.zero_probability
    g = WeightedGraph(spec.n, tuple(zip(iu[keep].tolist(), ju[keep].tolist(), w[keep].tolist())))
    if g.m == 0:
        return g
    return normalize_weights(g)


def is_planar(g: WeightedGraph) -> bool:
    """Planarity via the left-right test; weights are ignored."""
    if g.n < 5:
        return True
    if g.n >= 3 and g.m > 3 * g.n - 6:
        return False
    planar, _ = nx.check_planarity(g.to_networkx())
    return bool(planar)


def _seed_stream(rng_seed: int, count: int) -> list[int]:
    children = np.random.SeedSequence(rng_seed).spawn(count)
    return [int(c.generate_state(1, dtype=np.uint64)[0]) for c in children]


def generate_test_suite(
    count: int,
    n: int,
    weighted: bool,
    rng_seed: int,
    oversample: int = 20,
    zero_probabilities: Sequence[float] | None = None,
) -> list[WeightedGraph]:
    """Random non-planar graphs with densities spread evenly over their achievable range.

    A pool of ``oversample * count`` graphs is drawn, with the sparsity
    probability swept uniformly over [0, 1) unless ``zero_probabilities``
    fixes the schedule.  Planar and edgeless graphs are discarded, the
    survivor density range is split into ``count`` equal bins and the survivor
    nearest each bin centre is kept.  Bins left empty are filled with the
    unused survivors closest to their centres.  The result is sorted by density.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if n < 5:
        raise GraphGenerationError(
            f"shortfall: requested {count} non-planar graphs but every graph on n={n} < 5 vertices is planar"
        )
    budget = max(oversample, 1) * count
    rng = np.random.default_rng(rng_seed)
    if zero_probabilities is None:
        probs = rng.random(budget)
    else:
        probs = np.resize(np.asarray(zero_probabilities, dtype=float), budget)
    seeds = _seed_stream(rng_seed, budget)

    pool: list[WeightedGraph] = []
    for q, s in zip(probs, seeds):
        g = random_graph(GraphGenSpec(n, float(q), weighted, s))
        if g.m and not is_planar(g):
            pool.append(g)
    if len(pool) < count:
        raise GraphGenerationError(
            f"shortfall: {len(pool)} non-planar graphs from a pool of {budget}, requested {count}"
        )

    pool.sort(key=lambda g: g.density)
    dens = np.array([g.density for g in pool])
    lo, hi = dens[0], dens[-1]
    width = (hi - lo) / count if hi > lo else 1.0
    centers = lo + (np.arange(count) + 0.5) * width
    bins = np.minimum(((dens - lo) / width).astype(int), count - 1) if hi > lo else np.zeros(len(pool), int)

    chosen: list[int] = []
    empty: list[int] = []
    for b in range(count):
        members = np.flatnonzero(bins == b)
        if members.size:
            chosen.append(int(members[np.argmin(np.abs(dens[members] - centers[b]))]))
        else:
            empty.append(b)
    used = set(chosen)
    for b in empty:
        free = [k for k in range(len(pool)) if k not in used]
        k = min(free, key=lambda k: abs(dens[k] - centers[b]))
        chosen.append(k)
        used.add(k)
    return [pool[k] for k in sorted(chosen)]


def graph_id(g: WeightedGraph) -> str:
    """Short content hash of the vertex count and exact edge list."""
    h = hashlib.sha256(str(g.n).encode())
    for i, j, w in g.edges:
        h.update(f"|{i},{j},{float(w).hex()}".encode())
    return "g" + h.hexdigest()[:16]
