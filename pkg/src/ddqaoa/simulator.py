"""Noiseless QAOA state-vector simulation for weighted Max-Cut.

Basis index ``k`` encodes vertex ``b`` in bit ``b``; bit 0 is ``z = +1``.
The cost unitary is applied as the diagonal phase ``exp(-i gamma C(Z_k))``,
which equals the product of ``R_ZZ(-gamma w_ij)`` gates up to a global phase.
The mixer applies ``R_X(2 beta)`` to every qubit.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .graph import WeightedGraph
from .maxcut import cut_table, cut_values, index_to_assignment

MAX_QUBITS = 24
# cut tables are cached while 2**n * 8 bytes stays under this budget
CUT_TABLE_BUDGET = 1 << 28

# batched mixer switches from dense half-register products to butterflies above this
_SPLIT_MAX_QUBITS = 14

N_SHOTS_CAMPAIGN = 2**19
N_SHOTS_QUICK = 2048


@dataclass(frozen=True)
class QaoaParams:
    gamma: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        g = np.atleast_1d(np.asarray(self.gamma, dtype=float)).copy()
        b = np.atleast_1d(np.asarray(self.beta, dtype=float)).copy()
        if g.ndim != 1 or g.shape != b.shape:
            raise ValueError(f"gamma and beta must be 1-d of equal length, got {g.shape} and {b.shape}")
        if g.size < 1:
            raise ValueError("need at least one layer")
        g.flags.writeable = False
        b.flags.writeable = False
        object.__setattr__(self, "gamma", g)
        object.__setattr__(self, "beta", b)

    @property
    def p(self) -> int:
        return self.gamma.size

    @classmethod
    def from_vector(cls, x) -> "QaoaParams":
        x = np.asarray(x, dtype=float)
        if x.size % 2:
            raise ValueError("parameter vector must have even length 2p")
        p = x.size // 2
        return cls(x[:p], x[p:])

    def to_vector(self) -> np.ndarray:
        return np.concatenate((self.gamma, self.beta))

    def canonical(self) -> "QaoaParams":
        """Copy with gamma reduced into [0, 2 pi) and beta into [0, pi).

        Only a storage convention: with non-integer weights the cost unitary is
        not 2 pi periodic in gamma, so the reduced angles can behave differently.
        """
        return QaoaParams(np.mod(self.gamma, 2 * np.pi), np.mod(self.beta, np.pi))

    def __eq__(self, other):
        if not isinstance(other, QaoaParams):
            return NotImplemented
        return np.array_equal(self.gamma, other.gamma) and np.array_equal(self.beta, other.beta)

    def __hash__(self):
        return hash((self.gamma.tobytes(), self.beta.tobytes()))


@dataclass
class StateVector:
    n: int
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (1 << self.n,):
            raise ValueError(f"expected {1 << self.n} amplitudes for n={self.n}")

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm(self) -> float:
        return float(np.sqrt(self.probabilities.sum()))

    @classmethod
    def basis(cls, n: int, k: int) -> "StateVector":
        amp = np.zeros(1 << n, dtype=complex)
        amp[k] = 1.0
        return cls(n, amp)


@dataclass
class SampleDistribution:
    counts: dict[int, int]
    n_shots: int
    n: int = 0

    def __post_init__(self):
        total = sum(self.counts.values())
        if total != self.n_shots:
            raise ValueError(f"counts sum to {total}, expected {self.n_shots}")
        if self.n and any(k < 0 or k >= (1 << self.n) for k in self.counts):
            raise ValueError("sampled index out of range")

    def frequencies(self) -> dict[int, float]:
        return {k: c / self.n_shots for k, c in sorted(self.counts.items())}


def _check_qubits(n: int, max_qubits: int):
    if n < 1 or n > max_qubits:
        raise ValueError(f"qubit count must be in [1, {max_qubits}], got {n}")


def cost_table(g: WeightedGraph, budget: int = CUT_TABLE_BUDGET) -> np.ndarray | None:
    """Cut value of every basis state, or ``None`` when it exceeds ``budget`` bytes."""
    if (1 << g.n) * 8 > budget:
        return None
    return cut_table(g)


def prepare_plus_state(n: int, max_qubits: int = MAX_QUBITS) -> StateVector:
    _check_qubits(n, max_qubits)
    return StateVector(n, np.full(1 << n, 2.0 ** (-n / 2), dtype=complex))


def _phase_inplace(psi: np.ndarray, g: WeightedGraph, gamma, table):
    if table is not None:
        psi *= np.exp(-1j * np.multiply.outer(gamma, table)) if np.ndim(gamma) else np.exp(-1j * gamma * table)
        return
    # streaming path: one R_ZZ-equivalent phase per edge
    k = np.arange(psi.shape[-1], dtype=np.int64)
    for i, j, w in g.edges:
        crossed = ((k >> i) ^ (k >> j)) & 1
        psi *= np.exp(-1j * np.multiply.outer(gamma, w * crossed)) if np.ndim(gamma) else np.exp(-1j * gamma * w * crossed)


def _mixer_inplace(psi: np.ndarray, n: int, beta):
    """Butterfly ``R_X(2 beta)`` on each qubit; ``psi`` is ``(N,)`` or ``(B, N)``."""
    batch = psi.reshape(-1, psi.shape[-1])
    c = np.cos(beta)
    s = -1j * np.sin(beta)
    if np.ndim(beta):
        c = np.reshape(c, (-1, 1, 1))
        s = np.reshape(s, (-1, 1, 1))
    B, N = batch.shape
    for q in range(n):
        view = batch.reshape(B, N >> (q + 1), 2, 1 << q)
        a0 = view[:, :, 0, :]
        a1 = view[:, :, 1, :]
        new0 = c * a0 + s * a1
        a1 *= c
        a1 += s * a0
        view[:, :, 0, :] = new0


@lru_cache(maxsize=32)
def _hamming(k: int) -> np.ndarray:
    idx = np.arange(1 << k)
    x = idx[:, None] ^ idx[None, :]
    return np.array([[bin(v).count("1") for v in row] for row in x], dtype=np.int64)


def _split_mixer(psi: np.ndarray, n: int, betas: np.ndarray) -> np.ndarray:
    """Batched mixer as ``M_hi @ X @ M_lo`` with ``X`` the ``(2**h, 2**l)`` reshaped state.

    ``R_X(2 beta)^{(x) k}`` has entry ``cos^(k-d) (-i sin)^d`` with ``d`` the
    Hamming distance of row and column; faster than butterflies for small n.
    """
    B = psi.shape[0]
    h = n // 2
    lo = n - h
    c, sn = np.cos(betas), np.sin(betas)
    powers = np.arange(lo + 1)
    cp = c[:, None] ** powers
    sp = sn[:, None] ** powers * (-1j) ** powers

    def kron_power(k):
        # one coefficient per Hamming distance, then a single gather
        coef = cp[:, k - powers[: k + 1]] * sp[:, : k + 1]
        return np.ascontiguousarray(coef[:, _hamming(k)])

    Mh = kron_power(h)
    Ml = kron_power(lo) if lo != h else Mh
    X = psi.reshape(B, 1 << h, 1 << lo)
    out = np.empty_like(X)
    # per-item BLAS calls beat numpy's stacked complex matmul here
    for b in range(B):
        np.matmul(Mh[b] @ X[b], Ml[b], out=out[b])
    return out.reshape(B, -1)


def apply_cost_layer(state: StateVector, g: WeightedGraph, gamma_k: float, table=None) -> StateVector:
    if state.n != g.n:
        raise ValueError(f"state has {state.n} qubits but graph has {g.n} vertices")
    if table is None:
        table = cost_table(g)
    psi = state.amplitudes.copy()
    _phase_inplace(psi, g, float(gamma_k), table)
    return StateVector(state.n, psi)


def apply_mixer_layer(state: StateVector, beta_k: float) -> StateVector:
    psi = state.amplitudes.copy()
    _mixer_inplace(psi, state.n, float(beta_k))
    return StateVector(state.n, psi)


def run_qaoa_circuit(g: WeightedGraph, params: QaoaParams, table=None, max_qubits: int = MAX_QUBITS) -> StateVector:
    """Plus state followed by ``p`` rounds of cost phase then mixer."""
    state = prepare_plus_state(g.n, max_qubits)
    if table is None:
        table = cost_table(g)
    psi = state.amplitudes
    for gk, bk in zip(params.gamma, params.beta):
        _phase_inplace(psi, g, float(gk), table)
        _mixer_inplace(psi, g.n, float(bk))
    return state


def exact_expectation(state: StateVector, g: WeightedGraph, table=None) -> float:
    if state.n != g.n:
        raise ValueError(f"state has {state.n} qubits but graph has {g.n} vertices")
    if table is None:
        table = cost_table(g)
    probs = state.probabilities
    if table is not None:
        return float(probs @ table)
    return float(probs @ cut_values(g, np.arange(probs.size)))


def cost_variance(state: StateVector, g: WeightedGraph, table=None) -> float:
    """Variance of the cut value under the measurement distribution of ``state``."""
    if table is None:
        table = cut_values(g, np.arange(1 << g.n))
    probs = state.probabilities
    mean = probs @ table
    return float(probs @ (table - mean) ** 2)


def sample(state: StateVector, n_shots: int, rng_seed: int) -> SampleDistribution:
    """Draw ``n_shots`` outcomes by inverse-CDF lookup on ``|alpha_k|^2``."""
    if n_shots < 1:
        raise ValueError("n_shots must be >= 1")
    rng = np.random.default_rng(rng_seed)
    cdf = np.cumsum(state.probabilities)
    u = rng.random(n_shots) * cdf[-1]
    idx = np.searchsorted(cdf, u, side="right")
    np.minimum(idx, cdf.size - 1, out=idx)
    keys, counts = np.unique(idx, return_counts=True)
    return SampleDistribution(dict(zip(keys.tolist(), counts.tolist())), n_shots, state.n)


def estimate_from_samples(dist: SampleDistribution, g: WeightedGraph):
    """Shot-averaged cut value and the best observed cut.

    Returns ``(mean, best_assignment, best_value)``; ties on the best value go
    to the smallest basis index.
    """
    if not dist.counts:
        raise ValueError("empty sample distribution")
    keys = np.array(sorted(dist.counts), dtype=np.int64)
    freq = np.array([dist.counts[k] for k in keys.tolist()], dtype=float) / dist.n_shots
    cuts = cut_values(g, keys)
    best = int(np.argmax(cuts))
    return float(freq @ cuts), index_to_assignment(int(keys[best]), g.n), float(cuts[best])


@dataclass
class QaoaEvaluator:
    """Repeated QAOA evaluations on one graph with a shared cut table.

    ``expectation_batch`` runs many parameter sets at once as a ``(B, 2**n)``
    array, which is how the optimizers evaluate finite-difference stencils.
    """

    graph: WeightedGraph
    optimum: float | None = None
    max_batch_bytes: int = 1 << 27
    table: np.ndarray | None = field(default=None, repr=False)
    evaluations: int = 0

    def __post_init__(self):
        if self.table is None:
            self.table = cost_table(self.graph)
        self._levels = None
        if self.table is not None:
            levels, inverse = np.unique(self.table, return_inverse=True)
            # few distinct cut values (unweighted graphs): exponentiate once per level
            if levels.size * 4 <= self.table.size:
                self._levels = (levels, inverse)

    def _phase_batch(self, psi, gammas):
        if self._levels is None:
            _phase_inplace(psi, self.graph, gammas, self.table)
            return
        levels, inverse = self._levels
        psi *= np.exp(-1j * np.multiply.outer(gammas, levels))[:, inverse]

    def state(self, params: QaoaParams) -> StateVector:
        self.evaluations += 1
        return run_qaoa_circuit(self.graph, params, table=self.table)

    def expectation(self, params: QaoaParams) -> float:
        return exact_expectation(self.state(params), self.graph, table=self.table)

    def ratio(self, params: QaoaParams) -> float:
        if not self.optimum:
            raise ValueError("evaluator has no optimum; pass optimum= to compute ratios")
        return self.expectation(params) / self.optimum

    def expectation_batch(self, gammas, betas) -> np.ndarray:
        gammas = np.atleast_2d(np.asarray(gammas, dtype=float))
        betas = np.atleast_2d(np.asarray(betas, dtype=float))
        if gammas.shape != betas.shape:
            raise ValueError("gamma and beta batches must have the same shape")
        n, N = self.graph.n, 1 << self.graph.n
        chunk = max(1, self.max_batch_bytes // (16 * N))
        table = self.table if self.table is not None else cut_values(self.graph, np.arange(N))
        out = np.empty(gammas.shape[0])
        for lo in range(0, gammas.shape[0], chunk):
            G = gammas[lo : lo + chunk]
            Bt = betas[lo : lo + chunk]
            psi = np.full((G.shape[0], N), 2.0 ** (-n / 2), dtype=complex)
            for layer in range(G.shape[1]):
                self._phase_batch(psi, G[:, layer])
                if 2 <= n <= _SPLIT_MAX_QUBITS:
                    psi = _split_mixer(psi, n, Bt[:, layer])
                else:
                    _mixer_inplace(psi, n, Bt[:, layer])
            probs = psi.real**2 + psi.imag**2
            out[lo : lo + chunk] = probs @ table
        self.evaluations += gammas.shape[0]
        return out

    def vector_batch(self, X) -> np.ndarray:
        """Expectations for rows ``[gamma..., beta...]`` of ``X``."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        p = X.shape[1] // 2
        return self.expectation_batch(X[:, :p], X[:, p:])
