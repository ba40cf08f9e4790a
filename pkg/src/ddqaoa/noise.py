"""Depolarizing-noise QAOA: exact density matrices and Pauli trajectories.

The circuit is decomposed into one ``R_ZZ`` gate per edge followed by one
``R_X`` gate per qubit in every layer.  Each gate is followed by a
depolarizing channel on its support,

    D(rho) = (1 - p) rho + p * I/2^q (x) Tr_q(rho),

with ``p = p2`` for the two-qubit ``R_ZZ`` and ``p = p1`` for ``R_X``.
State preparation and measurement are noiseless.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import WeightedGraph
from .maxcut import cut_values
from .simulator import (
    MAX_QUBITS,
    QaoaParams,
    SampleDistribution,
    StateVector,
    _check_qubits,
    cost_table,
    sample,
)

MAX_DENSITY_QUBITS = 10


@dataclass(frozen=True)
class NoiseModel:
    p1: float
    p2: float

    def __post_init__(self):
        for name in ("p1", "p2"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")

    @classmethod
    def parse(cls, text: str) -> "NoiseModel":
        """``I``, ``II`` or ``custom:p1,p2``."""
        key = text.strip()
        if key in NOISE_MODELS:
            return NOISE_MODELS[key]
        if key.startswith("custom:"):
            p1, p2 = (float(x) for x in key[len("custom:"):].split(","))
            return cls(p1, p2)
        raise ValueError(f"unknown noise model {text!r}; expected I, II or custom:p1,p2")


NOISE_MODELS = {
    "I": NoiseModel(1e-3, 1e-2),
    "II": NoiseModel(1e-4, 1e-3),
    "none": NoiseModel(0.0, 0.0),
}


@dataclass
class DensityMatrix:
    n: int
    rho: np.ndarray

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.rho))

    def hermiticity_error(self) -> float:
        return float(np.abs(self.rho - self.rho.conj().T).max())

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh((self.rho + self.rho.conj().T) / 2).min())

    @property
    def probabilities(self) -> np.ndarray:
        return np.clip(np.real(np.diag(self.rho)), 0.0, None)

    @classmethod
    def from_state(cls, state: StateVector) -> "DensityMatrix":
        a = state.amplitudes
        return cls(state.n, np.outer(a, a.conj()))


def _edge_phase(n: int, i: int, j: int, angle: float) -> np.ndarray:
    k = np.arange(1 << n, dtype=np.int64)
    return np.exp(-1j * angle * (((k >> i) ^ (k >> j)) & 1))


def _rx(beta: float) -> np.ndarray:
    c, s = np.cos(beta), -1j * np.sin(beta)
    return np.array([[c, s], [s, c]])


def _apply_1q_rows(rho: np.ndarray, U: np.ndarray, q: int):
    N = rho.shape[0]
    v = rho.reshape(N >> (q + 1), 2, 1 << q, rho.shape[1])
    a0 = v[:, 0].copy()
    a1 = v[:, 1].copy()
    v[:, 0] = U[0, 0] * a0 + U[0, 1] * a1
    v[:, 1] = U[1, 0] * a0 + U[1, 1] * a1


def _apply_1q_cols(rho: np.ndarray, U: np.ndarray, q: int):
    N = rho.shape[1]
    v = rho.reshape(rho.shape[0], N >> (q + 1), 2, 1 << q)
    Uc = U.conj()
    a0 = v[:, :, 0].copy()
    a1 = v[:, :, 1].copy()
    v[:, :, 0] = Uc[0, 0] * a0 + Uc[0, 1] * a1
    v[:, :, 1] = Uc[1, 0] * a0 + Uc[1, 1] * a1


def depolarize(rho: np.ndarray, n: int, qubits, p: float) -> np.ndarray:
    """Apply ``(1-p) rho + p I/2^q (x) Tr_q rho`` on ``qubits``."""
    if p == 0.0:
        return rho
    T = rho.reshape((2,) * (2 * n))
    rows = list(range(n))
    cols = list(range(n, 2 * n))
    traced = [n - 1 - q for q in qubits]
    in_sub = rows + [cols[a] if a not in traced else rows[a] for a in range(n)]
    keep_rows = [a for a in range(n) if a not in traced]
    red_sub = keep_rows + [cols[a] for a in keep_rows]
    red = np.einsum(T, in_sub, red_sub)
    ops = [red, red_sub]
    eye = np.eye(2) / 2
    for a in traced:
        ops += [eye, [rows[a], cols[a]]]
    mixed = np.einsum(*ops, rows + cols).reshape(rho.shape)
    return (1.0 - p) * rho + p * mixed


def run_noisy_qaoa_density(
    g: WeightedGraph,
    params: QaoaParams,
    noise: NoiseModel,
    max_qubits: int = MAX_DENSITY_QUBITS,
) -> DensityMatrix:
    if g.n > max_qubits:
        raise ValueError(
            f"density-matrix simulation capped at n={max_qubits} (got {g.n}); "
            "use run_noisy_qaoa_trajectories for larger graphs"
        )
    _check_qubits(g.n, max_qubits)
    n, N = g.n, 1 << g.n
    rho = np.full((N, N), 1.0 / N, dtype=complex)
    for gk, bk in zip(params.gamma, params.beta):
        for i, j, w in g.edges:
            ph = _edge_phase(n, i, j, gk * w)
            rho *= np.outer(ph, ph.conj())
            rho = depolarize(rho, n, (i, j), noise.p2)
        U = _rx(bk)
        for q in range(n):
            _apply_1q_rows(rho, U, q)
            _apply_1q_cols(rho, U, q)
            rho = depolarize(rho, n, (q,), noise.p1)
    return DensityMatrix(n, rho)


def noisy_expectation(rho: DensityMatrix, g: WeightedGraph) -> float:
    """``Tr(rho H_C)``; only the diagonal is read because ``H_C`` is diagonal."""
    if rho.n != g.n:
        raise ValueError("density matrix and graph sizes differ")
    table = cost_table(g)
    if table is None:
        table = cut_values(g, np.arange(1 << g.n))
    return float(np.real(np.diag(rho.rho)) @ table)


def sample_density(rho: DensityMatrix, n_shots: int, rng_seed: int) -> SampleDistribution:
    probs = np.real(np.diag(rho.rho)).clip(min=0.0)
    return sample(StateVector(rho.n, np.sqrt(probs)), n_shots, rng_seed)


def _apply_pauli(psi: np.ndarray, n: int, q: int, which: int):
    """Pauli ``which`` in {1: X, 2: Y, 3: Z} on qubit ``q`` (in place)."""
    v = psi.reshape(1 << (n - q - 1), 2, 1 << q)
    if which in (2, 3):
        v[:, 1] *= -1
    if which in (1, 2):
        v[:, [0, 1]] = v[:, [1, 0]]
    if which == 2:
        v *= 1j


def _maybe_pauli(psi, n, support, p, rng):
    # non-identity Pauli with probability p (1 - 4^-q): matches D(rho) with parameter p
    q = len(support)
    if p == 0.0 or rng.random() >= p * (1.0 - 4.0**-q):
        return
    code = int(rng.integers(1, 4**q))
    for t, qubit in enumerate(support):
        which = (code >> (2 * t)) & 3
        if which:
            _apply_pauli(psi, n, qubit, which)


def _trajectory_state(g: WeightedGraph, params: QaoaParams, noise: NoiseModel, rng) -> np.ndarray:
    n, N = g.n, 1 << g.n
    psi = np.full(N, 2.0 ** (-n / 2), dtype=complex)
    k = np.arange(N, dtype=np.int64)
    crossed = [((k >> i) ^ (k >> j)) & 1 for i, j, _ in g.edges]
    for gk, bk in zip(params.gamma, params.beta):
        for (i, j, w), cr in zip(g.edges, crossed):
            psi *= np.exp(-1j * gk * w * cr)
            _maybe_pauli(psi, n, (i, j), noise.p2, rng)
        c, s = np.cos(bk), -1j * np.sin(bk)
        for q in range(n):
            v = psi.reshape(N >> (q + 1), 2, 1 << q)
            a0 = v[:, 0].copy()
            v[:, 0] = c * a0 + s * v[:, 1]
            v[:, 1] = s * a0 + c * v[:, 1]
            _maybe_pauli(psi, n, (q,), noise.p1, rng)
    return psi


def run_noisy_qaoa_trajectories(
    g: WeightedGraph,
    params: QaoaParams,
    noise: NoiseModel,
    n_traj: int,
    n_shots: int,
    rng_seed: int,
    max_qubits: int = MAX_QUBITS,
) -> SampleDistribution:
    """Monte Carlo unraveling: ``n_shots`` samples per trajectory, pooled."""
    _check_qubits(g.n, max_qubits)
    if n_traj < 1 or n_shots < 1:
        raise ValueError("n_traj and n_shots must be >= 1")
    seeds = np.random.SeedSequence(rng_seed).spawn(n_traj)
    pooled: dict[int, int] = {}
    for ss in seeds:
        rng = np.random.default_rng(ss)
        psi = _trajectory_state(g, params, noise, rng)
        dist = sample(StateVector(g.n, psi), n_shots, int(rng.integers(2**63)))
        for k, c in dist.counts.items():
            pooled[k] = pooled.get(k, 0) + c
    return SampleDistribution(pooled, n_traj * n_shots, g.n)


def trajectory_expectations(
    g: WeightedGraph,
    params: QaoaParams,
    noise: NoiseModel,
    n_traj: int,
    rng_seed: int,
) -> np.ndarray:
    """Exact cut expectation of each trajectory's pure state (no shot noise).

    Same trajectory seeds as :func:`run_noisy_qaoa_trajectories`, so the
    sample mean estimates the density-matrix expectation with standard error
    ``std / sqrt(n_traj)``.
    """
    table = cost_table(g)
    if table is None:
        table = cut_values(g, np.arange(1 << g.n))
    out = np.empty(n_traj)
    for t, ss in enumerate(np.random.SeedSequence(rng_seed).spawn(n_traj)):
        psi = _trajectory_state(g, params, noise, np.random.default_rng(ss))
        out[t] = (np.abs(psi) ** 2) @ table
    return out
