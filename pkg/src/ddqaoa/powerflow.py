"""Newton-Raphson AC power flow and apparent-power edge weights.

Everything is per-unit on the case's ``base_mva``; angles are radians.
Injections are generation minus load, so loads carry negative ``P``/``Q``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from importlib import resources

import numpy as np

from .graph import WeightedGraph, normalize_weights

SLACK, PV, PQ = "slack", "PV", "PQ"


class PowerFlowError(RuntimeError):
    """Divergence, singular Jacobian or invalid case data."""


@dataclass(frozen=True)
class Bus:
    id: int
    kind: str
    P: float = 0.0
    Q: float = 0.0
    Vm: float = 1.0
    Va: float = 0.0


@dataclass(frozen=True)
class Branch:
    f: int
    t: int
    r: float
    x: float
    b_sh: float = 0.0

    @property
    def y(self) -> complex:
        return 1.0 / complex(self.r, self.x)


@dataclass
class PowerFlowCase:
    buses: list[Bus]
    branches: list[Branch]
    base_mva: float = 100.0
    name: str = ""

    def __post_init__(self):
        kinds = [b.kind for b in self.buses]
        bad = set(kinds) - {SLACK, PV, PQ}
        if bad:
            raise PowerFlowError(f"unknown bus kinds {sorted(bad)}")
        if kinds.count(SLACK) != 1:
            raise PowerFlowError(f"need exactly one slack bus, found {kinds.count(SLACK)}")
        ids = [b.id for b in self.buses]
        if len(set(ids)) != len(ids):
            raise PowerFlowError("duplicate bus ids")
        known = set(ids)
        for br in self.branches:
            if br.f not in known or br.t not in known or br.f == br.t:
                raise PowerFlowError(f"branch {br.f}-{br.t} references unknown buses or is a self-loop")

    @property
    def index(self) -> dict[int, int]:
        return {b.id: k for k, b in enumerate(self.buses)}

    def with_overrides(self, overrides: dict) -> "PowerFlowCase":
        """Copy with per-bus field overrides, e.g. ``{"7": {"P": 1.2}}`` for a DER scenario."""
        by_id = {str(k): v for k, v in overrides.items()}
        buses = [replace(b, **by_id[str(b.id)]) if str(b.id) in by_id else b for b in self.buses]
        return PowerFlowCase(buses, list(self.branches), self.base_mva, self.name)

    @classmethod
    def from_dict(cls, d: dict) -> "PowerFlowCase":
        buses = [Bus(int(b["id"]), b["kind"], float(b.get("P", 0.0)), float(b.get("Q", 0.0)),
                     float(b.get("Vm", 1.0)), float(b.get("Va", 0.0))) for b in d["buses"]]
        branches = [Branch(int(br["from"]), int(br["to"]), float(br["r"]), float(br["x"]),
                           float(br.get("b_sh", 0.0))) for br in d["branches"]]
        return cls(buses, branches, float(d.get("base_mva", 100.0)), d.get("name", ""))

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "base_mva": self.base_mva,
            "buses": [{"id": b.id, "kind": b.kind, "P": b.P, "Q": b.Q, "Vm": b.Vm, "Va": b.Va} for b in self.buses],
            "branches": [{"from": br.f, "to": br.t, "r": br.r, "x": br.x, "b_sh": br.b_sh} for br in self.branches],
        }


@dataclass
class PowerFlowSolution:
    V: np.ndarray
    mismatches: np.ndarray
    iterations: int
    converged: bool
    residual_trace: list[float] = field(default_factory=list)


def _check_connected(case: PowerFlowCase):
    idx = case.index
    parent = list(range(len(case.buses)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for br in case.branches:
        parent[find(idx[br.f])] = find(idx[br.t])
    roots = {find(a) for a in range(len(parent))}
    if len(roots) > 1:
        raise PowerFlowError(f"network is disconnected ({len(roots)} islands)")


def build_admittance(case: PowerFlowCase) -> np.ndarray:
    """Bus admittance matrix: series admittance plus half the line charging at each end."""
    _check_connected(case)
    idx = case.index
    n = len(case.buses)
    Y = np.zeros((n, n), dtype=complex)
    for br in case.branches:
        i, k = idx[br.f], idx[br.t]
        y = br.y
        half = 0.5j * br.b_sh
        Y[i, i] += y + half
        Y[k, k] += y + half
        Y[i, k] -= y
        Y[k, i] -= y
    return Y


def _mismatch(Y, V, P, Q, pvpq, pq):
    S = V * np.conj(Y @ V)
    return np.concatenate((S.real[pvpq] - P[pvpq], S.imag[pq] - Q[pq]))


def solve_power_flow(
    case: PowerFlowCase,
    tol: float = 1e-8,
    max_iter: int = 20,
    V0: np.ndarray | None = None,
) -> PowerFlowSolution:
    """Polar Newton-Raphson on P mismatches (PV and PQ buses) and Q mismatches (PQ buses).

    Flat start for unknown magnitudes and angles unless ``V0`` is given.
    """
    Y = build_admittance(case)
    kinds = np.array([b.kind for b in case.buses])
    P = np.array([b.P for b in case.buses])
    Q = np.array([b.Q for b in case.buses])
    pv = np.flatnonzero(kinds == PV)
    pq = np.flatnonzero(kinds == PQ)
    pvpq = np.concatenate((pv, pq))
    if V0 is None:
        Vm = np.array([b.Vm if b.kind != PQ else 1.0 for b in case.buses])
        Va = np.array([b.Va if b.kind == SLACK else 0.0 for b in case.buses])
    else:
        Vm, Va = np.abs(V0).astype(float), np.angle(V0)
    V = Vm * np.exp(1j * Va)

    F = _mismatch(Y, V, P, Q, pvpq, pq)
    trace = [float(np.abs(F).max()) if F.size else 0.0]
    it = 0
    while trace[-1] > tol and it < max_iter:
        it += 1
        # dS/dVa and dS/dVm in the usual compact complex form
        Ibus = Y @ V
        diagV = np.diag(V)
        dS_dVa = 1j * diagV @ np.conj(np.diag(Ibus) - Y @ diagV)
        dS_dVm = diagV @ np.conj(Y @ np.diag(V / np.abs(V))) + np.diag(np.conj(Ibus) * V / np.abs(V))
        J = np.block([
            [dS_dVa.real[np.ix_(pvpq, pvpq)], dS_dVm.real[np.ix_(pvpq, pq)]],
            [dS_dVa.imag[np.ix_(pq, pvpq)], dS_dVm.imag[np.ix_(pq, pq)]],
        ])
        try:
            dx = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError as exc:
            bad = np.flatnonzero(np.all(np.abs(J) < 1e-12, axis=1))
            raise PowerFlowError(f"singular Jacobian at iteration {it}; suspect rows {bad.tolist()}") from exc
        Va[pvpq] += dx[: pvpq.size]
        Vm[pq] += dx[pvpq.size:]
        V = Vm * np.exp(1j * Va)
        F = _mismatch(Y, V, P, Q, pvpq, pq)
        trace.append(float(np.abs(F).max()))
        if not np.isfinite(trace[-1]):
            break
    converged = trace[-1] <= tol
    if not converged:
        raise PowerFlowError(f"power flow did not converge in {it} iterations; residual trace {trace}")
    return PowerFlowSolution(V, F, it, True, trace)


def branch_flows(case: PowerFlowCase, sol: PowerFlowSolution):
    """Sending- and receiving-end complex power of every branch, ``(S_ft, S_tf)``."""
    idx = case.index
    S_ft, S_tf = [], []
    for br in case.branches:
        Vi, Vk = sol.V[idx[br.f]], sol.V[idx[br.t]]
        half = 0.5j * br.b_sh
        S_ft.append(Vi * np.conj((Vi - Vk) * br.y + Vi * half))
        S_tf.append(Vk * np.conj((Vk - Vi) * br.y + Vk * half))
    return np.array(S_ft), np.array(S_tf)


def bus_injections(case: PowerFlowCase, sol: PowerFlowSolution) -> np.ndarray:
    Y = build_admittance(case)
    return sol.V * np.conj(Y @ sol.V)


def line_weights(case: PowerFlowCase, sol: PowerFlowSolution, drop_below: float = 1e-9) -> WeightedGraph:
    """Normalized graph weighted by the larger end apparent power of each line.

    Parallel circuits between the same bus pair are merged by summing their
    complex flows before taking the magnitude.  Vertex ``k`` is the ``k``-th
    bus in case order.
    """
    if not sol.converged:
        raise PowerFlowError("line weights need a converged solution")
    idx = case.index
    S_ft, S_tf = branch_flows(case, sol)
    merged: dict[tuple[int, int], list[complex]] = {}
    for br, a, b in zip(case.branches, S_ft, S_tf):
        i, k = idx[br.f], idx[br.t]
        key, (sa, sb) = ((i, k), (a, b)) if i < k else ((k, i), (b, a))
        acc = merged.setdefault(key, [0j, 0j])
        acc[0] += sa
        acc[1] += sb
    edges = [(i, k, max(abs(sa), abs(sb))) for (i, k), (sa, sb) in sorted(merged.items())]
    edges = [e for e in edges if e[2] > drop_below]
    return normalize_weights(WeightedGraph(len(case.buses), tuple(edges)))


def _sample_doc(name: str) -> dict:
    text = resources.files("ddqaoa").joinpath("data").joinpath(f"{name}.json").read_text()
    return json.loads(text)


def load_sample_case(name: str = "rts24") -> PowerFlowCase:
    """Bundled representative 24-bus case (``data/<name>.json``)."""
    return PowerFlowCase.from_dict(_sample_doc(name))


def sample_scenarios(name: str = "rts24") -> dict[str, dict]:
    """Named bus-override sets shipped with the sample case."""
    return _sample_doc(name).get("scenarios", {})
