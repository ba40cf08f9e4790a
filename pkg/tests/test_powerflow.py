import numpy as np
import pytest
from scipy.optimize import fsolve

from ddqaoa.powerflow import (
    Branch,
    Bus,
    PowerFlowCase,
    PowerFlowError,
    branch_flows,
    build_admittance,
    bus_injections,
    line_weights,
    load_sample_case,
    sample_scenarios,
    solve_power_flow,
)


def two_bus(P, Q, R, X, V1=1.0):
    return PowerFlowCase([Bus(1, "slack", Vm=V1), Bus(2, "PQ", P=-P, Q=-Q)], [Branch(1, 2, R, X)])


def analytic_v2(P, Q, R, X, V1=1.0):
    a, b = R * P + X * Q, X * P - R * Q
    # |V1|^2 u = (u + a)^2 + b^2 with u = |V2|^2, larger root
    u = max(np.roots([1.0, 2 * a - V1**2, a * a + b * b]).real)
    return np.conj((u + a + 1j * b) / V1)


@pytest.mark.parametrize("P,Q,R,X,V1", [
    (0.5, 0.2, 0.02, 0.1, 1.0),
    (1.2, 0.4, 0.01, 0.08, 1.05),
    (-0.3, 0.1, 0.05, 0.2, 0.98),
    (0.0, 0.0, 0.03, 0.3, 1.0),
])
def test_two_bus_analytic(P, Q, R, X, V1):
    sol = solve_power_flow(two_bus(P, Q, R, X, V1))
    assert abs(sol.V[1] - analytic_v2(P, Q, R, X, V1)) < 1e-8
    assert sol.converged


def rectangular_oracle(case):
    """Solve the same mismatch equations in rectangular coordinates with fsolve."""
    Y = build_admittance(case)
    kinds = [b.kind for b in case.buses]
    n = len(kinds)
    slack = kinds.index("slack")
    V0 = np.array([b.Vm * np.exp(1j * b.Va) for b in case.buses], dtype=complex)

    def unpack(x):
        V = V0.copy()
        free = [k for k in range(n) if k != slack]
        V[free] = x[: n - 1] + 1j * x[n - 1 :]
        return V

    def resid(x):
        V = unpack(x)
        S = V * np.conj(Y @ V)
        out = []
        for k, b in enumerate(case.buses):
            if b.kind == "PQ":
                out += [S[k].real - b.P, S[k].imag - b.Q]
            elif b.kind == "PV":
                out += [S[k].real - b.P, abs(V[k]) ** 2 - b.Vm**2]
        return out

    start = np.concatenate([np.ones(n - 1), np.zeros(n - 1)])
    return unpack(fsolve(resid, start, xtol=1e-13))


def test_sample_case_converges_and_balances():
    case = load_sample_case()
    assert len(case.buses) == 24
    sol = solve_power_flow(case)
    assert sol.iterations <= 10
    S = bus_injections(case, sol)
    for k, b in enumerate(case.buses):
        if b.kind != "slack":
            assert abs(S[k].real - b.P) <= 1e-6
        if b.kind == "PQ":
            assert abs(S[k].imag - b.Q) <= 1e-6
        if b.kind == "PV":
            assert abs(abs(sol.V[k]) - b.Vm) <= 1e-12
    S_ft, S_tf = branch_flows(case, sol)
    # losses are non-negative and equal the net injection
    assert np.all((S_ft + S_tf).real >= -1e-12)
    assert (S_ft + S_tf).real.sum() == pytest.approx(S.real.sum(), abs=1e-9)
    assert np.abs(sol.V - rectangular_oracle(case)).max() < 1e-8


def test_scenarios_change_density():
    case = load_sample_case()
    scen = sample_scenarios()
    assert {"der_low", "der_high"} <= set(scen)
    dens = []
    for name in ("der_low", "der_high"):
        c = case.with_overrides(scen[name])
        sol = solve_power_flow(c)
        assert sol.iterations <= 10
        g = line_weights(c, sol)
        assert g.is_normalized and g.n == 24
        dens.append(g.density)
    assert dens[0] != dens[1]


def test_line_weights_two_bus():
    case = two_bus(0.5, 0.2, 0.02, 0.1)
    g = line_weights(case, solve_power_flow(case))
    assert g.edges == ((0, 1, 1.0),)


def test_parallel_branches_merge():
    one = PowerFlowCase([Bus(1, "slack"), Bus(2, "PQ", P=-0.4), Bus(3, "PQ", P=-0.2)],
                        [Branch(1, 2, 0.01, 0.1), Branch(2, 3, 0.01, 0.1)])
    two = PowerFlowCase(one.buses, [Branch(1, 2, 0.02, 0.2), Branch(2, 1, 0.02, 0.2), Branch(2, 3, 0.01, 0.1)])
    g1 = line_weights(one, solve_power_flow(one))
    g2 = line_weights(two, solve_power_flow(two))
    assert g2.m == 2
    assert np.allclose(g1.weights, g2.weights, atol=1e-9)


def test_invalid_cases():
    with pytest.raises(PowerFlowError):
        PowerFlowCase([Bus(1, "PQ"), Bus(2, "PQ")], [Branch(1, 2, 0.0, 0.1)])
    with pytest.raises(PowerFlowError):
        PowerFlowCase([Bus(1, "slack"), Bus(2, "slack")], [])
    with pytest.raises(PowerFlowError):
        PowerFlowCase([Bus(1, "slack")], [Branch(1, 5, 0.0, 0.1)])
    with pytest.raises(PowerFlowError, match="disconnected"):
        solve_power_flow(PowerFlowCase([Bus(1, "slack"), Bus(2, "PQ"), Bus(3, "PQ")], [Branch(1, 2, 0.0, 0.1)]))


def test_divergence_reported():
    with pytest.raises(PowerFlowError, match="converge|singular"):
        solve_power_flow(two_bus(50.0, 20.0, 0.02, 0.1), max_iter=15)


def test_case_dict_roundtrip():
    case = load_sample_case()
    assert PowerFlowCase.from_dict(case.to_dict()).to_dict() == case.to_dict()
