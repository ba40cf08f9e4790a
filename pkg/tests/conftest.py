import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from ddqaoa.graph import GraphGenSpec, WeightedGraph, random_graph

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_weighted():
    return random_graph(GraphGenSpec(6, 0.3, True, 7))


@pytest.fixture
def k4():
    return WeightedGraph.complete(4)


def random_small_graph(rng, n=None, weighted=True):
    n = int(rng.integers(2, 7)) if n is None else n
    while True:
        g = random_graph(GraphGenSpec(n, float(rng.uniform(0, 0.7)), weighted, int(rng.integers(2**31))))
        if g.m:
            return g


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("tests.test_acceptance") or sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for k in sorted(lines):
            terminalreporter.write_line(lines[k])
