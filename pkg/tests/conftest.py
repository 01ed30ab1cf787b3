import itertools

import numpy as np
import pytest

from fairgraph.env import AdsEnvConfig, two_round_example
from fairgraph.graph import CompatibilityGraph

FULL3 = frozenset(itertools.product(range(3), range(3)))


@pytest.fixture
def single_edge():
    # a2 -> a3 plus self-loops; every action influences every regulariser
    return CompatibilityGraph(3, 3, frozenset({(1, 2)}), FULL3)


@pytest.fixture
def complete3():
    return CompatibilityGraph.complete(3)


@pytest.fixture
def edgeless3():
    return CompatibilityGraph.edgeless(3)


@pytest.fixture
def two_round_env():
    return two_round_example()


def random_digraph(rng, n, density=None, n_regs=None):
    density = rng.random() if density is None else density
    pairs = [(a, b) for a in range(n) for b in range(n) if a != b]
    keep = rng.random(len(pairs)) < density
    edges = frozenset(p for p, k in zip(pairs, keep) if k)
    n_regs = n if n_regs is None else n_regs
    return CompatibilityGraph(n, n_regs, edges, frozenset(itertools.product(range(n), range(n_regs))))


def random_env(rng, T, J=3, weight=None):
    targets = rng.dirichlet(np.ones(J))
    w = rng.random(J) * 0.5 if weight is None else np.full(J, weight)
    return AdsEnvConfig(targets, w, rng.random((T, J)))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
