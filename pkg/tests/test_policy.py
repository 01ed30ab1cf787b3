import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fairgraph.errors import ConfigError, ContractError
from fairgraph.graph import CompatibilityGraph, GraphSchedule
from fairgraph.lp import solve_xi
from fairgraph.policy import (
    Learner,
    PolicyConfig,
    PolicyState,
    _mixed_from_logs,
    begin_round,
    bias,
    estimated_rewards,
    init,
    mixed_distribution,
    observation_probabilities,
    sample_action,
    theorem_bound,
    update,
)

from conftest import random_digraph


def test_init(single_edge):
    cfg = PolicyConfig(3, 0.1, 0.2)
    st_ = init(cfg, single_edge)
    assert st_.phi.tolist() == [1, 1, 1] and st_.phi.sum() == 3
    assert st_.beta == pytest.approx(0.2 * math.sqrt(math.log(75) / math.log(3)), abs=1e-12)
    assert st_.beta == pytest.approx(0.3963, abs=5e-4)
    assert st_.xi.objective == pytest.approx(0.5)
    assert bias(1e-9, 0.2, 2) < 1e-8


@pytest.mark.parametrize("kwargs", [
    dict(n_actions=3, eta=0.2, delta=0.2),
    dict(n_actions=3, eta=0.0, delta=0.2),
    dict(n_actions=3, eta=0.1, delta=1.0),
    dict(n_actions=1, eta=0.1, delta=0.5),
    dict(n_actions=3, eta=0.1, delta=0.5, variant="greedy"),
])
def test_config_validation(kwargs):
    with pytest.raises(ConfigError):
        PolicyConfig(**kwargs)


def test_begin_round_complete_graph(complete3):
    cfg = PolicyConfig(3, 0.05, 0.2)
    st_ = begin_round(cfg, init(cfg, complete3), complete3)
    assert st_.p == pytest.approx([1 / 3] * 3, abs=1e-12)
    assert st_.q == pytest.approx([1, 1, 1], abs=1e-12)
    assert st_.gamma == pytest.approx((1 + st_.beta) * 0.05)


def test_begin_round_edgeless():
    g = CompatibilityGraph.edgeless(2)
    cfg = PolicyConfig(2, 0.1, 0.2)
    st_ = begin_round(cfg, init(cfg, g), g)
    assert st_.xi.xi == pytest.approx([0.5, 0.5])
    assert np.array_equal(st_.q, st_.p)


def test_mixing_without_exploration():
    assert mixed_distribution([2, 1, 1], [0.2, 0.3, 0.5], 0.0) == pytest.approx([0.5, 0.25, 0.25])


def test_rescaling_invariance():
    rng = np.random.default_rng(0)
    for _ in range(50):
        phi = rng.random(4) + 0.1
        xi = rng.dirichlet(np.ones(4))
        gamma = rng.random()
        base = mixed_distribution(phi, xi, gamma)
        c = 10.0 ** rng.uniform(-50, 50)
        assert np.abs(mixed_distribution(phi * c, xi, gamma) - base).max() <= 1e-12
        assert np.abs(_mixed_from_logs(np.log(phi) + math.log(c), xi, gamma) - base).max() <= 1e-12


def test_sample_action():
    g = CompatibilityGraph.edgeless(3)
    st_ = PolicyState(np.zeros(3), 0.0, g, p=np.array([1.0, 0.0, 0.0]))
    rng = np.random.default_rng(1)
    assert {sample_action(st_, rng) for _ in range(200)} == {0}
    half = PolicyState(np.zeros(2), 0.0, CompatibilityGraph.edgeless(2), p=np.array([0.5, 0.5]))
    draws = [sample_action(half, rng) for _ in range(100_000)]
    assert 0.49 <= draws.count(0) / len(draws) <= 0.51
    a = [sample_action(half, np.random.default_rng(5)) for _ in range(3)]
    r1, r2 = np.random.default_rng(7), np.random.default_rng(7)
    assert [sample_action(half, r1) for _ in range(50)] == [sample_action(half, r2) for _ in range(50)]
    assert len(set(a)) == 1


def _state(g, q, beta):
    n = g.n_actions
    return PolicyState(np.zeros(n), beta, g, p=np.full(n, 1 / n), q=np.asarray(q, dtype=float))


def test_update_examples(edgeless3):
    cfg = PolicyConfig(3, 0.1, 0.2)
    nxt = update(cfg, _state(edgeless3, [0.5, 0.5, 0.5], 0.0), 0, [(0, 0.5)])
    assert nxt.phi == pytest.approx([math.exp(0.1), 1, 1], abs=1e-12)
    assert nxt.t == 2
    same = update(cfg, _state(edgeless3, [0.5, 0.5, 0.5], 0.0), 1, [(1, 0.0)])
    assert same.phi.tolist() == [1, 1, 1]
    r_hat = estimated_rewards({0: 1.0}, np.full(3, 0.8), 0.4)
    assert r_hat == pytest.approx([1.75, 0.5, 0.5])


def test_update_contracts(single_edge):
    cfg = PolicyConfig(3, 0.1, 0.2)
    st_ = begin_round(cfg, init(cfg, single_edge), single_edge)
    with pytest.raises(ContractError, match="out-neighbours"):
        update(cfg, st_, 1, [(1, 0.5)])
    with pytest.raises(ContractError, match="normalised"):
        update(cfg, st_, 0, [(0, 1.5)])


def test_static_rejects_new_graph(single_edge, complete3):
    cfg = PolicyConfig(3, 0.1, 0.2, "static")
    with pytest.raises(ContractError):
        begin_round(cfg, init(cfg, single_edge), complete3)


def test_estimator_is_unbiased_without_bias_term():
    rng = np.random.default_rng(42)
    for _ in range(100):
        n = int(rng.integers(2, 7))
        g = random_digraph(rng, n)
        p = rng.dirichlet(np.ones(n))
        r = rng.random(n)
        q = observation_probabilities(p, g)
        expected = np.zeros(n)
        for i in range(n):
            seen = {k: r[k] for k in g.out_neighbours(i)}
            expected += p[i] * estimated_rewards(seen, q, 0.0)
        assert np.abs(expected - r).max() <= 1e-9


def test_gamma_clamp():
    g = CompatibilityGraph.edgeless(2)
    cfg = PolicyConfig(2, 1 / 6, 1e-200)
    st_ = begin_round(cfg, init(cfg, g), g)
    assert st_.gamma_clamped and st_.gamma == 1.0
    assert st_.p == pytest.approx(st_.xi.xi)


def test_overflow_guard(edgeless3):
    cfg = PolicyConfig(3, 0.1, 0.2)
    st_ = _state(edgeless3, [0.5, 0.5, 0.5], 0.0)
    big = PolicyState(np.array([690.7, 0.0, 0.0]), 0.0, edgeless3, p=st_.p, q=st_.q)
    nxt = update(cfg, big, 0, [(0, 1.0)])
    assert np.isfinite(nxt.phi).all() and nxt.log_phi.max() == 0.0
    xi = np.full(3, 1 / 3)
    unguarded = mixed_distribution([math.exp(690.9 - 600), math.exp(-600), math.exp(-600)], xi, 0.1)
    assert np.abs(_mixed_from_logs(nxt.log_phi, xi, 0.1) - unguarded).max() <= 1e-12


def _run(cfg, schedule, T, seed):
    learner = Learner(cfg, schedule.graph(1))
    rng = np.random.default_rng(seed)
    rewards = np.random.default_rng(seed + 1).random((T, cfg.n_actions))
    actions = []
    for t in range(1, T + 1):
        g = schedule.graph(t)
        st_ = learner.begin_round(g)
        assert abs(st_.p.sum() - 1) <= 1e-9
        assert st_.q.min() > 0
        if cfg.variant != "uniform_baseline":
            # q is bounded below by the in-coverage of xi; this equals the LP
            # objective bound only when the graph is symmetric
            assert (st_.q >= st_.gamma * (st_.xi.xi @ g.adjacency) - 1e-12).all()
            assert (st_.p >= st_.gamma * st_.xi.xi - 1e-12).all()
            if g.adjacency.tolist() == g.adjacency.T.tolist():
                assert st_.q.min() >= st_.gamma * st_.xi.objective - 1e-12
        else:
            assert np.array_equal(st_.p, np.full(cfg.n_actions, 1 / cfg.n_actions))
        a = learner.sample_action(rng)
        learner.update(a, [(n, rewards[t - 1, n]) for n in g.out_neighbours(a)])
        actions.append(a)
    return actions


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31), n=st.integers(2, 5))
def test_static_equals_time_varying_on_constant_schedule(seed, n):
    g = random_digraph(np.random.default_rng(seed), n)
    schedule = GraphSchedule.constant(g)
    eta = 1 / (3 * n)
    a = _run(PolicyConfig(n, eta, 0.3, "static"), schedule, 60, seed)
    b = _run(PolicyConfig(n, eta, 0.3, "time_varying"), schedule, 60, seed)
    assert a == b


def test_time_varying_on_changing_graphs():
    from fairgraph.graph import RandomGraphParams

    schedule = GraphSchedule.generated(RandomGraphParams(4, 4, 0.4), seed=3)
    _run(PolicyConfig(4, 1 / 12, 0.2, "time_varying"), schedule, 200, 0)
    _run(PolicyConfig(4, 1 / 12, 0.2, "uniform_baseline"), schedule, 50, 0)


def test_objective_bounds_q_on_symmetric_graphs():
    rng = np.random.default_rng(9)
    for _ in range(20):
        n = int(rng.integers(2, 6))
        directed = random_digraph(rng, n)
        g = CompatibilityGraph.from_undirected(n, n, directed.action_edges, directed.influence_edges)
        _run(PolicyConfig(n, 1 / (3 * n), 0.2, "static"), GraphSchedule.constant(g), 40, int(rng.integers(1000)))


def test_theorem_bound():
    base = theorem_bound([3] * 50, 0.1, 0.2, 3)
    doubled = theorem_bound([6] * 50, 0.1, 0.2, 3)
    assert doubled.concentration / base.concentration == pytest.approx(math.sqrt(2), abs=1e-12)
    smaller = theorem_bound([3] * 50, 0.05, 0.2, 3)
    assert smaller.learning_rate > base.learning_rate
    for term in (base.concentration, base.bias, base.learning_rate, base.heuristic, base.explicit):
        assert math.isfinite(term) and term > 0
    assert base.learning_rate == pytest.approx(2 * math.log(75) / 0.1)
    with pytest.raises(ConfigError):
        theorem_bound([0, 1], 0.1, 0.2, 3)
