import dataclasses
import itertools
import math

import numpy as np
import pytest

from fairgraph.env import two_round_example, rollout
from fairgraph.errors import ConfigError
from fairgraph.experiment import (
    ExperimentConfig,
    TrialInstance,
    build_instance,
    derive_seed,
    mean_std,
    run_instance,
    run_sweep,
    run_trial,
    summarize,
)
from fairgraph.graph import CompatibilityGraph, GraphSchedule
from fairgraph.oracle import opt_dynamic, opt_weak

SMALL = dict(t_values=(6, 8), trials_per_t=2)


def test_forced_two_round_instance():
    env = two_round_example()
    g = CompatibilityGraph.complete(3)
    sched = GraphSchedule.constant(g)
    inst = TrialInstance(2, 0, 1234, 0.1, 0.2, env, g, sched,
                         opt_dynamic(env, sched, 2), opt_weak(env, sched, 2))
    choices = (0, 1, 2, None)
    totals = [sum(rollout(env, seq, g)) for seq in itertools.product(choices, repeat=2)]
    for variant in ("static", "time_varying", "uniform_baseline"):
        rec = run_instance(inst, variant)
        assert min(totals) - 1e-9 <= rec.total_reward <= max(totals) + 1e-9
        assert len(rec.actions) == len(rec.raw_rewards) == len(rec.mas) == 2
        assert rec.total_reward == pytest.approx(math.fsum(rec.raw_rewards), abs=1e-9)
        assert all(obs == (0, 1, 2) for obs in rec.observations)


def test_baseline_observes_everything_on_complete_graph():
    cfg = ExperimentConfig(master_seed=3, edge_density=1.0, **SMALL)
    rec = run_trial(cfg, 8, "uniform_baseline", 0)
    assert all(obs == (0, 1, 2) for obs in rec.observations)


def test_run_trial_is_deterministic():
    cfg = ExperimentConfig(master_seed=11, **SMALL)
    for v in ("static", "time_varying", "uniform_baseline"):
        assert run_trial(cfg, 8, v, 1) == run_trial(cfg, 8, v, 1)


def test_seed_derivation_is_stable():
    assert derive_seed(7, 30, 0) == derive_seed("7", "30", "0")
    assert derive_seed(7, 30, 0) != derive_seed(7, 30, 1)
    assert 0 <= derive_seed(1) < 2**63


def test_trial_record_invariants():
    cfg = ExperimentConfig(master_seed=5, **SMALL)
    records, summary = run_sweep(cfg)
    assert len(records) == 2 * 2 * 3
    by_trial = {}
    for r in records:
        assert len(r.actions) == r.T
        assert r.total_reward == pytest.approx(sum(r.raw_rewards), abs=1e-9)
        assert r.dynamic_regret - r.weak_regret == pytest.approx(r.opt_dynamic - r.opt_weak, abs=1e-9)
        assert r.opt_dynamic >= r.opt_weak - 1e-9
        assert cfg.eta_range[0] < r.eta <= cfg.eta_range[1]
        assert cfg.delta_range[0] < r.delta <= cfg.delta_range[1]
        by_trial.setdefault((r.T, r.trial_index), set()).add((r.seed, r.eta, r.delta, r.opt_dynamic))
    assert all(len(v) == 1 for v in by_trial.values())
    for row in summary:
        group = [getattr(r, "total_reward") for r in records if r.T == row.T and r.variant == row.variant]
        assert min(group) - 1e-9 <= row.mean["total_reward"] <= max(group) + 1e-9
        assert all(s >= 0 for s in row.std.values())


def test_static_equals_time_varying_on_constant_schedule():
    cfg = ExperimentConfig(master_seed=21, graph_schedule="constant", **SMALL)
    for T in cfg.t_values:
        for k in range(cfg.trials_per_t):
            a = run_trial(cfg, T, "static", k)
            b = run_trial(cfg, T, "time_varying", k)
            assert a.actions == b.actions and a.total_reward == b.total_reward


def test_parallel_matches_serial():
    cfg = ExperimentConfig(master_seed=8, **SMALL)
    serial, s_summary = run_sweep(cfg)
    parallel, p_summary = run_sweep(dataclasses.replace(cfg, workers=2))
    assert serial == parallel and s_summary == p_summary


def test_mean_std():
    assert mean_std([1.0, 3.0]) == (2.0, pytest.approx(math.sqrt(2)))
    assert mean_std([4.0]) == (4.0, 0.0)
    assert mean_std([2.5, 2.5]) == (2.5, 0.0)
    assert all(math.isnan(x) for x in mean_std([]))


def test_summarize_hand_built_records():
    cfg = ExperimentConfig(master_seed=2, t_values=(5,), trials_per_t=1)
    rec = run_trial(cfg, 5, "static", 0)
    recs = [dataclasses.replace(rec, trial_index=0, weak_regret=1.0),
            dataclasses.replace(rec, trial_index=1, weak_regret=3.0)]
    (row,) = summarize(recs)
    assert row.n_trials == 2
    assert row.mean["weak_regret"] == 2.0
    assert row.std["weak_regret"] == pytest.approx(math.sqrt(2), abs=1e-12)
    assert row.std["total_reward"] == 0.0


def test_single_trial_sweep_has_zero_std():
    _, summary = run_sweep(ExperimentConfig(master_seed=4, t_values=(5,), trials_per_t=1))
    assert all(v == 0.0 for row in summary for v in row.std.values())


def test_dynamic_oracle_can_be_disabled():
    rec = run_trial(ExperimentConfig(master_seed=4, dynamic_oracle=False, **SMALL), 6, "static", 0)
    assert math.isnan(rec.dynamic_regret) and math.isnan(rec.opt_dynamic)
    assert rec.weak_regret == pytest.approx(rec.opt_weak - rec.total_reward)


def test_csv_revenue_source(tmp_path):
    rows = np.random.default_rng(0).random((20, 3))
    path = tmp_path / "rev.csv"
    path.write_text("c1,c2,c3\n" + "\n".join(",".join(f"{x:.6f}" for x in r) for r in rows) + "\n")
    matrix = np.loadtxt(path, delimiter=",", skiprows=1)
    cfg = ExperimentConfig(master_seed=1, revenue_source="csv", revenue_csv=str(path), **SMALL)
    inst = build_instance(cfg, 8, 0)
    starts = [s for s in range(13) if np.array_equal(matrix[s:s + 8], inst.env.revenue)]
    assert starts, "revenue must be a contiguous block of the file"
    iid = build_instance(dataclasses.replace(cfg, row_sampling="iid"), 8, 0)
    assert all(any(np.array_equal(r, m) for m in matrix) for r in iid.env.revenue)
    with pytest.raises(ConfigError, match="at least 30 rows"):
        build_instance(cfg, 30, 0)


@pytest.mark.parametrize("kwargs, field", [
    (dict(t_values=()), "t_values"),
    (dict(t_values=(40, 30)), "t_values"),
    (dict(trials_per_t=0), "trials_per_t"),
    (dict(eta_range=(0.0, 0.2)), "eta_range"),
    (dict(delta_range=(0.1, 1.0)), "delta_range"),
    (dict(variants=("greedy",)), "variants"),
    (dict(targets=(0.5, 0.6, 0.1)), "targets"),
    (dict(revenue_source="csv"), "revenue_csv"),
])
def test_config_validation(kwargs, field):
    with pytest.raises(ConfigError, match=field):
        ExperimentConfig(master_seed=1, **kwargs)


def test_from_dict():
    assert ExperimentConfig.from_dict({"master_seed": 9}) == ExperimentConfig(master_seed=9)
    with pytest.raises(ConfigError, match="master_seed"):
        ExperimentConfig.from_dict({})
    with pytest.raises(ConfigError, match="unknown"):
        ExperimentConfig.from_dict({"master_seed": 1, "colour": "red"})
