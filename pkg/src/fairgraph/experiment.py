"""Seeded trial runner and time-window sweep.

Every random quantity of a trial comes from a named stream derived from the
trial seed, and the trial seed is a stable hash of ``(master_seed, T,
trial_index)``. All variants of the same trial therefore face the same
revenue, graphs, learning rate and random draws.
"""

from __future__ import annotations

import hashlib
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .env import AdsEnvConfig, EnvState, load_revenue_csv, reward, synthetic_revenue, transition
from .errors import ConfigError
from .graph import CompatibilityGraph, GraphSchedule, RandomGraphParams, mas, random_graph
from .oracle import OracleResult, opt_dynamic, opt_weak, regrets
from .policy import VARIANTS, BoundTerms, PolicyConfig, begin_round, init, sample_action, theorem_bound, update

DEFAULT_T_VALUES = tuple(range(30, 71, 5))


@dataclass(frozen=True)
class ExperimentConfig:
    master_seed: int
    t_values: Tuple[int, ...] = DEFAULT_T_VALUES
    trials_per_t: int = 5
    variants: Tuple[str, ...] = VARIANTS
    targets: Tuple[float, ...] = (0.3, 0.6, 0.1)
    weights: Tuple[float, ...] = (0.1, 0.1, 0.1)
    revenue_source: str = "synthetic"
    revenue_csv: Optional[str] = None
    row_sampling: str = "contiguous"
    edge_density: float = 0.5
    full_influence: bool = True
    mas_cap: Optional[int] = None
    graph_schedule: str = "random"
    eta_range: Optional[Tuple[float, float]] = None
    delta_range: Tuple[float, float] = (0.1, 0.4)
    dynamic_oracle: bool = True
    max_dp_states: int = 10**7
    workers: int = 1

    def __post_init__(self):
        for name in ("t_values", "variants", "targets", "weights", "delta_range"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        n = self.n_actions
        if self.eta_range is None:
            object.__setattr__(self, "eta_range", (0.0, 1.0 / (3 * n)))
        object.__setattr__(self, "eta_range", tuple(float(x) for x in self.eta_range))
        object.__setattr__(self, "master_seed", int(self.master_seed))
        if not self.t_values or any(t < 1 for t in self.t_values) or list(self.t_values) != sorted(set(self.t_values)):
            raise ConfigError("must be a nonempty strictly ascending list of positive integers", "t_values")
        if self.trials_per_t < 1:
            raise ConfigError("must be >= 1", "trials_per_t")
        if not self.variants or any(v not in VARIANTS for v in self.variants):
            raise ConfigError(f"entries must be among {VARIANTS}", "variants")
        if n < 2 or len(self.weights) != n:
            raise ConfigError("targets and weights need the same length >= 2", "targets")
        if abs(sum(self.targets) - 1.0) > 1e-9 or min(self.targets) < 0:
            raise ConfigError("must be a probability vector", "targets")
        lo, hi = self.eta_range
        if len(self.eta_range) != 2 or not (0.0 <= lo <= hi <= 1.0 / (3 * n)) or hi <= 0.0:
            raise ConfigError(f"must satisfy 0 <= low <= high <= 1/(3I) = {1 / (3 * n):.6g}", "eta_range")
        lo, hi = self.delta_range
        if len(self.delta_range) != 2 or not (0.0 <= lo <= hi < 1.0) or hi <= 0.0:
            raise ConfigError("must satisfy 0 <= low <= high < 1", "delta_range")
        if self.revenue_source not in ("synthetic", "csv"):
            raise ConfigError("must be 'synthetic' or 'csv'", "revenue_source")
        if self.revenue_source == "csv" and not self.revenue_csv:
            raise ConfigError("required when revenue_source is 'csv'", "revenue_csv")
        if self.row_sampling not in ("contiguous", "iid"):
            raise ConfigError("must be 'contiguous' or 'iid'", "row_sampling")
        if self.graph_schedule not in ("random", "constant"):
            raise ConfigError("must be 'random' or 'constant'", "graph_schedule")
        if self.workers < 1:
            raise ConfigError("must be >= 1", "workers")
        self.graph_params  # validates density and mas_cap

    @property
    def n_actions(self) -> int:
        return len(self.targets)

    @property
    def graph_params(self) -> RandomGraphParams:
        return RandomGraphParams(self.n_actions, self.n_actions, self.edge_density,
                                 self.full_influence, self.mas_cap)

    def to_dict(self) -> dict:
        out = asdict(self)
        for k, v in out.items():
            if isinstance(v, tuple):
                out[k] = list(v)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown keys {sorted(unknown)}", "config")
        if "master_seed" not in data:
            raise ConfigError("is required", "master_seed")
        return cls(**data)


def derive_seed(*parts) -> int:
    """Stable 63-bit seed from the string forms of ``parts`` (sha256, big endian)."""
    digest = hashlib.sha256(":".join(str(p) for p in parts).encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def stream(seed: int, name: str) -> np.random.Generator:
    return np.random.default_rng(derive_seed(seed, name))


def _draw(rng, lo, hi):
    # uniform on (lo, hi]; never returns lo, so a zero lower bound is safe
    return hi - rng.random() * (hi - lo)


@dataclass(frozen=True)
class TrialInstance:
    T: int
    trial_index: int
    seed: int
    eta: float
    delta: float
    env: AdsEnvConfig
    graph: CompatibilityGraph
    round_schedule: GraphSchedule
    opt_dynamic: Optional[OracleResult]
    opt_weak: OracleResult


@dataclass(frozen=True)
class TrialRecord:
    T: int
    trial_index: int
    seed: int
    variant: str
    eta: float
    delta: float
    actions: Tuple[int, ...]
    raw_rewards: Tuple[float, ...]
    normalized_rewards: Tuple[float, ...]
    observations: Tuple[Tuple[int, ...], ...]
    gamma_clamped: Tuple[bool, ...]
    reward_clamped: Tuple[bool, ...]
    mas: Tuple[int, ...]
    total_reward: float
    opt_dynamic: float
    opt_weak: float
    dynamic_regret: float
    weak_regret: float
    bound: BoundTerms


def _revenue_block(cfg: ExperimentConfig, T: int, rng: np.random.Generator) -> np.ndarray:
    J = cfg.n_actions
    if cfg.revenue_source == "synthetic":
        return synthetic_revenue(T, J, rng)
    matrix = _load_csv_cached(cfg.revenue_csv, J)
    if len(matrix) < T:
        raise ConfigError(f"{cfg.revenue_csv}: needs at least {T} rows, found {len(matrix)}", "revenue_csv")
    if cfg.row_sampling == "contiguous":
        start = int(rng.integers(0, len(matrix) - T + 1))
        return matrix[start:start + T]
    return matrix[rng.choice(len(matrix), size=T, replace=False)]


_CSV_CACHE: dict = {}


def _load_csv_cached(path, J):
    key = (str(path), J)
    if key not in _CSV_CACHE:
        _CSV_CACHE[key] = load_revenue_csv(path, J)
    return _CSV_CACHE[key]


def build_instance(cfg: ExperimentConfig, T: int, trial_index: int) -> TrialInstance:
    seed = derive_seed(cfg.master_seed, T, trial_index)
    params_rng = stream(seed, "params")
    eta = _draw(params_rng, *cfg.eta_range)
    delta = _draw(params_rng, *cfg.delta_range)
    revenue = _revenue_block(cfg, T, stream(seed, "revenue"))
    env = AdsEnvConfig(np.array(cfg.targets), np.array(cfg.weights), revenue)
    graph = random_graph(cfg.graph_params, stream(seed, "graph"))
    if cfg.graph_schedule == "random":
        rounds = GraphSchedule.generated(cfg.graph_params, derive_seed(seed, "round-graphs"))
    else:
        rounds = GraphSchedule.constant(graph)
    constant = GraphSchedule.constant(graph)
    od = opt_dynamic(env, constant, T, cfg.max_dp_states) if cfg.dynamic_oracle else None
    ow = opt_weak(env, constant, T)
    return TrialInstance(T, trial_index, seed, eta, delta, env, graph, rounds, od, ow)


@dataclass
class Trajectory:
    actions: list = field(default_factory=list)
    raw: list = field(default_factory=list)
    normalized: list = field(default_factory=list)
    observations: list = field(default_factory=list)
    gamma_clamped: list = field(default_factory=list)
    reward_clamped: list = field(default_factory=list)
    mas: list = field(default_factory=list)


def simulate(env: AdsEnvConfig, schedule: GraphSchedule, policy_cfg: PolicyConfig,
             rng: np.random.Generator, T: int, track_mas: bool = True) -> Trajectory:
    """Play ``T`` rounds: draw, observe counterfactual rewards of the out-neighbours, update."""
    state = EnvState.initial(env.n_parties)
    st = init(policy_cfg, schedule.graph(1))
    traj = Trajectory()
    for t in range(1, T + 1):
        g = schedule.graph(t)
        st = begin_round(policy_cfg, st, g)
        played = sample_action(st, rng)
        seen = sorted(g.out_neighbours(played))
        # every observed reward is evaluated from the pre-round state
        outcomes = {n: reward(state, n, t, env, g) for n in seen}
        st = update(policy_cfg, st, played, [(n, outcomes[n].total_normalized) for n in seen])
        state = transition(state, played, g)
        mine = outcomes[played]
        traj.actions.append(played)
        traj.raw.append(mine.total_raw)
        traj.normalized.append(mine.total_normalized)
        traj.observations.append(tuple(seen))
        traj.gamma_clamped.append(st.gamma_clamped)
        traj.reward_clamped.append(any(o.clamped for o in outcomes.values()))
        if track_mas:
            traj.mas.append(mas(g))
    return traj


def _schedule_for(inst: TrialInstance, variant: str) -> GraphSchedule:
    if variant == "time_varying":
        return inst.round_schedule
    return GraphSchedule.constant(inst.graph)


def run_instance(inst: TrialInstance, variant: str) -> TrialRecord:
    pc = PolicyConfig(inst.graph.n_actions, inst.eta, inst.delta, variant)
    traj = simulate(inst.env, _schedule_for(inst, variant), pc, stream(inst.seed, "actions"), inst.T)
    total = math.fsum(traj.raw)
    if inst.opt_dynamic is not None:
        dyn, weak = regrets(total, inst.opt_dynamic, inst.opt_weak)
        opt_d = inst.opt_dynamic.value
    else:
        dyn, opt_d = math.nan, math.nan
        weak = inst.opt_weak.value - total
    return TrialRecord(
        T=inst.T, trial_index=inst.trial_index, seed=inst.seed, variant=variant,
        eta=inst.eta, delta=inst.delta,
        actions=tuple(traj.actions), raw_rewards=tuple(traj.raw),
        normalized_rewards=tuple(traj.normalized), observations=tuple(traj.observations),
        gamma_clamped=tuple(traj.gamma_clamped), reward_clamped=tuple(traj.reward_clamped),
        mas=tuple(traj.mas), total_reward=total,
        opt_dynamic=opt_d, opt_weak=inst.opt_weak.value,
        dynamic_regret=dyn, weak_regret=weak,
        bound=theorem_bound(traj.mas, inst.eta, inst.delta, inst.graph.n_actions),
    )


def run_trial(cfg: ExperimentConfig, T: int, variant: str, trial_index: int) -> TrialRecord:
    if variant not in VARIANTS:
        raise ConfigError(f"unknown variant {variant!r}", "variant")
    return run_instance(build_instance(cfg, T, trial_index), variant)


def _run_unit(args):
    cfg, T, trial_index = args
    try:
        inst = build_instance(cfg, T, trial_index)
        return [run_instance(inst, v) for v in cfg.variants]
    except Exception as exc:
        raise RuntimeError(f"trial T={T} index={trial_index} failed: {exc}") from exc


# --------------------------------------------------------------------------
# aggregation
# --------------------------------------------------------------------------

SUMMARY_METRICS = ("dynamic_regret", "weak_regret", "total_reward", "opt_dynamic", "opt_weak")


@dataclass(frozen=True)
class SummaryRow:
    T: int
    variant: str
    n_trials: int
    mean: dict
    std: dict


def mean_std(values: Sequence[float]) -> Tuple[float, float]:
    """Mean and sample standard deviation; a single value has deviation 0."""
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        return math.nan, math.nan
    mean = math.fsum(arr) / arr.size
    if arr.size == 1:
        return mean, 0.0
    return mean, math.sqrt(math.fsum((arr - mean) ** 2) / (arr.size - 1))


def summarize(records: Sequence[TrialRecord], t_values=None, variants=None) -> List[SummaryRow]:
    t_values = sorted({r.T for r in records}) if t_values is None else t_values
    variants = list(dict.fromkeys(r.variant for r in records)) if variants is None else variants
    rows = []
    for T in t_values:
        for v in variants:
            group = sorted((r for r in records if r.T == T and r.variant == v), key=lambda r: r.trial_index)
            if not group:
                continue
            mean, std = {}, {}
            for metric in SUMMARY_METRICS:
                mean[metric], std[metric] = mean_std([getattr(r, metric) for r in group])
            rows.append(SummaryRow(T, v, len(group), mean, std))
    return rows


def run_sweep(cfg: ExperimentConfig) -> Tuple[List[TrialRecord], List[SummaryRow]]:
    units = [(cfg, T, k) for T in cfg.t_values for k in range(cfg.trials_per_t)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            batches = list(pool.map(_run_unit, units))
    else:
        batches = [_run_unit(u) for u in units]
    records = [r for batch in batches for r in batch]
    records.sort(key=lambda r: (r.T, cfg.variants.index(r.variant), r.trial_index))
    return records, summarize(records, cfg.t_values, cfg.variants)
