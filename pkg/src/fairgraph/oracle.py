"""Hindsight optima on raw rewards: best constant action and best action sequence."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from . import kernels
from .env import AdsEnvConfig, rollout
from .errors import CapabilityError, ConfigError
from .graph import GraphSchedule

DEFAULT_MAX_STATES = 10**7
EXHAUSTIVE_MAX_T = 12


@dataclass(frozen=True)
class OracleResult:
    value: float
    witness: tuple  # action per round, None for the null action
    method: str


def _n_actions(cfg: AdsEnvConfig, schedule: Optional[GraphSchedule]) -> int:
    if schedule is None:
        return cfg.n_parties
    n_actions, n_regs = schedule.shape
    if n_regs != cfg.n_parties or n_actions > cfg.n_parties:
        raise ConfigError(
            f"graph has {n_actions} actions / {n_regs} regularisers but the environment has {cfg.n_parties} parties",
            "graph",
        )
    return n_actions


def _prepare(cfg, T):
    if T < 1:
        raise ConfigError(f"T must be positive, got {T}", "T")
    return cfg.truncated(T)


def opt_weak(cfg: AdsEnvConfig, schedule: Optional[GraphSchedule] = None, T: Optional[int] = None) -> OracleResult:
    """Best constant action (or the null action) by full rollout."""
    T = cfg.horizon if T is None else T
    cfg = _prepare(cfg, T)
    candidates = list(range(_n_actions(cfg, schedule))) + [None]
    best_value, best_action = -np.inf, None
    for a in candidates:
        value = float(rollout(cfg, [a] * T).sum())
        if value > best_value:
            best_value, best_action = value, a
    return OracleResult(best_value, (best_action,) * T, "enumeration")


def _decode(codes, n_actions):
    return tuple(None if c == n_actions else int(c) for c in codes)


def opt_dynamic(cfg: AdsEnvConfig, schedule: Optional[GraphSchedule] = None, T: Optional[int] = None,
                max_states: int = DEFAULT_MAX_STATES) -> OracleResult:
    """Best action sequence by backward induction over count vectors.

    The value table is dense over ``{0..T}^J``; ``max_states`` caps its size.
    Ties go to the smallest action at the earliest round, the null action last.
    """
    T = cfg.horizon if T is None else T
    cfg = _prepare(cfg, T)
    n_actions = _n_actions(cfg, schedule)
    J = cfg.n_parties
    grid = (T + 1) ** J
    if grid > max_states:
        raise CapabilityError(f"DP needs {grid} states per layer, over the budget of {max_states}")
    value, decisions = kernels.dp_tables(cfg.revenue, cfg.targets, cfg.weights, n_actions)
    side = T + 1
    strides = side ** np.arange(J)
    s = np.zeros(J, dtype=np.int64)
    codes = []
    for t in range(T):
        a = int(decisions[t, int(s @ strides)])
        codes.append(a)
        if a < n_actions:
            s[a] += 1
    return OracleResult(value, _decode(codes, n_actions), "dp")


def opt_exhaustive(cfg: AdsEnvConfig, schedule: Optional[GraphSchedule] = None, T: Optional[int] = None) -> OracleResult:
    """Brute force over all ``(I+1)^T`` sequences; reference for ``opt_dynamic``."""
    T = cfg.horizon if T is None else T
    if T > EXHAUSTIVE_MAX_T:
        raise CapabilityError(f"exhaustive search is limited to T <= {EXHAUSTIVE_MAX_T}")
    cfg = _prepare(cfg, T)
    n_actions = _n_actions(cfg, schedule)
    value, seq = kernels.exhaustive(cfg.revenue, cfg.targets, cfg.weights, n_actions)
    return OracleResult(value, _decode(seq, n_actions), "exhaustive")


def regrets(trial_reward: float, opt_d: OracleResult, opt_w: OracleResult) -> Tuple[float, float]:
    return opt_d.value - trial_reward, opt_w.value - trial_reward
