"""Fairness-regularised ad allocation environment.

State is a vector of allocation counts, one per regulariser (party). Playing
action ``i`` sells one unit to party ``i``. Round ``t`` pays the revenue
``C^t . s`` of the updated counts plus weighted fairness penalties
``-|s_j - target_j * sum(s)|``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigError, DomainError
from .graph import CompatibilityGraph


@dataclass(frozen=True)
class EnvState:
    s: np.ndarray
    t: int = 0

    @classmethod
    def initial(cls, n_regularisers: int) -> "EnvState":
        return cls(np.zeros(n_regularisers), 0)

    def __post_init__(self):
        s = np.array(self.s, dtype=float)
        if (s < 0).any():
            raise DomainError(f"state counts must be nonnegative, got {s}")
        s.setflags(write=False)
        object.__setattr__(self, "s", s)


@dataclass(frozen=True)
class RewardBreakdown:
    revenue: float
    fairness: np.ndarray
    total_raw: float
    total_normalized: float
    clamped: bool = False


@dataclass(frozen=True)
class AdsEnvConfig:
    """Targets, regulariser weights and per-round revenue vectors.

    ``lower``/``upper`` override the default normalisation bounds
    ``L_t = -sum(w) * t`` and ``U_t = t * max(revenue)``.
    """

    targets: np.ndarray
    weights: np.ndarray
    revenue: np.ndarray
    lower: Optional[np.ndarray] = field(default=None)
    upper: Optional[np.ndarray] = field(default=None)

    def __post_init__(self):
        targets = np.asarray(self.targets, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if weights.ndim == 0:
            weights = np.full(targets.size, float(weights))
        revenue = np.atleast_2d(np.asarray(self.revenue, dtype=float))
        if targets.ndim != 1 or targets.size < 1:
            raise ConfigError("must be a nonempty vector", "targets")
        if (targets < 0).any() or abs(targets.sum() - 1.0) > 1e-9:
            raise ConfigError(f"must be a probability vector, got {targets}", "targets")
        if weights.shape != targets.shape or (weights < 0).any():
            raise ConfigError("must be J nonnegative reals", "weights")
        if revenue.shape[1] != targets.size:
            raise ConfigError(f"expected {targets.size} columns, got {revenue.shape[1]}", "revenue")
        if (revenue < 0).any():
            raise ConfigError("entries must be nonnegative", "revenue")
        for name, arr in (("targets", targets), ("weights", weights), ("revenue", revenue)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        for name in ("lower", "upper"):
            val = getattr(self, name)
            if val is not None:
                val = np.asarray(val, dtype=float)
                if val.shape != (revenue.shape[0],):
                    raise ConfigError(f"needs one bound per revenue row", name)
                val.setflags(write=False)
                object.__setattr__(self, name, val)
        if self.lower is not None and self.upper is not None and (self.upper <= self.lower).any():
            raise ConfigError("upper bound must exceed lower bound every round", "upper")

    @property
    def n_parties(self) -> int:
        return self.targets.size

    @property
    def horizon(self) -> int:
        return self.revenue.shape[0]

    def bounds(self, t: int):
        if self.lower is not None:
            lo = self.lower[t - 1]
        else:
            lo = -self.weights.sum() * t
        if self.upper is not None:
            hi = self.upper[t - 1]
        else:
            hi = t * self.revenue.max()
        if hi <= lo:
            # all-zero revenue and weights: any positive width will do
            hi = lo + t
        return lo, hi

    def truncated(self, T: int) -> "AdsEnvConfig":
        if T > self.horizon:
            raise ConfigError(f"needs {T} revenue rows, have {self.horizon}", "revenue")
        cut = None if self.lower is None else self.lower[:T]
        cut_u = None if self.upper is None else self.upper[:T]
        return AdsEnvConfig(self.targets, self.weights, self.revenue[:T], cut, cut_u)


def _check_action(action, g: Optional[CompatibilityGraph], n_parties: int):
    if action is None:
        return
    if g is not None:
        if not 0 <= action < g.n_actions:
            raise DomainError(f"action {action} out of range [0, {g.n_actions})")
        if (action, action) not in g.influence_edges:
            raise DomainError(f"action {action} is not an in-neighbour of regulariser {action}")
    if not 0 <= action < n_parties:
        raise DomainError(f"action {action} has no matching regulariser (J={n_parties})")


def transition(state: EnvState, action: Optional[int], g: Optional[CompatibilityGraph] = None) -> EnvState:
    """Counting transition: action ``i`` adds one unit to ``s[i]``; ``None`` is a no-op."""
    _check_action(action, g, state.s.size)
    s = state.s.copy()
    if action is not None:
        s[action] += 1.0
    return EnvState(s, state.t + 1)


def _fairness(s, targets):
    total = 0.0
    for v in s:
        total += v
    if total <= 0.0:
        return np.zeros_like(s)
    return -np.abs(s - targets * total)


def fairness_values(state: EnvState, cfg: AdsEnvConfig) -> np.ndarray:
    return _fairness(state.s, cfg.targets)


def state_reward(s: np.ndarray, t: int, cfg: AdsEnvConfig) -> float:
    """Raw reward of post-action counts ``s`` in round ``t``.

    Accumulates terms in the same order as the oracle kernels.
    """
    row = cfg.revenue[t - 1]
    total = 0.0
    for v in s:
        total += v
    revenue = 0.0
    penalty = 0.0
    for j in range(s.size):
        revenue += row[j] * s[j]
        if total > 0.0:
            penalty += cfg.weights[j] * abs(s[j] - cfg.targets[j] * total)
    return revenue - penalty


def reward(prev: EnvState, action: Optional[int], t: int, cfg: AdsEnvConfig,
           g: Optional[CompatibilityGraph] = None) -> RewardBreakdown:
    """Reward for playing ``action`` in round ``t`` from ``prev``; ``prev`` is not modified."""
    if t < 1 or t > cfg.horizon:
        raise ConfigError(f"no revenue row for round {t} (have {cfg.horizon})", "revenue")
    if prev.t != t - 1:
        raise DomainError(f"state is at round {prev.t}, cannot evaluate round {t}")
    nxt = transition(prev, action, g)
    s = nxt.s
    revenue = 0.0
    row = cfg.revenue[t - 1]
    for j in range(s.size):
        revenue += row[j] * s[j]
    fairness = _fairness(s, cfg.targets)
    total = state_reward(s, t, cfg)
    lo, hi = cfg.bounds(t)
    scaled = (total - lo) / (hi - lo)
    clipped = min(max(scaled, 0.0), 1.0)
    return RewardBreakdown(revenue, fairness, total, clipped, clipped != scaled)


def rollout(cfg: AdsEnvConfig, actions, g=None) -> np.ndarray:
    """Raw per-round rewards of an action sequence (entries may be ``None``)."""
    state = EnvState.initial(cfg.n_parties)
    out = np.empty(len(actions))
    for t, a in enumerate(actions, start=1):
        a = None if a is None else int(a)
        state = transition(state, a, g)
        out[t - 1] = state_reward(state.s, t, cfg)
    return out


def synthetic_revenue(T: int, J: int, rng: np.random.Generator, distribution: str = "uniform01") -> np.ndarray:
    if T < 1 or J < 1:
        raise ConfigError("T and J must be positive", "revenue")
    if distribution != "uniform01":
        raise ConfigError(f"unknown distribution {distribution!r}", "distribution")
    return rng.random((T, J))


def load_revenue_csv(path, J: int, T: Optional[int] = None) -> np.ndarray:
    """Read one revenue vector per row; a non-numeric first row is treated as a header."""
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                values = [float(c) for c in row]
            except ValueError:
                if lineno == 1 and not rows:
                    continue
                raise ConfigError(f"{path}: line {lineno}: non-numeric entry", "revenue")
            if len(values) != J:
                raise ConfigError(f"{path}: line {lineno}: expected {J} columns, got {len(values)}", "revenue")
            if any(v < 0 for v in values):
                raise ConfigError(f"{path}: line {lineno}: negative revenue", "revenue")
            rows.append(values)
    if T is not None and len(rows) < T:
        raise ConfigError(f"{path}: needs at least {T} rows, found {len(rows)}", "revenue")
    return np.array(rows, dtype=float).reshape(-1, J)


def two_round_example() -> AdsEnvConfig:
    """The two-round, three-party instance with uniform targets and weight 0.1."""
    return AdsEnvConfig(
        targets=np.full(3, 1 / 3),
        weights=np.full(3, 0.1),
        revenue=np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0]]),
    )
