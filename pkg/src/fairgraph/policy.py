"""Exponentially weighted learners with LP-based exploration over a feedback graph.

``static`` solves the exploration LP once for a fixed graph; ``time_varying``
re-solves it for the graph disclosed each round; ``uniform_baseline`` always
plays uniformly at random.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigError, ContractError, FairGraphError
from .graph import CompatibilityGraph
from .lp import ExplorationDistribution, solve_xi

VARIANTS = ("static", "time_varying", "uniform_baseline")
OVERFLOW_GUARD = 1e300
_LOG_GUARD = math.log(OVERFLOW_GUARD)


class InvariantViolation(FairGraphError):
    pass


@dataclass(frozen=True)
class PolicyConfig:
    n_actions: int
    eta: float
    delta: float
    variant: str = "static"

    def __post_init__(self):
        if self.n_actions < 2:
            raise ConfigError("the bias term needs ln(I) > 0, so at least 2 actions", "n_actions")
        if not 0.0 < self.eta <= 1.0 / (3 * self.n_actions):
            raise ConfigError(f"must lie in (0, 1/(3I)] = (0, {1 / (3 * self.n_actions):.6g}], got {self.eta}", "eta")
        if not 0.0 < self.delta < 1.0:
            raise ConfigError(f"must lie in (0, 1), got {self.delta}", "delta")
        if self.variant not in VARIANTS:
            raise ConfigError(f"must be one of {VARIANTS}, got {self.variant!r}", "variant")


@dataclass(frozen=True)
class PolicyState:
    log_phi: np.ndarray
    beta: float
    graph: CompatibilityGraph
    xi: Optional[ExplorationDistribution] = None
    gamma: float = 0.0
    p: Optional[np.ndarray] = None
    q: Optional[np.ndarray] = None
    t: int = 1
    gamma_clamped: bool = False

    @property
    def phi(self) -> np.ndarray:
        return np.exp(self.log_phi)


def bias(eta: float, delta: float, n_actions: int) -> float:
    """The optimism term added to every importance-weighted estimate."""
    return 2.0 * eta * math.sqrt(math.log(5 * n_actions / delta) / math.log(n_actions))


def mixed_distribution(phi: np.ndarray, xi: np.ndarray, gamma: float) -> np.ndarray:
    phi = np.asarray(phi, dtype=float)
    return (1.0 - gamma) * phi / phi.sum() + gamma * np.asarray(xi, dtype=float)


def _mixed_from_logs(log_phi, xi, gamma):
    w = np.exp(log_phi - log_phi.max())
    return (1.0 - gamma) * w / w.sum() + gamma * xi


def observation_probabilities(p: np.ndarray, g: CompatibilityGraph) -> np.ndarray:
    """``q[n]``: probability that the reward of ``n`` is revealed when drawing from ``p``."""
    return np.asarray(p, dtype=float) @ g.adjacency.astype(float)


def estimated_rewards(observed: dict, q: np.ndarray, beta: float) -> np.ndarray:
    """Biased importance-weighted estimate for every action; unobserved rewards count as 0."""
    r = np.zeros(q.size)
    for n, value in observed.items():
        r[n] = value
    return (r + beta) / q


def init(cfg: PolicyConfig, g0: CompatibilityGraph) -> PolicyState:
    if g0.n_actions != cfg.n_actions:
        raise ConfigError(f"graph has {g0.n_actions} actions, config says {cfg.n_actions}", "n_actions")
    xi = solve_xi(g0) if cfg.variant == "static" else None
    return PolicyState(
        log_phi=np.zeros(cfg.n_actions),
        beta=bias(cfg.eta, cfg.delta, cfg.n_actions),
        graph=g0,
        xi=xi,
    )


def begin_round(cfg: PolicyConfig, st: PolicyState, g: CompatibilityGraph) -> PolicyState:
    """Fix this round's sampling distribution ``p`` and observation probabilities ``q``."""
    if g.n_actions != cfg.n_actions:
        raise ContractError(f"graph has {g.n_actions} actions, learner has {cfg.n_actions}")
    if cfg.variant == "uniform_baseline":
        p = np.full(cfg.n_actions, 1.0 / cfg.n_actions)
        return replace(st, graph=g, p=p, q=observation_probabilities(p, g), gamma=0.0)
    if cfg.variant == "static":
        if g is not st.graph and g != st.graph:
            raise ContractError("the static learner was given a graph different from its initial one")
        xi = st.xi
    else:
        xi = solve_xi(g)
    gamma = (1.0 + st.beta) * cfg.eta / xi.objective
    clamped = gamma > 1.0
    gamma = min(gamma, 1.0)
    p = _mixed_from_logs(st.log_phi, xi.xi, gamma)
    return replace(st, graph=g, xi=xi, gamma=gamma, p=p, q=observation_probabilities(p, g),
                   gamma_clamped=clamped)


def sample_action(st: PolicyState, rng: np.random.Generator) -> int:
    cdf = np.cumsum(st.p)
    u = rng.random() * cdf[-1]
    return int(min(np.searchsorted(cdf, u, side="right"), st.p.size - 1))


def update(cfg: PolicyConfig, st: PolicyState, played: int,
           observations: Iterable[Tuple[int, float]]) -> PolicyState:
    observed = {int(n): float(r) for n, r in observations}
    expected = st.graph.out_neighbours(played)
    if set(observed) != set(expected):
        raise ContractError(f"observations {sorted(observed)} do not match out-neighbours {sorted(expected)} of {played}")
    for n, r in observed.items():
        if not 0.0 <= r <= 1.0:
            raise ContractError(f"reward for action {n} is not normalised: {r}")
    if cfg.variant == "uniform_baseline":
        return replace(st, t=st.t + 1)
    if (st.q <= 0).any():
        raise InvariantViolation(f"zero observation probability: q={st.q}")
    r_hat = estimated_rewards(observed, st.q, st.beta)
    log_phi = st.log_phi + cfg.eta * r_hat
    top = log_phi.max()
    if top > _LOG_GUARD:
        log_phi = log_phi - top
    return replace(st, log_phi=log_phi, t=st.t + 1)


class Learner:
    """Stateful convenience wrapper around the functional round steps."""

    def __init__(self, cfg: PolicyConfig, g0: CompatibilityGraph):
        self.cfg = cfg
        self.state = init(cfg, g0)

    def begin_round(self, g: CompatibilityGraph) -> PolicyState:
        self.state = begin_round(self.cfg, self.state, g)
        return self.state

    def sample_action(self, rng: np.random.Generator) -> int:
        return sample_action(self.state, rng)

    def update(self, played: int, observations) -> PolicyState:
        self.state = update(self.cfg, self.state, played, observations)
        return self.state


# --------------------------------------------------------------------------
# regret bound diagnostic
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundTerms:
    concentration: float
    bias: float
    learning_rate: float
    heuristic: float  # the unconstanted O~ term, reported with constant 1

    @property
    def explicit(self) -> float:
        return self.concentration + self.bias + self.learning_rate


def theorem_bound(mas_sequence: Sequence[int], eta: float, delta: float, n_actions: int) -> BoundTerms:
    """Evaluate the explicit terms of the high-probability weak-regret bound."""
    mas_sequence = np.asarray(mas_sequence, dtype=float)
    if mas_sequence.size and (mas_sequence < 1).any():
        raise ConfigError("mas values must be >= 1", "mas_sequence")
    total = float(mas_sequence.sum())
    T = mas_sequence.size
    peak = float(mas_sequence.max()) if T else 0.0
    return BoundTerms(
        concentration=math.sqrt(5.0 * math.log(5.0 / delta) * total),
        bias=12.0 * eta * math.sqrt(math.log(5.0 * n_actions / eta) / math.log(n_actions)) * total,
        learning_rate=2.0 * math.log(5.0 * n_actions / delta) / eta,
        heuristic=(1.0 + math.sqrt(T * eta) + T * eta**2) * peak**2,
    )
