"""Compatibility graphs over action and regulariser vertices.

Indices are zero-based in the Python API. Graph files use one-based indices.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Iterable, Optional, Sequence

import numpy as np

from . import kernels
from .errors import CapabilityError, ConfigError, DomainError, GenerationError

EXACT_MAS_LIMIT = 20


@dataclass(frozen=True)
class CompatibilityGraph:
    """Directed action->action (feedback) and action->regulariser (influence) edges.

    Every action observes itself: self-loops are added on construction.
    """

    n_actions: int
    n_regularisers: int
    action_edges: frozenset = field(default_factory=frozenset)
    influence_edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.n_actions < 1 or self.n_regularisers < 1:
            raise DomainError("a graph needs at least one action and one regulariser")
        edges = set()
        for a, b in self.action_edges:
            a, b = int(a), int(b)
            if not (0 <= a < self.n_actions and 0 <= b < self.n_actions):
                raise DomainError(f"action edge ({a}, {b}) out of range for {self.n_actions} actions")
            edges.add((a, b))
        edges.update((i, i) for i in range(self.n_actions))
        influence = set()
        for i, j in self.influence_edges:
            i, j = int(i), int(j)
            if not (0 <= i < self.n_actions and 0 <= j < self.n_regularisers):
                raise DomainError(f"influence edge ({i}, {j}) out of range")
            influence.add((i, j))
        object.__setattr__(self, "action_edges", frozenset(edges))
        object.__setattr__(self, "influence_edges", frozenset(influence))

    # cached_property writes to __dict__, which is allowed on frozen dataclasses
    @cached_property
    def adjacency(self) -> np.ndarray:
        """Boolean matrix ``adj[i, n]``: playing ``i`` reveals the reward of ``n``."""
        adj = np.zeros((self.n_actions, self.n_actions), dtype=bool)
        for a, b in self.action_edges:
            adj[a, b] = True
        adj.setflags(write=False)
        return adj

    def _check_action(self, i):
        if not 0 <= i < self.n_actions:
            raise DomainError(f"action index {i} out of range [0, {self.n_actions})")

    def out_neighbours(self, i: int) -> frozenset:
        self._check_action(i)
        return frozenset(int(n) for n in np.flatnonzero(self.adjacency[i]))

    def in_neighbours(self, j: int) -> frozenset:
        if not 0 <= j < self.n_regularisers:
            raise DomainError(f"regulariser index {j} out of range [0, {self.n_regularisers})")
        return frozenset(i for i, jj in self.influence_edges if jj == j)

    def with_edges(self, action_edges=(), influence_edges=()) -> "CompatibilityGraph":
        return CompatibilityGraph(
            self.n_actions,
            self.n_regularisers,
            self.action_edges | frozenset(action_edges),
            self.influence_edges | frozenset(influence_edges),
        )

    # -- constructors -----------------------------------------------------

    @classmethod
    def edgeless(cls, n_actions, n_regularisers=None, full_influence=True):
        n_regularisers = n_actions if n_regularisers is None else n_regularisers
        return cls(n_actions, n_regularisers, frozenset(), _influence(n_actions, n_regularisers, full_influence))

    @classmethod
    def complete(cls, n_actions, n_regularisers=None, full_influence=True):
        n_regularisers = n_actions if n_regularisers is None else n_regularisers
        edges = itertools.product(range(n_actions), repeat=2)
        return cls(n_actions, n_regularisers, frozenset(edges), _influence(n_actions, n_regularisers, full_influence))

    @classmethod
    def from_undirected(cls, n_actions, n_regularisers, pairs, influence_edges=()):
        """Each undirected action pair becomes two directed edges."""
        edges = set()
        for a, b in pairs:
            edges.add((a, b))
            edges.add((b, a))
        return cls(n_actions, n_regularisers, frozenset(edges), frozenset(influence_edges))

    # -- serialisation ----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "actions": self.n_actions,
            "regularisers": self.n_regularisers,
            "action_edges": [[a + 1, b + 1] for a, b in sorted(self.action_edges)],
            "influence_edges": [[i + 1, j + 1] for i, j in sorted(self.influence_edges)],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CompatibilityGraph":
        try:
            n_actions = int(data["actions"])
            n_regs = int(data["regularisers"])
            action_edges = [(int(a) - 1, int(b) - 1) for a, b in data.get("action_edges", [])]
            influence = [(int(i) - 1, int(j) - 1) for i, j in data.get("influence_edges", [])]
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed graph description ({exc})") from exc
        return cls(n_actions, n_regs, frozenset(action_edges), frozenset(influence))


def _influence(n_actions, n_regularisers, full):
    if full:
        return frozenset(itertools.product(range(n_actions), range(n_regularisers)))
    return frozenset((i, i) for i in range(min(n_actions, n_regularisers)))


def load_graph(path) -> CompatibilityGraph:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
    return CompatibilityGraph.from_dict(data)


def save_graph(g: CompatibilityGraph, path) -> None:
    with open(path, "w") as fh:
        json.dump(g.to_dict(), fh, indent=2)
        fh.write("\n")


def out_neighbours(g: CompatibilityGraph, i: int) -> frozenset:
    return g.out_neighbours(i)


def in_neighbours(g: CompatibilityGraph, j: int) -> frozenset:
    return g.in_neighbours(j)


# --------------------------------------------------------------------------
# maximum acyclic subgraph
# --------------------------------------------------------------------------

def _in_masks(g: CompatibilityGraph) -> np.ndarray:
    masks = np.zeros(g.n_actions, dtype=np.int64)
    for a, b in g.action_edges:
        if a != b:
            masks[b] |= 1 << a
    return masks


@lru_cache(maxsize=4096)
def _mas_cached(g: CompatibilityGraph) -> int:
    return kernels.mas_size(_in_masks(g))


def mas(g: CompatibilityGraph, approximate: bool = False) -> int:
    """Size of the largest action subset whose induced subgraph has no directed cycle.

    Self-loops are ignored. Exact for up to ``EXACT_MAS_LIMIT`` actions; above
    that ``approximate=True`` returns a greedy lower bound.
    """
    if g.n_actions <= EXACT_MAS_LIMIT:
        return _mas_cached(g)
    if not approximate:
        raise CapabilityError(
            f"exact mas is limited to {EXACT_MAS_LIMIT} actions (got {g.n_actions}); pass approximate=True"
        )
    return greedy_mas_lower_bound(g)


def greedy_mas_lower_bound(g: CompatibilityGraph) -> int:
    """Grow an acyclic set greedily, least-connected vertices first."""
    adj = g.adjacency.copy()
    np.fill_diagonal(adj, False)
    degree = adj.sum(axis=0) + adj.sum(axis=1)
    chosen: list = []
    for v in np.argsort(degree, kind="stable"):
        if _is_acyclic(adj, chosen + [int(v)]):
            chosen.append(int(v))
    return len(chosen)


def _is_acyclic(adj: np.ndarray, vertices: Sequence[int]) -> bool:
    sub = adj[np.ix_(vertices, vertices)].copy()
    alive = np.ones(len(vertices), dtype=bool)
    while alive.any():
        indeg = sub[alive][:, alive].sum(axis=0)
        sources = np.flatnonzero(alive)[indeg == 0]
        if sources.size == 0:
            return False
        alive[sources] = False
    return True


def mas_by_orderings(g: CompatibilityGraph) -> int:
    """Reference mas: a subset is acyclic iff some ordering of it has only forward edges.

    Tries every ordering of every subset, largest subsets first. Only for small graphs.
    """
    n = g.n_actions
    if n > 8:
        raise CapabilityError("ordering search is limited to 8 actions")
    edges = {(a, b) for a, b in g.action_edges if a != b}
    for size in range(n, 0, -1):
        for subset in itertools.combinations(range(n), size):
            for order in itertools.permutations(subset):
                rank = {v: k for k, v in enumerate(order)}
                if all(rank[a] < rank[b] for a, b in edges if a in rank and b in rank):
                    return size
    return 0


# --------------------------------------------------------------------------
# random graphs and schedules
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class RandomGraphParams:
    n_actions: int
    n_regularisers: int
    edge_density: float = 0.5
    full_influence: bool = True
    mas_cap: Optional[int] = None
    max_retries: int = 10_000

    def __post_init__(self):
        if self.n_actions < 1 or self.n_regularisers < 1:
            raise ConfigError("must be positive", "n_actions/n_regularisers")
        if not 0.0 <= self.edge_density <= 1.0:
            raise ConfigError(f"must lie in [0, 1], got {self.edge_density}", "edge_density")
        if self.mas_cap is not None and not 1 <= self.mas_cap <= self.n_actions:
            raise ConfigError(f"must lie in [1, {self.n_actions}], got {self.mas_cap}", "mas_cap")


def random_graph(params: RandomGraphParams, rng: np.random.Generator) -> CompatibilityGraph:
    """Erdos-Renyi style directed feedback graph, rejection-sampled under ``mas_cap``."""
    n = params.n_actions
    pairs = [(a, b) for a in range(n) for b in range(n) if a != b]
    influence = _influence(n, params.n_regularisers, params.full_influence)
    for _ in range(params.max_retries):
        keep = rng.random(len(pairs)) < params.edge_density
        g = CompatibilityGraph(n, params.n_regularisers,
                               frozenset(p for p, k in zip(pairs, keep) if k), influence)
        if params.mas_cap is None or mas(g) <= params.mas_cap:
            return g
    raise GenerationError(
        f"no graph with mas <= {params.mas_cap} found in {params.max_retries} draws "
        f"at edge_density={params.edge_density}"
    )


class GraphSchedule:
    """The map from round ``t`` (1-based) to the compatibility graph of that round."""

    def __init__(self, mode, graph=None, sequence=None, params=None, seed=None):
        self.mode = mode
        self._graph = graph
        self._sequence = tuple(sequence) if sequence is not None else None
        self._params = params
        self._seed = seed
        if mode == "constant":
            ok = graph is not None and sequence is None and params is None
        elif mode == "sequence":
            ok = graph is None and self._sequence and params is None
        elif mode == "generator":
            ok = graph is None and sequence is None and params is not None and seed is not None
        else:
            raise ConfigError(f"unknown schedule mode {mode!r}", "mode")
        if not ok:
            raise ConfigError(f"schedule mode {mode!r} needs exactly its own payload", "mode")
        if mode == "sequence":
            shapes = {(s.n_actions, s.n_regularisers) for s in self._sequence}
            if len(shapes) != 1:
                raise ConfigError("all graphs in a sequence must share I and J", "sequence")

    @classmethod
    def constant(cls, g: CompatibilityGraph) -> "GraphSchedule":
        return cls("constant", graph=g)

    @classmethod
    def from_sequence(cls, graphs: Iterable[CompatibilityGraph]) -> "GraphSchedule":
        return cls("sequence", sequence=list(graphs))

    @classmethod
    def generated(cls, params: RandomGraphParams, seed: int) -> "GraphSchedule":
        return cls("generator", params=params, seed=seed)

    @property
    def shape(self):
        g = self.graph(1)
        return g.n_actions, g.n_regularisers

    def graph(self, t: int) -> CompatibilityGraph:
        if t < 1:
            raise DomainError(f"rounds start at 1, got {t}")
        if self.mode == "constant":
            return self._graph
        if self.mode == "sequence":
            if t > len(self._sequence):
                raise DomainError(f"round {t} beyond schedule length {len(self._sequence)}")
            return self._sequence[t - 1]
        return _generated_graph(self._params, self._seed, t)


@lru_cache(maxsize=1024)
def _generated_graph(params, seed, t):
    return random_graph(params, np.random.default_rng([seed, t]))
