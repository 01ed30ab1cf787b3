"""The max-min exploration LP over the probability simplex.

``solve_xi`` runs an in-repo dense two-phase simplex (Bland's rule, so it
always terminates and is deterministic). ``grid_oracle_xi`` is an independent
brute-force check over a simplex lattice.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import kernels
from .errors import CapabilityError, FairGraphError
from .graph import CompatibilityGraph

TOL = 1e-9
_PIVOT_TOL = 1e-12


class LPError(FairGraphError):
    pass


@dataclass(frozen=True)
class ExplorationDistribution:
    xi: np.ndarray
    objective: float

    def coverage(self, g: CompatibilityGraph) -> np.ndarray:
        return g.adjacency.astype(float) @ self.xi


def simplex_max(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, max_iter=10_000):
    """Maximise ``c @ x`` subject to ``A_ub x <= b_ub``, ``A_eq x = b_eq``, ``x >= 0``.

    Returns ``(x, value)``. Raises LPError on infeasible or unbounded problems.
    """
    c = np.asarray(c, dtype=float)
    n = c.size
    A_ub = np.zeros((0, n)) if A_ub is None else np.asarray(A_ub, dtype=float)
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float)
    A_eq = np.zeros((0, n)) if A_eq is None else np.asarray(A_eq, dtype=float)
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float)
    m_ub, m_eq = len(b_ub), len(b_eq)
    m = m_ub + m_eq

    # columns: x (n) | slacks (m_ub) | artificials (one per row needing one)
    A = np.zeros((m, n + m_ub))
    b = np.concatenate([b_ub, b_eq])
    A[:m_ub, :n] = A_ub
    A[m_ub:, :n] = A_eq
    A[np.arange(m_ub), n + np.arange(m_ub)] = 1.0
    negative = b < 0
    A[negative] *= -1.0
    b = np.abs(b)

    basis = []
    art_rows = []
    for r in range(m):
        if r < m_ub and not negative[r]:
            basis.append(n + r)
        else:
            basis.append(-1)
            art_rows.append(r)
    n_art = len(art_rows)
    width = n + m_ub + n_art
    tab = np.zeros((m + 1, width + 1))
    tab[:m, : n + m_ub] = A
    tab[:m, -1] = b
    for k, r in enumerate(art_rows):
        tab[r, n + m_ub + k] = 1.0
        basis[r] = n + m_ub + k

    def run(cost, allowed):
        # objective row holds reduced costs of the minimisation of ``cost``
        tab[-1, :] = 0.0
        tab[-1, :width] = cost
        for r, j in enumerate(basis):
            if cost[j] != 0.0:
                tab[-1] -= cost[j] * tab[r]
        for _ in range(max_iter):
            enter = -1
            for j in range(width):
                if allowed[j] and tab[-1, j] < -_PIVOT_TOL:
                    enter = j
                    break
            if enter < 0:
                return
            col = tab[:m, enter]
            leave = -1
            best_ratio = np.inf
            for r in range(m):
                if col[r] > _PIVOT_TOL:
                    ratio = tab[r, -1] / col[r]
                    if ratio < best_ratio - _PIVOT_TOL or (
                        abs(ratio - best_ratio) <= _PIVOT_TOL and basis[r] < basis[leave]
                    ):
                        best_ratio = ratio
                        leave = r
            if leave < 0:
                raise LPError("linear program is unbounded")
            pivot(leave, enter)
        raise LPError("simplex iteration limit reached")

    def pivot(r, j):
        tab[r] /= tab[r, j]
        for k in range(m + 1):
            if k != r and tab[k, j] != 0.0:
                tab[k] -= tab[k, j] * tab[r]
        basis[r] = j

    if n_art:
        cost1 = np.zeros(width)
        cost1[n + m_ub:] = 1.0
        run(cost1, np.ones(width, dtype=bool))
        if -tab[-1, -1] > 1e-9:
            raise LPError("linear program is infeasible")
        for r in range(m):
            if basis[r] >= n + m_ub:
                for j in range(n + m_ub):
                    if abs(tab[r, j]) > _PIVOT_TOL:
                        pivot(r, j)
                        break
    allowed = np.zeros(width, dtype=bool)
    allowed[: n + m_ub] = True
    cost2 = np.zeros(width)
    cost2[:n] = -c
    run(cost2, allowed)
    x = np.zeros(width)
    for r, j in enumerate(basis):
        x[j] = tab[r, -1]
    x = x[:n]
    return x, float(c @ x)


def _coverage_matrix(g: CompatibilityGraph) -> np.ndarray:
    return g.adjacency.astype(float)


@lru_cache(maxsize=4096)
def solve_xi(g: CompatibilityGraph) -> ExplorationDistribution:
    """Exact maximiser of ``min_i sum_{n in N_out(i)} xi_n`` over the simplex.

    Among optimal points the one with the largest smallest entry is taken, so
    symmetric graphs get the uniform distribution.
    """
    cover = _coverage_matrix(g)
    size = g.n_actions
    ones = np.ones((1, size))

    # max z  s.t.  z - cover @ xi <= 0,  sum(xi) = 1
    c = np.zeros(size + 1)
    c[-1] = 1.0
    A_ub = np.hstack([-cover, np.ones((size, 1))])
    A_eq = np.hstack([ones, np.zeros((1, 1))])
    _, best = simplex_max(c, A_ub, np.zeros(size), A_eq, [1.0])

    # tie-break: max u  s.t.  u <= xi_n,  cover @ xi >= best,  sum(xi) = 1
    A_ub2 = np.vstack([
        np.hstack([-np.eye(size), np.ones((size, 1))]),
        np.hstack([-cover, np.zeros((size, 1))]),
    ])
    b_ub2 = np.concatenate([np.zeros(size), np.full(size, -best)])
    x, _ = simplex_max(c, A_ub2, b_ub2, A_eq, [1.0])

    xi = np.clip(x[:size], 0.0, None)
    xi /= xi.sum()
    xi.setflags(write=False)
    objective = float((cover @ xi).min())
    if objective < best - TOL:
        raise LPError(f"tie-break lost optimality ({objective} < {best})")
    return ExplorationDistribution(xi, objective)


def grid_oracle_xi(g: CompatibilityGraph, resolution: float) -> ExplorationDistribution:
    """Best point of the simplex lattice with spacing ``resolution`` (I <= 4)."""
    if g.n_actions > 4:
        raise CapabilityError(f"grid oracle is limited to 4 actions (got {g.n_actions})")
    if resolution < 1e-3 or resolution > 1:
        raise CapabilityError(f"resolution must lie in [1e-3, 1], got {resolution}")
    m = int(round(1.0 / resolution))
    cover = g.adjacency.astype(np.int64)
    best, counts = kernels.grid_maxmin(cover, m)
    xi = counts.astype(float) / m
    return ExplorationDistribution(xi, best / m)
