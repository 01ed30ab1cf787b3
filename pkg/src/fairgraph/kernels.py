"""Hot numeric kernels.

Every kernel exists twice: a numba-compiled loop (``*_nb``) and a vectorised
numpy version (``*_np``). The public dispatchers pick one according to
``fairgraph._accel.USE_NUMBA``. Both variants visit candidates in the same
order and accumulate floating-point terms in the same order, so they return
identical results, ties included.
"""

import numpy as np

from ._accel import USE_NUMBA, njit


# --------------------------------------------------------------------------
# maximum acyclic subgraph
# --------------------------------------------------------------------------

@njit
def mas_size_nb(in_masks):
    n = in_masks.shape[0]
    size = 1 << n
    ok = np.zeros(size, dtype=np.bool_)
    ok[0] = True
    best = 0
    for subset in range(1, size):
        for v in range(n):
            if (subset >> v) & 1 and (in_masks[v] & subset) == 0:
                ok[subset] = ok[subset ^ (1 << v)]
                break
        if ok[subset]:
            count = 0
            rest = subset
            while rest:
                rest &= rest - 1
                count += 1
            if count > best:
                best = count
    return best


def mas_size_np(in_masks):
    n = in_masks.shape[0]
    subsets = np.arange(1 << n, dtype=np.int64)
    pop = np.zeros(subsets.shape, dtype=np.int64)
    for v in range(n):
        pop += (subsets >> v) & 1
    ok = np.zeros(subsets.shape, dtype=bool)
    ok[0] = True
    best = 0
    for k in range(1, n + 1):
        layer = subsets[pop == k]
        acyclic = np.zeros(layer.shape, dtype=bool)
        for v in range(n):
            member = ((layer >> v) & 1).astype(bool)
            source = member & ((layer & int(in_masks[v])) == 0)
            acyclic |= source & ok[layer ^ (1 << v)]
        ok[layer] = acyclic
        # subsets of acyclic sets are acyclic, so an empty layer ends the search
        if not acyclic.any():
            break
        best = k
    return best


def mas_size(in_masks):
    in_masks = np.ascontiguousarray(in_masks, dtype=np.int64)
    if USE_NUMBA:
        return int(mas_size_nb(in_masks))
    return int(mas_size_np(in_masks))


# --------------------------------------------------------------------------
# simplex lattice search for the exploration LP
# --------------------------------------------------------------------------

@njit
def grid_maxmin_nb(cover, m):
    # cover[i, n] = 1 when n is observed by playing i; lattice points are
    # visited in lexicographic order, the innermost coordinate being x[size-2]
    size = cover.shape[0]
    best_x = np.zeros(size, dtype=np.int64)
    if size == 1:
        best_x[0] = m
        return cover[0, 0] * m, best_x
    x = np.zeros(size, dtype=np.int64)
    base = np.zeros(size, dtype=np.int64)
    best = -1
    a = size - 2
    b = size - 1
    while True:
        used = 0
        for j in range(a):
            used += x[j]
        rem = m - used
        for i in range(size):
            c = 0
            for n in range(a):
                c += cover[i, n] * x[n]
            base[i] = c + cover[i, b] * rem
        for v in range(rem + 1):
            worst = m * size + 1
            for i in range(size):
                c = base[i] + (cover[i, a] - cover[i, b]) * v
                if c < worst:
                    worst = c
            if worst > best:
                best = worst
                for j in range(a):
                    best_x[j] = x[j]
                best_x[a] = v
                best_x[b] = rem - v
        k = a - 1
        while k >= 0:
            x[k] += 1
            used = 0
            for j in range(a):
                used += x[j]
            if used <= m:
                break
            x[k] = 0
            k -= 1
        if k < 0:
            break
    return best, best_x


def _compositions(r, k):
    """All nonnegative integer k-vectors summing to r, lexicographic order."""
    if k == 1:
        return np.array([[r]], dtype=np.int64)
    if k == 2:
        a = np.arange(r + 1, dtype=np.int64)
        return np.stack([a, r - a], axis=1)
    if k == 3:
        counts = np.arange(r + 1, 0, -1)
        a = np.repeat(np.arange(r + 1, dtype=np.int64), counts)
        starts = np.repeat(np.cumsum(counts) - counts, counts)
        b = np.arange(a.size, dtype=np.int64) - starts
        return np.stack([a, b, r - a - b], axis=1)
    blocks = []
    for a in range(r + 1):
        tail = _compositions(r - a, k - 1)
        blocks.append(np.column_stack([np.full(len(tail), a, dtype=np.int64), tail]))
    return np.concatenate(blocks)


def grid_maxmin_np(cover, m):
    size = cover.shape[0]
    cover = np.asarray(cover, dtype=np.int64)
    best = -1
    best_x = np.zeros(size, dtype=np.int64)
    if size == 1:
        return int(cover[0, 0] * m), np.array([m], dtype=np.int64)
    for first in range(m + 1):
        tail = _compositions(m - first, size - 1)
        pts = np.column_stack([np.full(len(tail), first, dtype=np.int64), tail])
        worst = (pts @ cover.T).min(axis=1)
        idx = int(np.argmax(worst))
        if worst[idx] > best:
            best = int(worst[idx])
            best_x = pts[idx].copy()
    return best, best_x


def grid_maxmin(cover, m):
    cover = np.ascontiguousarray(cover, dtype=np.int64)
    if USE_NUMBA:
        best, x = grid_maxmin_nb(cover, int(m))
        return int(best), np.asarray(x)
    return grid_maxmin_np(cover, int(m))


# --------------------------------------------------------------------------
# ads environment reward on count vectors
# --------------------------------------------------------------------------

@njit
def _state_reward_nb(s, rev_row, targets, weights):
    total = 0.0
    for j in range(s.shape[0]):
        total += s[j]
    revenue = 0.0
    penalty = 0.0
    for j in range(s.shape[0]):
        revenue += rev_row[j] * s[j]
        if total > 0.0:
            penalty += weights[j] * abs(s[j] - targets[j] * total)
    return revenue - penalty


def state_reward_grid(counts, rev_row, targets, weights):
    """Raw reward for a stack of count vectors ``counts[..., j]``.

    Terms are summed in the same order as the scalar numba kernel.
    """
    total = np.zeros(counts.shape[:-1])
    for j in range(counts.shape[-1]):
        total = total + counts[..., j]
    revenue = np.zeros_like(total)
    penalty = np.zeros_like(total)
    positive = total > 0.0
    for j in range(counts.shape[-1]):
        revenue = revenue + rev_row[j] * counts[..., j]
        dev = weights[j] * np.abs(counts[..., j] - targets[j] * total)
        penalty = penalty + np.where(positive, dev, 0.0)
    return revenue - penalty


# --------------------------------------------------------------------------
# exact dynamic programming over count vectors
# --------------------------------------------------------------------------

@njit
def dp_tables_nb(revenue, targets, weights, n_actions):
    T = revenue.shape[0]
    J = revenue.shape[1]
    side = T + 1
    size = side ** J
    v_next = np.zeros(size)
    v_cur = np.zeros(size)
    decisions = np.full((T, size), n_actions, dtype=np.int8)
    s = np.zeros(J)
    post = np.zeros(J)
    strides = np.ones(J, dtype=np.int64)
    for j in range(1, J):
        strides[j] = strides[j - 1] * side
    for t in range(T, 0, -1):
        row = revenue[t - 1]
        for idx in range(size):
            rest = idx
            used = 0
            for j in range(J):
                s[j] = rest % side
                rest //= side
                used += int(s[j])
            if used > t - 1:
                v_cur[idx] = 0.0
                continue
            best = -np.inf
            best_a = n_actions
            for a in range(n_actions + 1):
                for j in range(J):
                    post[j] = s[j]
                nxt = idx
                if a < n_actions:
                    post[a] += 1.0
                    nxt += strides[a]
                q = _state_reward_nb(post, row, targets, weights) + v_next[nxt]
                if q > best:
                    best = q
                    best_a = a
            v_cur[idx] = best
            decisions[t - 1, idx] = best_a
        for idx in range(size):
            v_next[idx] = v_cur[idx]
    return v_next[0], decisions


def dp_tables_np(revenue, targets, weights, n_actions):
    T, J = revenue.shape
    side = T + 1
    shape = (side,) * J
    counts = np.moveaxis(np.indices(shape, dtype=np.float64), 0, -1)
    used = counts.sum(axis=-1)
    v_next = np.zeros(shape)
    decisions = np.full((T,) + shape, n_actions, dtype=np.int8)
    for t in range(T, 0, -1):
        post_value = state_reward_grid(counts, revenue[t - 1], targets, weights) + v_next
        q = np.full((n_actions + 1,) + shape, -np.inf)
        for a in range(n_actions):
            src = [slice(None)] * J
            dst = [slice(None)] * J
            src[a] = slice(1, None)
            dst[a] = slice(0, side - 1)
            q[(a,) + tuple(dst)] = post_value[tuple(src)]
        q[n_actions] = post_value
        best_a = np.argmax(q, axis=0)
        valid = used <= t - 1
        v_next = np.where(valid, np.take_along_axis(q, best_a[None], axis=0)[0], 0.0)
        decisions[t - 1] = np.where(valid, best_a, n_actions)
    # C order on the reversed axes matches the numba index layout
    flat = decisions.transpose((0,) + tuple(range(J, 0, -1))).reshape(T, -1)
    return v_next[(0,) * J], np.ascontiguousarray(flat)


def dp_tables(revenue, targets, weights, n_actions):
    revenue = np.ascontiguousarray(revenue, dtype=np.float64)
    targets = np.ascontiguousarray(targets, dtype=np.float64)
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    if USE_NUMBA:
        value, dec = dp_tables_nb(revenue, targets, weights, int(n_actions))
        return float(value), dec
    value, dec = dp_tables_np(revenue, targets, weights, int(n_actions))
    return float(value), dec


# --------------------------------------------------------------------------
# exhaustive sequence search
# --------------------------------------------------------------------------

@njit
def exhaustive_nb(revenue, targets, weights, n_actions):
    T = revenue.shape[0]
    J = revenue.shape[1]
    seq = np.zeros(T, dtype=np.int64)
    best_seq = np.zeros(T, dtype=np.int64)
    prefix = np.zeros(T + 1)
    states = np.zeros((T + 1, J))
    best = -np.inf
    start = 0
    while True:
        for d in range(start, T):
            for j in range(J):
                states[d + 1, j] = states[d, j]
            if seq[d] < n_actions:
                states[d + 1, seq[d]] += 1.0
            prefix[d + 1] = prefix[d] + _state_reward_nb(states[d + 1], revenue[d], targets, weights)
        if prefix[T] > best:
            best = prefix[T]
            for d in range(T):
                best_seq[d] = seq[d]
        k = T - 1
        while k >= 0:
            seq[k] += 1
            if seq[k] <= n_actions:
                break
            seq[k] = 0
            k -= 1
        if k < 0:
            break
        start = k
    return best, best_seq


def exhaustive_np(revenue, targets, weights, n_actions):
    T, J = revenue.shape
    states = np.zeros((1, J))
    totals = np.zeros(1)
    seqs = np.zeros((1, 0), dtype=np.int64)
    moves = np.vstack([np.eye(J)[:n_actions], np.zeros((1, J))])
    for d in range(T):
        n = len(states)
        states = np.repeat(states, n_actions + 1, axis=0) + np.tile(moves, (n, 1))
        totals = np.repeat(totals, n_actions + 1)
        seqs = np.column_stack([np.repeat(seqs, n_actions + 1, axis=0),
                                np.tile(np.arange(n_actions + 1), n)])
        totals = totals + state_reward_grid(states, revenue[d], targets, weights)
    idx = int(np.argmax(totals))
    return float(totals[idx]), seqs[idx]


def exhaustive(revenue, targets, weights, n_actions):
    revenue = np.ascontiguousarray(revenue, dtype=np.float64)
    targets = np.ascontiguousarray(targets, dtype=np.float64)
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    if USE_NUMBA:
        value, seq = exhaustive_nb(revenue, targets, weights, int(n_actions))
        return float(value), np.asarray(seq)
    value, seq = exhaustive_np(revenue, targets, weights, int(n_actions))
    return float(value), seq
