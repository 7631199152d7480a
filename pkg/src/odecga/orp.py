"""Optimal recombination of two tours in the predecessor encoding.

An offspring must keep every arc the parents share and may only use arcs
that appear in at least one parent. Vertices whose predecessors differ fall
into alternating components: picking one parent's arc into a vertex forbids
the other parent's arc out of that predecessor, which forces the neighbour
vertex, and so on around a cycle. Each component therefore contributes one
binary choice, and the recombination reduces to choosing, for every
component, which parent's arc bundle to take so that the result is a single
Hamiltonian circuit of least cost.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .instance_io import AtspInstance
from .tour import Tour, trusted_tour

__all__ = [
    "OrpComponent",
    "OrpInstance",
    "OrpSolution",
    "build_orp_instance",
    "solve_orp",
    "brute_force_orp",
    "held_karp",
    "DEFAULT_NODE_BUDGET",
]

DEFAULT_NODE_BUDGET = 2**20


@dataclass(frozen=True)
class OrpComponent:
    """Heads whose predecessors flip together, with each parent's tails."""

    heads: tuple[int, ...]
    tails_p1: tuple[int, ...]
    tails_p2: tuple[int, ...]

    def arcs(self, which: int) -> list[tuple[int, int]]:
        tails = self.tails_p1 if which == 0 else self.tails_p2
        return list(zip(tails, self.heads))


@dataclass(frozen=True)
class OrpInstance:
    p1: Tour
    p2: Tour
    forced: frozenset[tuple[int, int]]
    components: tuple[OrpComponent, ...]

    @property
    def m(self) -> int:
        return len(self.components)


@dataclass(frozen=True)
class OrpSolution:
    tour: Tour
    optimal: bool
    nodes_explored: int


def build_orp_instance(p1: Tour, p2: Tour) -> OrpInstance:
    if p1.n != p2.n:
        raise ValueError(f"parents have different sizes ({p1.n} vs {p2.n})")
    pred1 = p1.pred.tolist()
    pred2 = p2.pred.tolist()
    succ2 = p2.succ.tolist()
    n = p1.n
    forced = frozenset((pred1[v], v) for v in range(n) if pred1[v] == pred2[v])
    seen = [False] * n
    comps = []
    for v in range(n):
        if seen[v] or pred1[v] == pred2[v]:
            continue
        # p1's arc into h uses up pred1[h]'s outgoing slot, so the vertex that
        # p2 feeds from pred1[h] has to take its p1 arc as well

        heads = []
        h = v
        while not seen[h]:
            seen[h] = True
            heads.append(h)
            h = succ2[pred1[h]]
        comps.append(
            OrpComponent(
                tuple(heads),
                tuple(pred1[h] for h in heads),
                tuple(pred2[h] for h in heads),
            )
        )
    return OrpInstance(p1, p2, forced, tuple(comps))


@njit(cache=True)
def _push(a, b, n, other, succ, stk_s, stk_e, stk_a, arcs):
    """Add arc a->b to the path forest; -1 if it closes a short cycle."""
    s = other[a]
    if s == b:
        if arcs + 1 != n:
            return -1
        stk_s[arcs] = -1
    else:
        e = other[b]
        other[s] = e
        other[e] = s
        stk_s[arcs] = s
        stk_e[arcs] = e
    stk_a[arcs] = a
    succ[a] = b
    return arcs + 1


@njit(cache=True)
def _pop(other, succ, stk_s, stk_e, stk_a, arcs):
    arcs -= 1
    a = stk_a[arcs]
    b = succ[a]
    s = stk_s[arcs]
    if s >= 0:
        other[s] = a
        other[stk_e[arcs]] = b
    succ[a] = -1
    return arcs


@njit(cache=True)
def _orp_search(
    cost, forced_tail, forced_head, comp_ptr, heads, tails, bcost, first,
    best_len, best_order, budget,
):
    n = cost.shape[0]
    m = len(comp_ptr) - 1
    other = np.arange(n)
    succ = np.full(n, -1, dtype=np.int64)
    stk_s = np.empty(n, dtype=np.int64)
    stk_e = np.empty(n, dtype=np.int64)
    stk_a = np.empty(n, dtype=np.int64)
    arcs = 0
    partial = 0
    for i in range(len(forced_tail)):
        arcs = _push(forced_tail[i], forced_head[i], n, other, succ, stk_s, stk_e, stk_a, arcs)
        partial += cost[forced_tail[i], forced_head[i]]

    suffix_lb = np.zeros(m + 1, dtype=np.int64)
    for k in range(m - 1, -1, -1):
        suffix_lb[k] = suffix_lb[k + 1] + min(bcost[0, k], bcost[1, k])

    choice = np.full(m, -1, dtype=np.int64)
    taken = np.zeros(m, dtype=np.int64)
    cand = np.empty(n, dtype=np.int64)
    nodes = 0
    exhausted = False
    k = 0
    while k >= 0:
        if k == m:
            better = partial < best_len
            if partial == best_len:
                v = 0
                for i in range(n):
                    cand[i] = v
                    v = succ[v]
                for i in range(n):
                    if cand[i] != best_order[i]:
                        better = cand[i] < best_order[i]
                        break
            if better:
                best_len = partial
                v = 0
                for i in range(n):
                    best_order[i] = v
                    v = succ[v]
            k -= 1
            for _ in range(comp_ptr[k + 1] - comp_ptr[k]):
                arcs = _pop(other, succ, stk_s, stk_e, stk_a, arcs)
            partial -= taken[k]
            continue
        c = choice[k] + 1
        advanced = False
        while c <= 1:
            which = first[k] if c == 0 else 1 - first[k]
            bc = bcost[which, k]
            if partial + bc + suffix_lb[k + 1] > best_len:
                c += 1
                continue
            nodes += 1
            if nodes > budget:
                exhausted = True
                break
            ok = True
            added = 0
            for idx in range(comp_ptr[k], comp_ptr[k + 1]):
                r = _push(tails[which, idx], heads[idx], n, other, succ, stk_s, stk_e, stk_a, arcs)
                if r < 0:
                    ok = False
                    break
                arcs = r
                added += 1
            if ok:
                choice[k] = c
                taken[k] = bc
                partial += bc
                k += 1
                advanced = True
                break
            for _ in range(added):
                arcs = _pop(other, succ, stk_s, stk_e, stk_a, arcs)
            c += 1
        if exhausted:
            break
        if not advanced:
            choice[k] = -1
            k -= 1
            if k >= 0:
                for _ in range(comp_ptr[k + 1] - comp_ptr[k]):
                    arcs = _pop(other, succ, stk_s, stk_e, stk_a, arcs)
                partial -= taken[k]
    return best_len, nodes, exhausted


def solve_orp(
    instance: AtspInstance, orp: OrpInstance, node_budget: int = DEFAULT_NODE_BUDGET
) -> OrpSolution:
    """Exact branch and bound over the component choices.

    Subtours are pruned as soon as a chosen arc closes a short cycle, and
    partial costs are bounded by the cheaper bundle of every open component.
    The search is seeded with the better parent, so the result is never
    worse than either parent even if ``node_budget`` runs out. Equal-length
    offspring are ranked by their normalized vertex order.
    """
    p1, p2 = orp.p1, orp.p2
    seed = min(p1, p2)
    if orp.m == 0:
        return OrpSolution(seed, True, 0)
    cost = instance.cost
    comps = sorted(orp.components, key=lambda c: -len(c.heads))
    comp_ptr = np.zeros(len(comps) + 1, dtype=np.int64)
    comp_ptr[1:] = np.cumsum([len(c.heads) for c in comps])
    heads = np.array([h for c in comps for h in c.heads], dtype=np.int64)
    tails = np.array(
        [[t for c in comps for t in c.tails_p1], [t for c in comps for t in c.tails_p2]],
        dtype=np.int64,
    )
    bcost = np.add.reduceat(cost[tails, heads[None, :]], comp_ptr[:-1], axis=1)
    first = (bcost[1] < bcost[0]).astype(np.int64)
    forced = sorted(orp.forced)
    ft = np.array([a for a, _ in forced], dtype=np.int64)
    fh = np.array([b for _, b in forced], dtype=np.int64)
    best_order = seed.order.copy()
    best_len, nodes, exhausted = _orp_search(
        cost, ft, fh, comp_ptr, heads, tails, bcost, first,
        seed.length, best_order, node_budget,
    )
    if best_len == seed.length and np.array_equal(best_order, seed.order):
        tour = seed
    else:
        tour = trusted_tour(instance, best_order, int(best_len))
    return OrpSolution(tour, not exhausted, int(nodes))


def brute_force_orp(instance: AtspInstance, p1: Tour, p2: Tour, max_free: int = 20) -> Tour:
    """Enumerate every per-vertex predecessor choice between the two parents."""
    n = instance.n
    pred1 = p1.pred
    pred2 = p2.pred
    free = np.flatnonzero(pred1 != pred2)
    d = len(free)
    if d > max_free:
        raise ValueError(f"{d} differing predecessors exceed the limit of {max_free}")
    if d == 0:
        return p1
    cost = instance.cost
    best_len = None
    best_order = None
    total = 1 << d
    chunk = 1 << min(d, 14)
    for lo in range(0, total, chunk):
        masks = np.arange(lo, min(lo + chunk, total), dtype=np.int64)
        bits = ((masks[:, None] >> np.arange(d)) & 1).astype(bool)
        pred = np.tile(pred1, (len(masks), 1))
        pred[:, free] = np.where(bits, pred2[free], pred1[free])
        perm = (np.sort(pred, axis=1) == np.arange(n)).all(axis=1)
        pred = pred[perm]
        if len(pred) == 0:
            continue
        rows = np.arange(len(pred))
        cur = np.zeros(len(pred), dtype=np.int64)
        early = np.zeros(len(pred), dtype=bool)
        for _ in range(n - 1):
            cur = pred[rows, cur]
            early |= cur == 0
        pred = pred[~early]
        if len(pred) == 0:
            continue
        lengths = cost[pred, np.arange(n)].sum(axis=1)
        for row in np.flatnonzero(lengths == lengths.min()):
            succ = np.empty(n, dtype=np.int64)
            succ[pred[row]] = np.arange(n)
            order = [0]
            for _ in range(n - 1):
                order.append(int(succ[order[-1]]))
            key = (int(lengths[row]), order)
            if best_len is None or key < (best_len, best_order):
                best_len, best_order = key
    return trusted_tour(instance, np.array(best_order, dtype=np.int64), best_len)


def held_karp(instance: AtspInstance, max_n: int = 18) -> tuple[int, Tour]:
    """Exact optimum by dynamic programming over vertex subsets."""
    n = instance.n
    if n > max_n:
        raise ValueError(f"held_karp is limited to n <= {max_n}, got {n}")
    cost = instance.cost
    if n == 2:
        order = np.array([0, 1], dtype=np.int64)
        return int(cost[0, 1] + cost[1, 0]), trusted_tour(instance, order)
    r = n - 1  # vertex j + 1 <-> bit j; vertex 0 is the fixed start
    inf = np.iinfo(np.int64).max // 4
    size = 1 << r
    dp = np.full((size, r), inf, dtype=np.int64)
    parent = np.full((size, r), -1, dtype=np.int8)
    inner = cost[1:, 1:].copy()
    np.fill_diagonal(inner, inf)
    for j in range(r):
        dp[1 << j, j] = cost[0, j + 1]
    masks = np.arange(size, dtype=np.int64)
    popcount = np.zeros(size, dtype=np.int64)
    for j in range(r):
        popcount += (masks >> j) & 1
    for k in range(2, r + 1):
        layer = masks[popcount == k]
        for j in range(r):
            sel = layer[(layer >> j) & 1 == 1]
            prev = sel ^ (1 << j)
            cand = dp[prev] + inner[:, j][None, :]
            arg = np.argmin(cand, axis=1)
            dp[sel, j] = cand[np.arange(len(sel)), arg]
            parent[sel, j] = arg
    full = size - 1
    closing = dp[full] + cost[1:, 0]
    j = int(np.argmin(closing))
    best = int(closing[j])
    path = []
    mask = full
    while j >= 0:
        path.append(j + 1)
        pj = int(parent[mask, j])
        mask ^= 1 << j
        j = pj
    order = np.array([0] + path[::-1], dtype=np.int64)
    return best, trusted_tour(instance, order, best)
