"""Mutation (guided 3-change, quad change) and crossover (ODEC, DEC)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .instance_io import AtspInstance
from .orp import DEFAULT_NODE_BUDGET, build_orp_instance, solve_orp
from .tour import Tour, trusted_tour
from .local_search import _reconnect

__all__ = [
    "MutationConfig",
    "mutate",
    "mutate_3change",
    "mutate_quad_change",
    "candidate_scores",
    "best_quad_completion",
    "odec_crossover",
    "dec_crossover",
    "dec_sequence",
]


@dataclass(frozen=True)
class MutationConfig:
    p_mut: float = 0.1

    def __post_init__(self) -> None:
        if not 0.0 <= self.p_mut <= 1.0:
            raise ValueError(f"p_mut must lie in [0, 1], got {self.p_mut}")


def candidate_scores(instance: AtspInstance, tour: Tour, p1: int) -> tuple[np.ndarray, np.ndarray]:
    """Candidates u for the arc (i1, u) and their scores, scaled by n(n-1).

    With i1 = order[p1], the score of u is c(pred(u), u) + |C(u)| * c_aver,
    where |C(u)| is the arc count of the cycle u -> ... -> i1 -> u. Scores are
    returned multiplied by n(n-1) so they stay exact integers.
    """
    n = instance.n
    order = tour.order
    offsets = np.arange(2, n)  # skip i1 itself and its successor
    cand = order[(p1 + offsets) % n]
    pred = order[(p1 + offsets - 1) % n]
    cycle_len = n - offsets + 1
    scale = n * (n - 1)
    scores = instance.cost[pred, cand] * scale + cycle_len * instance.arc_cost_sum
    return cand, scores


def _best_third_cut(cost, order, p1, pu):
    """Position of the tail i6 on the path u..i1 maximising the 3-change gain."""
    n = len(order)
    i2 = order[(p1 + 1) % n]
    i4 = order[(pu - 1) % n]
    span = (p1 - pu) % n
    tails = order[(pu + np.arange(span)) % n]
    heads = order[(pu + np.arange(1, span + 1)) % n]
    g = cost[tails, heads] - cost[i4, heads] - cost[tails, i2]
    return (pu + int(np.argmax(g))) % n


def mutate_3change(instance: AtspInstance, tour: Tour, rng: np.random.Generator) -> Tour:
    """Random 3-change steered towards expensive arcs and long closed cycles."""
    n = instance.n
    if n < 5:
        raise ValueError("3-change mutation needs n >= 5")
    order = tour.order
    p1 = int(rng.integers(n))
    cand, scores = candidate_scores(instance, tour, p1)
    # descending score, ties by position along the tour
    ranked = np.argsort(-scores, kind="stable")
    top = ranked[: (len(ranked) + 1) // 2]
    pick = int(top[rng.integers(len(top))])
    pu = (p1 + 2 + pick) % n
    p6 = _best_third_cut(instance.cost, order, p1, pu)
    cut_pos = np.sort(np.array([p1, (pu - 1) % n, p6], dtype=np.int64))
    return trusted_tour(instance, _reconnect(order.copy(), cut_pos))


def best_quad_completion(instance: AtspInstance, tour: Tour, p: int, q: int) -> tuple[int, int, int]:
    """Best pair of extra cuts for a quad change around tail positions p < q.

    One cut lies strictly inside the path order[p+1..q], the other inside
    order[q+1..p] (wrapping). Returns (x position, y position, gain).
    """
    n = instance.n
    order = tour.order
    cost = instance.cost
    xs = np.arange(p + 1, q) % n
    ys = (q + 1 + np.arange((p - q - 1) % n)) % n
    if len(xs) == 0 or len(ys) == 0:
        raise ValueError("both paths need at least one internal arc")
    x, xn = order[xs], order[(xs + 1) % n]
    y, yn = order[ys], order[(ys + 1) % n]
    i1, i2 = order[p], order[(p + 1) % n]
    i7, i8 = order[q], order[(q + 1) % n]
    fixed = cost[i1, i2] + cost[i7, i8] - cost[i1, i8] - cost[i7, i2]
    g = (
        cost[x, xn][:, None]
        + cost[y, yn][None, :]
        - cost[y[None, :], xn[:, None]]
        - cost[x[:, None], yn[None, :]]
    )
    a, b = np.unravel_index(int(np.argmax(g)), g.shape)
    return int(xs[a]), int(ys[b]), int(fixed + g[a, b])


def mutate_quad_change(instance: AtspInstance, tour: Tour, rng: np.random.Generator) -> Tour:
    """Quad change with two random cuts and the best-gain remaining pair."""
    n = instance.n
    if n < 8:
        raise ValueError("quad change mutation needs n >= 8")
    while True:
        p, q = sorted(rng.choice(n, size=2, replace=False).tolist())
        if q - p >= 2 and (p - q) % n >= 2:
            break
    px, py, _ = best_quad_completion(instance, tour, p, q)
    cut_pos = np.array([p, px, q, py], dtype=np.int64)
    cut_pos.sort()
    return trusted_tour(instance, _reconnect(tour.order.copy(), cut_pos))


def mutate(instance: AtspInstance, tour: Tour, rng: np.random.Generator) -> Tour:
    """Pick one of the two operators with equal probability.

    Falls back to whichever operator the instance size allows, and returns
    the tour unchanged when neither applies.
    """
    ops = []
    if instance.n >= 5:
        ops.append(mutate_3change)
    if instance.n >= 8:
        ops.append(mutate_quad_change)
    if not ops:
        return tour
    if len(ops) == 1:
        return ops[0](instance, tour, rng)
    return ops[int(rng.integers(2))](instance, tour, rng)


def odec_crossover(
    instance: AtspInstance, p1: Tour, p2: Tour, node_budget: int = DEFAULT_NODE_BUDGET
) -> Tour:
    if p1.n != instance.n or p2.n != instance.n:
        raise ValueError("parents do not match the instance")
    if p1 == p2:
        return p1
    return solve_orp(instance, build_orp_instance(p1, p2), node_budget).tour


def dec_sequence(instance: AtspInstance, p1: Tour, p2: Tour, rng: np.random.Generator) -> list[int]:
    """Visiting sequence built by DEC, starting at a random vertex."""
    n = instance.n
    rows = instance.rows
    s1 = p1.succ.tolist()
    s2 = p2.succ.tolist()
    visited = [False] * n
    cur = int(rng.integers(n))
    order = [cur]
    visited[cur] = True
    for _ in range(n - 1):
        opts = sorted({v for v in (s1[cur], s2[cur]) if not visited[v]})
        if len(opts) == 2:
            nxt = opts[int(rng.integers(2))]
        elif opts:
            nxt = opts[0]
        else:
            row = rows[cur]
            nxt = min((v for v in range(n) if not visited[v]), key=lambda v: (row[v], v))
        visited[nxt] = True
        order.append(nxt)
        cur = nxt
    return order


def dec_crossover(instance: AtspInstance, p1: Tour, p2: Tour, rng: np.random.Generator) -> Tour:
    """Randomised directed-edge assembly from parent arcs, greedy repair otherwise."""
    return trusted_tour(instance, np.array(dec_sequence(instance, p1, p2, rng), dtype=np.int64))
