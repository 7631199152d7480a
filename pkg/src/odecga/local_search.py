"""Direction-preserving 3-opt local search for the ATSP.

Removing k arcs from a tour leaves segments S1..Sk; the only reconnection
that keeps every segment's direction and shares no arc with the cuts visits
them as Sk, ..., S1. For k = 3 this swaps two adjacent segments, for k = 4
it is the quad change (double bridge).
"""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass

import numpy as np
from numba import njit

from .instance_io import AtspInstance
from .tour import Tour, trusted_tour

__all__ = [
    "MoveDescriptor",
    "NeighborLists",
    "apply_segment_reversal_move",
    "build_neighbor_lists",
    "three_change_gain",
    "three_opt_local_search",
    "find_improving_move",
]


@dataclass(frozen=True)
class NeighborLists:
    """For each vertex the nearest others by outgoing cost, ascending."""

    table: np.ndarray  # n x k

    @property
    def size(self) -> int:
        return self.table.shape[1]

    def __getitem__(self, v: int) -> list[int]:
        return self.table[v].tolist()


@dataclass(frozen=True)
class MoveDescriptor:
    cuts: tuple[tuple[int, int], ...]
    gain: int


def build_neighbor_lists(instance: AtspInstance, fraction: float = 0.2) -> NeighborLists:
    n = instance.n
    k = min(int(np.ceil(round(fraction * n, 9))), n - 1)
    k = max(k, 1)
    cost = instance.cost.copy()
    np.fill_diagonal(cost, np.iinfo(np.int64).max)
    # stable sort: equal costs keep vertex-index order
    table = np.argsort(cost, axis=1, kind="stable")[:, :k].astype(np.int64)
    table.flags.writeable = False
    return NeighborLists(table)


@njit(cache=True)
def _reconnect(order, cut_pos):
    """Visit the segments between sorted tail positions in reverse cyclic order."""
    n = len(order)
    k = len(cut_pos)
    out = np.empty(n, dtype=np.int64)
    w = 0
    for j in range(k - 1, -1, -1):
        # segment j runs from cut_pos[j] + 1 to cut_pos[j + 1] (cyclically)
        start = cut_pos[j] + 1
        stop = cut_pos[(j + 1) % k]
        length = (stop - start) % n + 1
        for s in range(length):
            out[w] = order[(start + s) % n]
            w += 1
    return out


def apply_segment_reversal_move(
    instance: AtspInstance, tour: Tour, cuts: Iterable[tuple[int, int]]
) -> Tour:
    """Remove the given tour arcs and revisit the segments in reverse cyclic order."""
    cuts = [(int(a), int(b)) for a, b in cuts]
    if len(cuts) not in (3, 4):
        raise ValueError(f"expected 3 or 4 cuts, got {len(cuts)}")
    if len(set(cuts)) != len(cuts):
        raise ValueError("duplicate cuts")
    pos = np.empty(tour.n, dtype=np.int64)
    pos[tour.order] = np.arange(tour.n)
    for a, b in cuts:
        if not (0 <= a < tour.n and 0 <= b < tour.n) or tour.succ[a] != b:
            raise ValueError(f"({a}, {b}) is not an arc of the tour")
    cut_pos = np.sort(pos[[a for a, _ in cuts]])
    return trusted_tour(instance, _reconnect(tour.order.copy(), cut_pos))


def three_change_gain(instance: AtspInstance, i1: int, i2: int, i4: int, i3: int, i6: int, i5: int) -> int:
    """Removed minus added cost of the 3-change on (i1,i2), (i4,i3), (i6,i5)."""
    c = instance.rows
    return c[i1][i2] + c[i4][i3] + c[i6][i5] - c[i1][i3] - c[i4][i5] - c[i6][i2]


@njit(cache=True)
def _scan_vertex(cost, nbr, order, pos, i1):
    """First neighbour candidate of i1 whose best third cut improves the tour.

    Returns (gain, position of i4, position of i6); gain is 0 when none.
    """
    n = len(order)
    p1 = pos[i1]
    i2 = order[(p1 + 1) % n]
    d12 = cost[i1, i2]
    for k in range(nbr.shape[1]):
        u = nbr[i1, k]
        if cost[i1, u] >= d12:
            break
        if u == i2:
            continue
        pu = pos[u]
        p4 = (pu - 1) % n
        i4 = order[p4]
        base = d12 + cost[i4, u] - cost[i1, u]
        # third cut (i6, i5) anywhere on the path u -> ... -> i1
        span = (p1 - pu) % n
        best = np.iinfo(np.int64).min
        best_p6 = -1
        for s in range(span):
            p6 = (pu + s) % n
            x = order[p6]
            y = order[(p6 + 1) % n]
            g = cost[x, y] - cost[i4, y] - cost[x, i2]
            if g > best:
                best = g
                best_p6 = p6
        if best_p6 >= 0 and base + best > 0:
            return base + best, p4, best_p6
    return 0, -1, -1


@njit(cache=True)
def _three_opt_kernel(cost, nbr, order):
    n = len(order)
    pos = np.empty(n, dtype=np.int64)
    for i in range(n):
        pos[order[i]] = i
    dlb = np.zeros(n, dtype=np.bool_)
    arc = np.empty(n, dtype=np.int64)
    cut_pos = np.empty(3, dtype=np.int64)
    total_gain = 0
    while True:
        for i in range(n):
            arc[order[i]] = -cost[order[i], order[(i + 1) % n]]
        scan = np.argsort(arc, kind="mergesort")
        moved = False
        skipped = False
        for idx in range(n):
            i1 = scan[idx]
            if dlb[i1]:
                skipped = True
                continue
            gain, p4, p6 = _scan_vertex(cost, nbr, order, pos, i1)
            if gain > 0:
                p1 = pos[i1]
                i2 = order[(p1 + 1) % n]
                i4 = order[p4]
                i3 = order[(p4 + 1) % n]
                i6 = order[p6]
                i5 = order[(p6 + 1) % n]
                cut_pos[0] = p1
                cut_pos[1] = p4
                cut_pos[2] = p6
                cut_pos.sort()
                order = _reconnect(order, cut_pos)
                for i in range(n):
                    pos[order[i]] = i
                dlb[i1] = False
                dlb[i2] = False
                dlb[i3] = False
                dlb[i4] = False
                dlb[i5] = False
                dlb[i6] = False
                total_gain += gain
                moved = True
                break
            dlb[i1] = True
        if not moved:
            if not skipped:
                break
            # confirm local optimality over the whole candidate subset
            dlb[:] = False
    return order, total_gain


def three_opt_local_search(instance: AtspInstance, neighbors: NeighborLists, tour: Tour) -> Tour:
    """Descend with candidate-restricted 3-changes until none improves."""
    if tour.n < 3:
        return tour
    order, gain = _three_opt_kernel(instance.cost, neighbors.table, tour.order.copy())
    return trusted_tour(instance, order, tour.length - int(gain))


def find_improving_move(
    instance: AtspInstance, neighbors: NeighborLists, tour: Tour
) -> MoveDescriptor | None:
    """Plain-Python scan of the candidate subset, ignoring don't-look bits.

    Used to verify local optimality independently of the compiled search.
    """
    c = instance.rows
    order = tour.order.tolist()
    n = len(order)
    pos = {v: i for i, v in enumerate(order)}
    for p1, i1 in enumerate(order):
        i2 = order[(p1 + 1) % n]
        for u in neighbors[i1]:
            if c[i1][u] >= c[i1][i2]:
                break
            if u == i2:
                continue
            i3 = u
            i4 = order[pos[u] - 1]
            p = pos[u]
            while order[p % n] != i1:
                i6 = order[p % n]
                i5 = order[(p + 1) % n]
                g = c[i1][i2] + c[i4][i3] + c[i6][i5] - c[i1][i3] - c[i4][i5] - c[i6][i2]
                if g > 0:
                    return MoveDescriptor(((i1, i2), (i4, i3), (i6, i5)), g)
                p += 1
    return None
