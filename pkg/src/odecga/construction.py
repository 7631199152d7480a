"""Initial tours: assignment patching (two Karp variants) and arbitrary insertion."""

from __future__ import annotations

import enum
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from numba import njit

from .assignment import CycleCover, solve_assignment
from .instance_io import AtspInstance
from .tour import Tour, make_tour, trusted_tour

__all__ = [
    "PatchingVariant",
    "ConstructionResult",
    "patch_two_cycles",
    "zhang_construct",
    "arbitrary_insertion",
    "insert_vertices",
]


class PatchingVariant(enum.Enum):
    MAX_CYCLE_SINK = "max_cycle_sink"
    SHORTEST_FIRST = "shortest_first"


@dataclass(frozen=True)
class ConstructionResult:
    tour: Tour
    proven_optimal: bool
    ap_cost: int
    patch_delta: int


def patch_two_cycles(
    instance: AtspInstance, c1: Sequence[int], c2: Sequence[int]
) -> tuple[tuple[int, ...], int]:
    """Merge two disjoint cycles by the cheapest two-arc exchange.

    For arcs (a, b) of ``c1`` and (c, d) of ``c2`` the exchange drops both and
    adds (a, d), (c, b). Returns the merged cycle, starting at ``a``, and the
    cost change; ties go to the smallest (a, c).
    """
    if set(c1) & set(c2):
        raise ValueError("cycles overlap")
    if len(c1) < 2 or len(c2) < 2:
        raise ValueError("cycles must have at least 2 vertices")
    cost = instance.cost
    # visit tails in increasing vertex order so argmin's first hit is the tie-break
    k1 = np.argsort(c1, kind="stable")
    k2 = np.argsort(c2, kind="stable")
    A = np.asarray(c1, dtype=np.int64)
    C = np.asarray(c2, dtype=np.int64)
    B = np.roll(A, -1)
    D = np.roll(C, -1)
    A, B, C, D = A[k1], B[k1], C[k2], D[k2]
    delta = (
        cost[A[:, None], D[None, :]]
        + cost[C[None, :], B[:, None]]
        - cost[A, B][:, None]
        - cost[C, D][None, :]
    )
    i, j = np.unravel_index(int(np.argmin(delta)), delta.shape)
    a, c = int(A[i]), int(C[j])
    ia, ic = list(c1).index(a), list(c2).index(c)
    # a -> d ... c -> b ... a
    part2 = list(c2[ic + 1:]) + list(c2[: ic + 1])
    part1 = list(c1[ia + 1:]) + list(c1[:ia])
    merged = (a, *part2, *part1)
    return tuple(int(v) for v in merged), int(delta[i, j])


def zhang_construct(
    instance: AtspInstance,
    variant: PatchingVariant = PatchingVariant.MAX_CYCLE_SINK,
    cover: CycleCover | None = None,
) -> ConstructionResult:
    """Solve the assignment relaxation and patch its cycles into one tour.

    Cycle size is measured by cardinality. ``cover`` may be passed to reuse
    an already solved relaxation.
    """
    if instance.n < 3:
        raise ValueError("patching construction needs n >= 3")
    if cover is None:
        cover = solve_assignment(instance)
    cycles = [tuple(c) for c in cover.cycles]
    if len(cycles) == 1:
        tour = make_tour(instance, cycles[0])
        return ConstructionResult(tour, True, cover.cost, 0)

    total = 0
    if variant is PatchingVariant.MAX_CYCLE_SINK:
        big = max(len(c) for c in cycles)
        k = next(i for i, c in enumerate(cycles) if len(c) == big)
        sink = cycles.pop(k)
        for cyc in cycles:  # already ascending by cardinality
            sink, d = patch_two_cycles(instance, sink, cyc)
            total += d
        merged = sink
    elif variant is PatchingVariant.SHORTEST_FIRST:
        pool = cycles
        while len(pool) > 1:
            pool.sort(key=lambda c: (len(c), min(c)))
            first, second = pool[0], pool[1]
            new, d = patch_two_cycles(instance, first, second)
            total += d
            pool = [new] + pool[2:]
        merged = pool[0]
    else:
        raise ValueError(f"unknown variant {variant!r}")
    tour = make_tour(instance, merged)
    return ConstructionResult(tour, False, cover.cost, total)


@njit(cache=True)
def _insert_kernel(cost, seq):
    n = len(seq)
    cyc = np.empty(n, dtype=np.int64)
    cyc[0] = seq[0]
    cyc[1] = seq[1]
    m = 2
    for k in range(2, n):
        v = seq[k]
        best = np.iinfo(np.int64).max
        at = -1
        for i in range(m):
            a = cyc[i]
            b = cyc[(i + 1) % m]
            d = cost[a, v] + cost[v, b] - cost[a, b]
            if d < best:
                best = d
                at = i
        for j in range(m, at + 1, -1):
            cyc[j] = cyc[j - 1]
        cyc[at + 1] = v
        m += 1
    return cyc


def insert_vertices(instance: AtspInstance, sequence: Sequence[int]) -> Tour:
    """Cheapest insertion following a fixed vertex sequence.

    The first two entries form the starting 2-cycle; each later vertex goes
    between the consecutive pair where it adds least, earliest pair on ties.
    """
    seq = np.asarray(sequence, dtype=np.int64)
    if sorted(seq.tolist()) != list(range(instance.n)):
        raise ValueError("sequence must be a permutation of the vertices")
    return trusted_tour(instance, _insert_kernel(instance.cost, seq))


def arbitrary_insertion(instance: AtspInstance, seed: int | np.random.Generator) -> Tour:
    """Random start pair and random insertion order, cheapest position each time."""
    if instance.n < 3:
        raise ValueError("arbitrary insertion needs n >= 3")
    rng = np.random.default_rng(seed)
    return insert_vertices(instance, rng.permutation(instance.n))
