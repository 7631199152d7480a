"""Assignment-problem relaxation and its cycle decomposition."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .instance_io import AtspInstance

__all__ = ["CycleCover", "solve_assignment", "decompose_cycles"]


@dataclass(frozen=True)
class CycleCover:
    """Optimal fixed-point-free assignment, split into its cycles.

    ``cycles`` start at their smallest vertex and are sorted by
    (cardinality, smallest vertex).
    """

    succ: tuple[int, ...]
    cost: int
    cycles: tuple[tuple[int, ...], ...]


def decompose_cycles(succ) -> list[tuple[int, ...]]:
    succ = [int(s) for s in succ]
    n = len(succ)
    if sorted(succ) != list(range(n)):
        raise ValueError("successor array is not a permutation")
    seen = [False] * n
    cycles = []
    for start in range(n):
        if seen[start]:
            continue
        if succ[start] == start:
            raise ValueError(f"fixed point at vertex {start}")
        cyc = []
        v = start
        while not seen[v]:
            seen[v] = True
            cyc.append(v)
            v = succ[v]
        cycles.append(tuple(cyc))
    cycles.sort(key=lambda c: (len(c), c[0]))
    return cycles


def solve_assignment(instance: AtspInstance) -> CycleCover:
    """Exact minimum-cost assignment with loops excluded."""
    w = instance.cost.astype(np.float64)
    # loops are excluded cells, not a big-M penalty
    np.fill_diagonal(w, np.inf)
    rows, cols = linear_sum_assignment(w)
    succ = np.empty(instance.n, dtype=np.int64)
    succ[rows] = cols
    cost = int(instance.cost[rows, cols].sum())
    return CycleCover(tuple(succ.tolist()), cost, tuple(decompose_cycles(succ)))
