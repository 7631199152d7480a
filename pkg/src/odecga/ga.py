"""Steady-state GA with optimal recombination, plus the elitist-recombination variant."""

from __future__ import annotations

import enum
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .construction import PatchingVariant, arbitrary_insertion, zhang_construct
from .assignment import solve_assignment
from .instance_io import AtspInstance
from .local_search import NeighborLists, build_neighbor_lists, three_opt_local_search
from .orp import DEFAULT_NODE_BUDGET
from .tour import Tour
from .variation import dec_crossover, mutate, odec_crossover

__all__ = [
    "Strategy",
    "Crossover",
    "GaConfig",
    "RunRecord",
    "init_population",
    "tournament_select",
    "run_ga",
]

log = logging.getLogger(__name__)


class Strategy(enum.Enum):
    STEADY_STATE = "steady"
    ELITIST = "elitist"


class Crossover(enum.Enum):
    ODEC = "odec"
    DEC = "dec"


@dataclass(frozen=True)
class GaConfig:
    pop_size: int = 100
    tournament: int = 10
    p_mut: float = 0.1
    time_limit: float | None = 1.0
    max_iterations: int | None = None  # deterministic "testing mode" budget
    strategy: Strategy = Strategy.STEADY_STATE
    crossover: Crossover = Crossover.ODEC
    restarts: bool = True
    t_min: int | None = None  # defaults to 2 * pop_size
    seed: int = 0
    node_budget: int = DEFAULT_NODE_BUDGET

    def __post_init__(self) -> None:
        if self.pop_size < 2:
            raise ValueError("population size must be at least 2")
        if not 1 <= self.tournament <= self.pop_size:
            raise ValueError("tournament size must lie in [1, pop_size]")
        if not 0.0 <= self.p_mut <= 1.0:
            raise ValueError("p_mut must lie in [0, 1]")
        if self.time_limit is None and self.max_iterations is None:
            raise ValueError("give a time limit, an iteration budget or both")
        if self.time_limit is not None and self.time_limit <= 0:
            raise ValueError("time limit must be positive")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise ValueError("iteration budget must be positive")

    @property
    def restart_floor(self) -> int:
        return 2 * self.pop_size if self.t_min is None else self.t_min


@dataclass
class RunRecord:
    best: Tour
    best_length: int
    init_best_length: int
    time_to_best: float
    iterations: int
    restarts: int
    proven_optimal_at_init: bool
    elapsed: float = 0.0
    seed: int = 0
    history: list[tuple[float, int]] = field(default_factory=list, repr=False)


@dataclass
class _Seeds:
    """Deterministic per-instance data reused across restarts."""

    zhang: list[Tour]
    proven_optimal: bool
    neighbors: NeighborLists


def _prepare(instance: AtspInstance) -> _Seeds:
    neighbors = build_neighbor_lists(instance)
    if instance.n < 3:
        return _Seeds([], False, neighbors)
    cover = solve_assignment(instance)
    results = [zhang_construct(instance, v, cover) for v in PatchingVariant]
    return _Seeds([r.tour for r in results], results[0].proven_optimal, neighbors)


def init_population(
    instance: AtspInstance,
    config: GaConfig,
    rng: np.random.Generator,
    seeds: _Seeds | None = None,
    deadline: float | None = None,
) -> tuple[list[Tour], bool]:
    """Two patched assignment tours plus N-2 insertion tours after local search.

    Returns the population and whether the assignment relaxation was already
    a single circuit (which proves optimality). The population is cut short
    if ``deadline`` (a ``time.perf_counter`` value) passes.
    """
    if seeds is None:
        seeds = _prepare(instance)
    pop = list(seeds.zhang[: config.pop_size])
    if seeds.proven_optimal:
        return pop, True
    while len(pop) < config.pop_size:
        if deadline is not None and time.perf_counter() >= deadline and pop:
            break
        t = arbitrary_insertion(instance, rng)
        pop.append(three_opt_local_search(instance, seeds.neighbors, t))
    return pop, False


def tournament_select(lengths: list[int], s: int, rng: np.random.Generator) -> int:
    """Fittest of s distinct uniformly sampled members; lowest index on ties."""
    if not 1 <= s <= len(lengths):
        raise ValueError(f"tournament size {s} outside [1, {len(lengths)}]")
    sample = rng.permutation(len(lengths))[:s].tolist()
    return min(sample, key=lambda i: (lengths[i], i))


def run_ga(
    instance: AtspInstance, config: GaConfig, optimum_hint: int | None = None
) -> RunRecord:
    """One run of the GA with the restart rule.

    Stops on the time limit, the iteration budget, a proof of optimality at
    initialisation, or reaching ``optimum_hint``.
    """
    if instance.n < 3:
        raise ValueError("the GA needs at least 3 vertices")
    start = time.perf_counter()
    deadline = None if config.time_limit is None else start + config.time_limit
    rng = np.random.default_rng(config.seed)
    seeds = _prepare(instance)

    def now() -> float:
        return time.perf_counter() - start

    pop, proven = init_population(instance, config, rng, seeds, deadline)
    lengths = [t.length for t in pop]
    k = int(np.argmin(lengths))
    best = pop[k]
    init_best = best.length
    history = [(now(), best.length)]
    if proven or len(pop) < config.pop_size:
        return RunRecord(best, best.length, init_best, now(), 1, 0, proven,
                         now(), config.seed, history)

    time_to_best = now()
    iterations = 1
    restarts = 0
    t = 1
    t_best = 1
    seg_best = best.length
    steady = config.strategy is Strategy.STEADY_STATE
    use_odec = config.crossover is Crossover.ODEC

    def done() -> bool:
        if optimum_hint is not None and best.length <= optimum_hint:
            return True
        if config.max_iterations is not None and iterations >= config.max_iterations:
            return True
        return deadline is not None and time.perf_counter() >= deadline

    while not done():
        if steady:
            i = tournament_select(lengths, config.tournament, rng)
            j = tournament_select(lengths, config.tournament, rng)
        else:
            i, j = rng.permutation(len(pop))[:2].tolist()
        a, b = pop[i], pop[j]
        if rng.random() < config.p_mut:
            a = mutate(instance, a, rng)
        if rng.random() < config.p_mut:
            b = mutate(instance, b, rng)
        if use_odec:
            child = odec_crossover(instance, a, b, config.node_budget)
        else:
            child = dec_crossover(instance, a, b, rng)

        if steady:
            worst = lengths.index(max(lengths))
            pop[worst] = child
            lengths[worst] = child.length
        else:
            loser = i if lengths[i] >= lengths[j] else j
            if child.length < lengths[loser]:
                pop[loser] = child
                lengths[loser] = child.length

        t += 1
        iterations += 1
        if child.length < seg_best:
            seg_best = child.length
            t_best = t
        if child.length < best.length:
            best = child
            time_to_best = now()
            history.append((time_to_best, best.length))

        if config.restarts and t >= max(2 * t_best, config.restart_floor) and not done():
            restarts += 1
            log.debug("restart %d at t=%d (best %d found at t=%d)", restarts, t, seg_best, t_best)
            pop, _ = init_population(instance, config, rng, seeds, deadline)
            if len(pop) < config.pop_size:
                break
            lengths = [p.length for p in pop]
            t = 1
            t_best = 1
            seg_best = min(lengths)
            k = int(np.argmin(lengths))
            if lengths[k] < best.length:
                best = pop[k]
                time_to_best = now()
                history.append((time_to_best, best.length))

    return RunRecord(best, best.length, init_best, time_to_best, iterations, restarts,
                     False, now(), config.seed, history)
