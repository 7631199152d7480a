"""Genetic algorithm with optimal recombination for the asymmetric TSP."""

from .assignment import CycleCover, decompose_cycles, solve_assignment
from .bench import compute_metrics, run_trials, stat_test
from .construction import PatchingVariant, arbitrary_insertion, patch_two_cycles, zhang_construct
from .ga import Crossover, GaConfig, RunRecord, Strategy, init_population, run_ga, tournament_select
from .instance_io import (
    AtspInstance,
    default_optima_registry,
    generate_random_instance,
    load_optima_registry,
    parse_tsplib_atsp,
    read_tsplib_atsp,
)
from .local_search import apply_segment_reversal_move, build_neighbor_lists, three_opt_local_search
from .orp import brute_force_orp, build_orp_instance, held_karp, solve_orp
from .tour import Tour, make_tour, random_tour, tour_length
from .variation import dec_crossover, mutate_3change, mutate_quad_change, odec_crossover

__version__ = "0.1.0"
