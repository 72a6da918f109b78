"""Bi-objective optimization: sorting, genetic operators, descent, and solvers."""
from .descent import (
    BiObjective,
    DirectionResult,
    armijo_line_search,
    gp_biobjective,
    is_pareto_stationary,
    optimize_population,
    partial_descent_direction,
)
from .lp import LPError, LPResult, solve_lp
from .nsma import hypervolume_2d, nsga2_run, nsma_run
from .operators import crossover, get_parents, mutation, selection
from .sorting import (
    Individual,
    Population,
    crowding_distance,
    dominates,
    make_population,
    nondominated_sort,
)

__all__ = [
    "BiObjective", "DirectionResult", "armijo_line_search", "gp_biobjective",
    "is_pareto_stationary", "optimize_population", "partial_descent_direction",
    "LPError", "LPResult", "solve_lp", "hypervolume_2d", "nsga2_run", "nsma_run",
    "crossover", "get_parents", "mutation", "selection", "Individual", "Population",
    "crowding_distance", "dominates", "make_population", "nondominated_sort",
]
