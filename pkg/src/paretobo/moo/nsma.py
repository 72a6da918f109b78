"""NSMA and NSGA-II drivers, plus a 2-D hypervolume indicator."""
from __future__ import annotations

import logging

import numpy as np

from .descent import BiObjective, optimize_population
from .operators import crossover, get_parents, mutation, selection
from .sorting import Population, make_population

__all__ = ["nsma_run", "nsga2_run", "hypervolume_2d"]

log = logging.getLogger(__name__)


def _initial_population(obj, init, N, rng):
    X = np.atleast_2d(np.asarray(init, dtype=np.float64))
    if X.shape[0] == 0:
        raise ValueError("initial point set is empty")
    if not all(obj.domain.contains(x) for x in X):
        raise ValueError("initial points must lie in the box")
    if X.shape[0] < N:
        dom = obj.domain
        pad = dom.lower + rng.random((N - X.shape[0], dom.dim)) * dom.width
        log.info("padding initial set of %d points with %d uniform points", X.shape[0], len(pad))
        X = np.vstack([X, pad])
    return make_population(X, obj.evaluate(X))


def nsma_run(obj: BiObjective, N: int = 100, iters: int = 20, n_opt: int = 5,
             init=None, seed=0, refine: bool = True) -> Population:
    """Evolve a population on ``obj`` and return the last one.

    Parameters
    ----------
    obj : BiObjective
    N : int
        Population size.
    iters : int
        Generations.
    n_opt : int
        Gradient refinement runs at generations ``t`` with ``t % n_opt == 0``.
    init : (m, n) array
        Starting points; padded with uniform points if ``m < N``.
    seed : int or Generator
    refine : bool
        ``False`` gives plain NSGA-II.
    """
    rng = np.random.default_rng(seed)
    pop = selection(_initial_population(obj, init, N, rng), N)
    for t in range(iters):
        pairs = get_parents(pop, rng)
        kids = crossover(pop.X[pairs[:, 0]], pop.X[pairs[:, 1]], obj.domain, rng)
        kids = mutation(kids, obj.domain, rng)
        union = make_population(np.vstack([pop.X, kids]),
                                np.vstack([pop.F, obj.evaluate(kids)]))
        pop = selection(union, N)
        if refine and t % n_opt == 0:
            pop = selection(optimize_population(obj, pop, rng), N)
    return pop


def nsga2_run(obj: BiObjective, N: int = 100, iters: int = 20, init=None, seed=0) -> Population:
    return nsma_run(obj, N=N, iters=iters, init=init, seed=seed, refine=False)


def hypervolume_2d(F, ref) -> float:
    """Area dominated by the points of ``F`` and bounded by ``ref`` (minimization)."""
    F = np.atleast_2d(np.asarray(F, dtype=np.float64))
    ref = np.asarray(ref, dtype=np.float64)
    F = F[np.all(F < ref, axis=1)]
    if F.shape[0] == 0:
        return 0.0
    F = F[np.lexsort((F[:, 1], F[:, 0]))]
    hv = 0.0
    best2 = ref[1]
    for f1, f2 in F:
        if f2 < best2:
            hv += (ref[0] - f1) * (best2 - f2)
            best2 = f2
    return float(hv)
