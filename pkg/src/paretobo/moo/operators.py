"""NSGA-II operators: tournament selection, SBX, polynomial mutation, survival."""
from __future__ import annotations

import logging

import numpy as np

from ..benchfns import BoxDomain
from .sorting import Population, make_population

__all__ = ["get_parents", "crossover", "mutation", "selection"]

log = logging.getLogger(__name__)

CROSSOVER_PROB = 0.9
SBX_ETA = 20.0
MUTATION_ETA = 20.0


def _better(pop, a, b):
    """Index winning a binary tournament; the first drawn wins exact ties."""
    if pop.rank[a] != pop.rank[b]:
        return a if pop.rank[a] < pop.rank[b] else b
    if pop.crowding[b] > pop.crowding[a]:
        return b
    return a


def get_parents(pop: Population, rng) -> np.ndarray:
    """``max(1, N // 2)`` parent pairs by binary tournament, shape (pairs, 2)."""
    N = len(pop)
    npairs = max(1, N // 2)
    draws = rng.integers(0, N, size=(npairs, 2, 2))
    out = np.empty((npairs, 2), dtype=np.int64)
    for p in range(npairs):
        for s in range(2):
            out[p, s] = _better(pop, int(draws[p, s, 0]), int(draws[p, s, 1]))
    return out


def crossover(P1, P2, domain: BoxDomain, rng, prob: float = CROSSOVER_PROB,
              eta: float = SBX_ETA) -> np.ndarray:
    """Simulated binary crossover of parent rows ``P1[i]``, ``P2[i]``.

    Each pair crosses with probability ``prob``; each variable of a crossing
    pair is recombined with probability 0.5. Returns the ``2 * len(P1)``
    children, clipped to the box.
    """
    P1 = np.atleast_2d(np.asarray(P1, dtype=np.float64))
    P2 = np.atleast_2d(np.asarray(P2, dtype=np.float64))
    m, n = P1.shape
    do_pair = rng.random(m) < prob
    do_var = rng.random((m, n)) < 0.5
    u = rng.random((m, n))
    beta = np.where(u <= 0.5, (2.0 * u) ** (1.0 / (eta + 1.0)),
                    (1.0 / (2.0 * (1.0 - u))) ** (1.0 / (eta + 1.0)))
    mask = do_pair[:, None] & do_var & (np.abs(P1 - P2) >= 1e-14)
    C1 = np.where(mask, 0.5 * ((1.0 + beta) * P1 + (1.0 - beta) * P2), P1)
    C2 = np.where(mask, 0.5 * ((1.0 - beta) * P1 + (1.0 + beta) * P2), P2)
    return domain.clip(np.vstack([C1, C2]))


def mutation(X, domain: BoxDomain, rng, prob: float | None = None,
             eta: float = MUTATION_ETA) -> np.ndarray:
    """Polynomial mutation with per-gene probability ``prob`` (default 1/n)."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    m, n = X.shape
    if prob is None:
        prob = 1.0 / n
    flip = rng.random((m, n)) < prob
    u = rng.random((m, n))
    delta = np.where(u < 0.5, (2.0 * u) ** (1.0 / (eta + 1.0)) - 1.0,
                     1.0 - (2.0 * (1.0 - u)) ** (1.0 / (eta + 1.0)))
    out = np.where(flip, X + delta * domain.width, X)
    return domain.clip(out)


def selection(pop: Population, N: int) -> Population:
    """Keep the ``N`` best by (rank ascending, crowding descending), then re-rank."""
    if len(pop) <= N:
        if len(pop) < N:
            log.info("selection: only %d points available for a population of %d", len(pop), N)
        return make_population(pop.X, pop.F)
    order = np.lexsort((-pop.crowding, pop.rank))[:N]
    return make_population(pop.X[order], pop.F[order])
