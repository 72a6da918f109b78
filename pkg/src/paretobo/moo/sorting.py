"""Dominance, non-dominated sorting and crowding distance."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import kernels

__all__ = [
    "Individual",
    "Population",
    "dominates",
    "nondominated_sort",
    "crowding_distance",
    "make_population",
]


@dataclass(frozen=True)
class Individual:
    x: np.ndarray
    fvals: tuple
    rank: int
    crowding: float


@dataclass(frozen=True, eq=False)
class Population:
    """Decision vectors ``X`` (N, n) with objectives ``F`` (N, 2), ranks and crowding."""

    X: np.ndarray
    F: np.ndarray
    rank: np.ndarray
    crowding: np.ndarray

    def __len__(self):
        return self.X.shape[0]

    def individuals(self):
        return [Individual(self.X[i].copy(), (float(self.F[i, 0]), float(self.F[i, 1])),
                           int(self.rank[i]), float(self.crowding[i]))
                for i in range(len(self))]

    def front(self, r: int = 0):
        """Indices of members with rank ``r``."""
        return np.flatnonzero(self.rank == r)


def dominates(u, v) -> bool:
    """True iff ``u <= v`` componentwise with at least one strict inequality."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    return bool(np.all(u <= v) and np.any(u < v))


def nondominated_sort(F) -> np.ndarray:
    """Pareto rank of every row of ``F``; 0 is the non-dominated set."""
    F = np.atleast_2d(np.asarray(F, dtype=np.float64))
    if F.shape[0] == 0:
        raise ValueError("empty population")
    return kernels.nondominated_ranks(F)


def crowding_distance(F) -> np.ndarray:
    """Crowding distance of the members of a single front.

    Extremes of every objective get ``inf``; interior members get the sum of
    their neighbour gaps, each normalized by that objective's range. An
    objective that is constant on the front contributes nothing. Ties in an
    objective are ordered by position in ``F``.
    """
    F = np.atleast_2d(np.asarray(F, dtype=np.float64))
    return kernels.crowding_distance(F)


def _crowding_by_front(F, rank):
    crowd = np.empty(F.shape[0])
    for r in np.unique(rank):
        idx = np.flatnonzero(rank == r)
        crowd[idx] = kernels.crowding_distance(F[idx])
    return crowd


def make_population(X, F) -> Population:
    """Rank and crowd a set of points."""
    X = np.array(np.atleast_2d(X), dtype=np.float64)
    F = np.array(np.atleast_2d(F), dtype=np.float64)
    if X.shape[0] != F.shape[0]:
        raise ValueError("X and F must have the same number of rows")
    rank = nondominated_sort(F)
    return Population(X, F, rank, _crowding_by_front(F, rank))
