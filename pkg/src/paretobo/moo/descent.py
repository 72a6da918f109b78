"""Steepest partial descent directions, Armijo search and population refinement."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..benchfns import BoxDomain
from .lp import solve_lp
from .sorting import Population, make_population

__all__ = [
    "BiObjective",
    "DirectionResult",
    "partial_descent_direction",
    "armijo_line_search",
    "optimize_population",
    "is_pareto_stationary",
    "gp_biobjective",
    "SUBSETS",
]

log = logging.getLogger(__name__)

ARMIJO_GAMMA = 1e-4
ARMIJO_DELTA = 0.5
ARMIJO_T0 = 1.0
ARMIJO_MAX_HALVINGS = 30
STATIONARITY_TOL = 1e-6
ACTIVE_TOL = 1e-9
MAX_REFINE_SEEDS = 30
# objective index subsets tried at every refinement seed: both, f1 only, f2 only
SUBSETS = ((0, 1), (0,), (1,))


@dataclass(frozen=True)
class BiObjective:
    """Two objectives with gradients on a box.

    ``evaluate(X)`` maps an (m, n) batch to an (m, 2) array and
    ``gradients(x)`` maps one point to the (2, n) Jacobian.
    """

    evaluate: Callable
    gradients: Callable
    domain: BoxDomain

    def __call__(self, X):
        return self.evaluate(np.atleast_2d(X))


def gp_biobjective(gp) -> BiObjective:
    """``(mu(z), -var(z))`` on the unit cube for a trained GP."""
    from ..gp import predict, predict_gradients

    def evaluate(Z):
        mu, var = predict(gp, Z)
        return np.column_stack([mu, -var])

    def gradients(z):
        gm, gv = predict_gradients(gp, np.asarray(z)[None, :])
        return np.vstack([gm[0], -gv[0]])

    return BiObjective(evaluate, gradients, BoxDomain.unit(gp.dim))


@dataclass(frozen=True)
class DirectionResult:
    d: np.ndarray
    theta: float


def _direction_bounds(x, domain):
    tol = ACTIVE_TOL * domain.width
    at_lo = x <= domain.lower + tol
    at_hi = x >= domain.upper - tol
    lo = np.where(at_lo, 0.0, -1.0)
    hi = np.where(at_hi & ~at_lo, 0.0, 1.0)
    return lo, hi


def partial_descent_direction(grads, x, domain: BoxDomain) -> DirectionResult:
    """Solve ``min_d max_j g_j^T d`` over the feasible cone intersected with the unit inf-ball.

    The LP is written in ``s = d - lo >= 0`` (so the sign constraints at
    active bounds become simple upper bounds on ``s``) and ``gamma = -beta
    >= 0``, which is valid because ``d = 0`` already achieves ``beta = 0``.

    Parameters
    ----------
    grads : sequence of gradient vectors, one per objective in the subset
    x : point in the box
    domain : BoxDomain

    Returns
    -------
    DirectionResult
        ``theta <= 0`` is recomputed as ``max_j g_j^T d`` at the returned ``d``.
    """
    G = np.atleast_2d(np.asarray(grads, dtype=np.float64))
    x = np.asarray(x, dtype=np.float64)
    k, n = G.shape
    lo, hi = _direction_bounds(x, domain)
    scale = np.abs(G).max()
    if not np.isfinite(scale):
        raise FloatingPointError("non-finite gradient")
    if scale == 0.0:
        return DirectionResult(np.zeros(n), 0.0)
    Gs = G / scale
    # variables: s (n), gamma (1); minimize -gamma
    # g_j^T (lo + s) + gamma <= 0  ->  g_j^T s + gamma <= -g_j^T lo
    # s_i <= hi_i - lo_i
    A = np.zeros((k + n, n + 1))
    A[:k, :n] = Gs
    A[:k, n] = 1.0
    A[k:, :n] = np.eye(n)
    b = np.concatenate([-Gs @ lo, hi - lo])
    c = np.zeros(n + 1)
    c[n] = -1.0
    res = solve_lp(c, A, b)
    d = np.clip(lo + res.x[:n], lo, hi)
    theta = float(min((G @ d).max(), 0.0))
    if theta == 0.0:
        d = np.zeros(n)
    return DirectionResult(d, theta)


def armijo_line_search(obj: BiObjective, x, d, theta: float, I, fx=None):
    """Backtracking along ``d`` until every objective in ``I`` decreases enough.

    Accepts the first ``t = t0 * delta**h`` with ``x + t d`` in the box and
    ``f_j(x + t d) <= f_j(x) + gamma * t * theta`` for all ``j`` in ``I``.

    Returns
    -------
    step, x_new, f_new
        ``(0.0, x, fx)`` if no trial step is accepted.
    """
    if not theta < 0:
        raise ValueError("theta must be negative: no descent direction")
    x = np.asarray(x, dtype=np.float64)
    d = np.asarray(d, dtype=np.float64)
    I = list(I)
    if fx is None:
        fx = obj.evaluate(x[None, :])[0]
    dom = obj.domain
    slack = 1e-12 * dom.width
    t = ARMIJO_T0
    for _ in range(ARMIJO_MAX_HALVINGS + 1):
        xt = x + t * d
        if np.all(xt >= dom.lower - slack) and np.all(xt <= dom.upper + slack):
            xt = dom.clip(xt)
            ft = obj.evaluate(xt[None, :])[0]
            if np.all(ft[I] <= fx[I] + ARMIJO_GAMMA * t * theta):
                return t, xt, ft
        t *= ARMIJO_DELTA
    return 0.0, x, fx


def refinement_seeds(pop: Population, limit: int = MAX_REFINE_SEEDS) -> np.ndarray:
    """Rank-0 members by decreasing crowding, topped up with the most crowded others."""
    front = pop.front(0)
    front = front[np.argsort(-pop.crowding[front], kind="stable")][:limit]
    if front.size < limit:
        rest = np.setdiff1d(np.arange(len(pop)), front)
        rest = rest[np.argsort(-pop.crowding[rest], kind="stable")][:limit - front.size]
        front = np.concatenate([front, rest])
    return front


def optimize_population(obj: BiObjective, pop: Population, rng=None,
                        subsets=SUBSETS, tol: float = STATIONARITY_TOL,
                        max_seeds: int = MAX_REFINE_SEEDS) -> Population:
    """Append Armijo steps along partial descent directions from selected members.

    ``rng`` is accepted for interface symmetry with the genetic operators;
    the refinement itself is deterministic.
    """
    new_X, new_F = [], []
    for i in refinement_seeds(pop, max_seeds):
        x, fx = pop.X[i], pop.F[i]
        J = obj.gradients(x)
        for I in subsets:
            dr = partial_descent_direction(J[list(I)], x, obj.domain)
            if dr.theta < -tol:
                t, xn, fn = armijo_line_search(obj, x, dr.d, dr.theta, I, fx)
                if t > 0:
                    new_X.append(xn)
                    new_F.append(fn)
    if not new_X:
        return pop
    X = np.vstack([pop.X, np.asarray(new_X)])
    F = np.vstack([pop.F, np.asarray(new_F)])
    return make_population(X, F)


def is_pareto_stationary(obj: BiObjective, x, tol: float = STATIONARITY_TOL) -> bool:
    J = obj.gradients(np.asarray(x, dtype=np.float64))
    return partial_descent_direction(J, x, obj.domain).theta >= -tol
