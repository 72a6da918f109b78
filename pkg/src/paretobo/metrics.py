"""Run-level and cross-run performance measures."""
from __future__ import annotations

import logging

import numpy as np
from scipy.integrate import trapezoid

from .benchfns import BoxDomain

__all__ = [
    "normalized_regret",
    "nr_auc",
    "batch_knots",
    "boundary_clearance",
    "boundary_distance_trace",
    "relative_gap_distribution",
    "confidence_interval",
]

log = logging.getLogger(__name__)

GAP_FLOOR = 1e-12
Z95 = 1.96


def normalized_regret(trace, f_star: float, f_best_0: float | None = None) -> np.ndarray:
    """``(f_k - f*) / (f_0 - f*)`` for a best-so-far series.

    ``f_best_0`` defaults to ``trace[0]``. If it equals ``f_star`` the run
    started at the optimum; an all-zero series is returned and the event is
    logged.
    """
    trace = np.asarray(trace, dtype=np.float64)
    if f_best_0 is None:
        f_best_0 = float(trace[0])
    denom = f_best_0 - f_star
    if denom == 0:
        log.warning("normalized regret is degenerate: initial best equals f*")
        return np.zeros_like(trace)
    return (trace - f_star) / denom


def batch_knots(n_max: int, q: int) -> np.ndarray:
    """Evaluation counts at which batches complete: 0, q, 2q, ..., n_max."""
    knots = list(range(0, n_max + 1, q))
    if knots[-1] != n_max:
        knots.append(n_max)
    return np.asarray(knots, dtype=np.int64)


def nr_auc(nr_series, knots=None) -> float:
    """Trapezoidal area under the normalized-regret curve.

    ``nr_series`` is either the value at each knot (with ``knots`` given) or
    the per-evaluation series indexed 0..N_M (knots default to every index).
    """
    y = np.asarray(nr_series, dtype=np.float64)
    if knots is None:
        x = np.arange(y.size, dtype=np.float64)
    else:
        x = np.asarray(knots, dtype=np.float64)
        if y.size != x.size:
            y = y[np.asarray(knots, dtype=np.int64)]
    return float(trapezoid(y, x))


def boundary_clearance(X, domain: BoxDomain) -> np.ndarray:
    """Per-point ``min_i min(x_i - l_i, u_i - x_i)``."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    return np.minimum(X - domain.lower, domain.upper - X).min(axis=1)


def boundary_distance_trace(X, domain: BoxDomain) -> np.ndarray:
    """Running maximum of boundary clearance, with a leading 0 for k = 0.

    Returns an array of length ``len(X) + 1``.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.size == 0:
        return np.zeros(1)
    c = np.maximum(boundary_clearance(X, domain), 0.0)
    return np.concatenate([[0.0], np.maximum.accumulate(c)])


def relative_gap_distribution(scores: dict):
    """Cumulative distribution of relative gaps to the per-problem best score.

    Parameters
    ----------
    scores : dict
        ``{solver: {problem: score}}`` with lower scores better.

    Returns
    -------
    taus : 1-D array
        Breakpoints: 0 and every distinct gap, ascending.
    curves : dict
        ``{solver: fraction of problems with gap <= tau}`` at each breakpoint.
    gaps : dict
        ``{solver: {problem: gap}}``.
    """
    solvers = list(scores)
    problems = sorted(set().union(*[set(scores[s]) for s in solvers])) if solvers else []
    complete = [p for p in problems if all(p in scores[s] and scores[s][p] is not None
                                           and np.isfinite(scores[s][p]) for s in solvers)]
    dropped = set(problems) - set(complete)
    if dropped:
        log.warning("relative gap: dropping problems with missing scores: %s", sorted(dropped))
    gaps = {s: {} for s in solvers}
    for p in complete:
        best = min(scores[s][p] for s in solvers)
        denom = max(abs(best), GAP_FLOOR)
        for s in solvers:
            gaps[s][p] = (scores[s][p] - best) / denom
    all_gaps = sorted({0.0} | {g for s in solvers for g in gaps[s].values()})
    taus = np.asarray(all_gaps)
    curves = {}
    for s in solvers:
        g = np.asarray([gaps[s][p] for p in complete])
        if g.size == 0:
            curves[s] = np.zeros_like(taus)
        else:
            curves[s] = (g[None, :] <= taus[:, None]).mean(axis=1)
    return taus, curves, gaps


def confidence_interval(values):
    """Normal-approximation 95% interval ``mean +- 1.96 sd / sqrt(n)``.

    A single value gives the degenerate interval ``(v, v)``.
    """
    v = np.asarray(values, dtype=np.float64).ravel()
    if v.size == 0:
        raise ValueError("no values")
    m = float(v.mean())
    if v.size == 1:
        return m, m
    hw = Z95 * float(v.std(ddof=1)) / np.sqrt(v.size)
    return m - hw, m + hw
