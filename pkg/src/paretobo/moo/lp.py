"""Dense two-phase simplex for small linear programs.

Solves ``min c^T x  s.t.  A_ub x <= b_ub,  x >= 0``. Pivoting uses Bland's
rule, so the method terminates on degenerate problems. The pivot loop lives
in :mod:`paretobo.kernels`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import kernels

__all__ = ["LPResult", "LPError", "solve_lp"]

PIVOT_TOL = 1e-11
FEAS_TOL = 1e-9


class LPError(ArithmeticError):
    """Infeasible, unbounded, or iteration limit reached."""


@dataclass(frozen=True)
class LPResult:
    x: np.ndarray
    fun: float
    iterations: int


def solve_lp(c, A_ub, b_ub, max_iter: int | None = None) -> LPResult:
    c = np.asarray(c, dtype=np.float64)
    A = np.atleast_2d(np.asarray(A_ub, dtype=np.float64))
    b = np.asarray(b_ub, dtype=np.float64)
    m, nv = A.shape
    if c.size != nv or b.size != m:
        raise ValueError("inconsistent LP dimensions")
    if max_iter is None:
        max_iter = 50 * (m + nv) + 100

    neg = b < 0
    na = int(neg.sum())
    ncol = nv + m + na
    # columns: structural | slack | artificial | rhs
    T = np.zeros((m + 1, ncol + 1))
    sign = np.where(neg, -1.0, 1.0)
    T[:m, :nv] = A * sign[:, None]
    T[np.arange(m), nv + np.arange(m)] = sign
    T[:m, -1] = b * sign
    basis = nv + np.arange(m, dtype=np.int64)
    art_rows = np.flatnonzero(neg)
    T[art_rows, nv + m + np.arange(na)] = 1.0
    basis[art_rows] = nv + m + np.arange(na)

    iters = 0
    if na:
        # phase 1: minimize the sum of artificials
        T[m, :] = 0.0
        T[m, :] -= T[art_rows].sum(axis=0)
        T[m, nv + m:ncol] = 0.0
        status, it = kernels.simplex_pivots(T, basis, nv + m, max_iter, PIVOT_TOL)
        iters += it
        if status == 2:
            raise LPError("simplex iteration limit in phase 1")
        if -T[m, -1] > FEAS_TOL * (1.0 + np.abs(b).max()):
            raise LPError("LP is infeasible")
        # drive artificials at level zero out of the basis where possible
        for row in range(m):
            if basis[row] >= nv + m:
                cand = np.flatnonzero(np.abs(T[row, :nv + m]) > PIVOT_TOL)
                if cand.size:
                    col = int(cand[0])
                    T[row] /= T[row, col]
                    f = T[:, col].copy()
                    f[row] = 0.0
                    T -= np.outer(f, T[row])
                    basis[row] = col
        T[:, nv + m:ncol] = 0.0

    # phase 2
    cost = np.zeros(ncol + 1)
    cost[:nv] = c
    T[m, :] = cost
    for row in range(m):
        cb = cost[basis[row]]
        if cb != 0.0:
            T[m, :] -= cb * T[row, :]
    status, it = kernels.simplex_pivots(T, basis, nv + m, max_iter, PIVOT_TOL)
    iters += it
    if status == 1:
        raise LPError("LP is unbounded")
    if status == 2:
        raise LPError("simplex iteration limit in phase 2")
    x = np.zeros(ncol)
    x[basis] = T[:m, -1]
    x = np.maximum(x[:nv], 0.0)
    return LPResult(x, float(c @ x), iters)
