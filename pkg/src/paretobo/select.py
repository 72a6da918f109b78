"""Choosing the q batch points from a final population by k-means.

``select_batch_X`` clusters decision vectors and returns the centers;
``select_batch_F`` clusters (normalized) objective pairs and returns, for
each center, the population member whose image is closest.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .benchfns import BoxDomain
from .moo.sorting import Population

__all__ = [
    "ClusteringResult",
    "BatchProposal",
    "kmeans",
    "select_batch_X",
    "select_batch_F",
    "dedupe_rows",
]

log = logging.getLogger(__name__)

DUP_TOL = 1e-12
N_RESTARTS = 10
LLOYD_MAXITER = 300
LLOYD_TOL = 1e-9


@dataclass(frozen=True)
class ClusteringResult:
    centers: np.ndarray
    assignments: np.ndarray
    inertia: float


@dataclass(frozen=True)
class BatchProposal:
    """q points plus how they were obtained.

    ``member_indices[i]`` is the population index behind ``points[i]`` for
    objective-space selection (``-1`` for padded points); it is ``None`` for
    variable-space selection, whose points are synthetic centers.
    """

    points: np.ndarray
    centers: np.ndarray
    member_indices: np.ndarray | None
    n_padded: int = 0


def dedupe_rows(A, tol: float = DUP_TOL):
    """Merge rows equal within ``tol`` (max-norm).

    Returns
    -------
    unique : (u, d) array
        First occurrence of each group, in order of first appearance.
    inverse : (m,) int array
        Group of every input row.
    counts : (u,) int array
    """
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    m = A.shape[0]
    inverse = np.full(m, -1, dtype=np.int64)
    reps = []
    for i in range(m):
        if inverse[i] >= 0:
            continue
        g = len(reps)
        reps.append(i)
        close = np.abs(A[i:] - A[i]).max(axis=1) <= tol
        idx = np.flatnonzero(close) + i
        inverse[idx[inverse[idx] < 0]] = g
    reps = np.asarray(reps, dtype=np.int64)
    return A[reps], inverse, np.bincount(inverse, minlength=len(reps))


def _sq_to_nearest(X, C):
    return ((X[:, None, :] - C[None, :, :]) ** 2).sum(axis=2).min(axis=1)


def _kmeanspp(X, w, k, rng):
    """Greedy k-means++: 2 + floor(ln k) candidates per step, keep the best."""
    n_trials = 2 + int(math.log(k))
    first = rng.choice(X.shape[0], p=w / w.sum())
    C = [X[first]]
    d2 = _sq_to_nearest(X, np.asarray(C))
    for _ in range(1, k):
        p = w * d2
        tot = p.sum()
        if tot <= 0:
            # all remaining mass sits on chosen centers; pick unused points
            unused = np.flatnonzero(d2 > 0)
            cand = unused[:1] if unused.size else np.array([0])
        else:
            cand = rng.choice(X.shape[0], size=n_trials, p=p / tot)
        best, best_pot, best_d2 = None, np.inf, None
        for c in cand:
            nd2 = np.minimum(d2, ((X - X[c]) ** 2).sum(axis=1))
            pot = float((w * nd2).sum())
            if pot < best_pot:
                best, best_pot, best_d2 = c, pot, nd2
        C.append(X[best])
        d2 = best_d2
    return np.asarray(C)


def _hartigan(X, w, labels, k, max_sweeps=100):
    """Single-point transfers that strictly lower the weighted inertia.

    Lloyd's fixed points can leave a point whose move to another cluster
    lowers the objective once the centroid shift is accounted for; this
    pass removes those.
    """
    labels = labels.copy()
    W = np.bincount(labels, weights=w, minlength=k)
    S = np.zeros((k, X.shape[1]))
    np.add.at(S, labels, w[:, None] * X)
    for _ in range(max_sweeps):
        moved = False
        for i in range(X.shape[0]):
            a = labels[i]
            if W[a] - w[i] <= 0:
                continue
            ca = S[a] / W[a]
            cost_out = w[i] * W[a] / (W[a] - w[i]) * ((X[i] - ca) ** 2).sum()
            C = S / W[:, None]
            gain = w[i] * W / (W + w[i]) * ((X[i] - C) ** 2).sum(axis=1)
            gain[a] = np.inf
            b = int(np.argmin(gain))
            if gain[b] < cost_out * (1.0 - 1e-12):
                S[a] -= w[i] * X[i]
                W[a] -= w[i]
                S[b] += w[i] * X[i]
                W[b] += w[i]
                labels[i] = b
                moved = True
        if not moved:
            break
    return labels


def _weighted_kmeans(X, w, k, rng, restarts=N_RESTARTS):
    best = None
    for _ in range(restarts):
        C0 = _kmeanspp(X, w, k, rng)
        C, labels, inertia, _, hist = kernels.lloyd(X, w, C0, LLOYD_MAXITER, LLOYD_TOL)
        if __debug__ and hist.size > 1:
            assert np.all(np.diff(hist) <= 1e-12 * max(1.0, hist[0])), "Lloyd inertia increased"
        labels = _hartigan(X, w, labels, k)
        C = np.vstack([np.average(X[labels == c], axis=0, weights=w[labels == c])
                       for c in range(k)])
        C, labels, inertia, _, _ = kernels.lloyd(X, w, C, LLOYD_MAXITER, LLOYD_TOL)
        if best is None or inertia < best[2]:
            best = (C, labels, inertia)
    return best


def kmeans(samples, k: int, seed=0, restarts: int = N_RESTARTS) -> ClusteringResult:
    """Weighted k-means on the distinct rows of ``samples``.

    Duplicated rows are merged into one weighted point, so repeating a data
    set does not change the result. Assignments refer to the input rows.

    Raises
    ------
    ValueError
        If there are fewer than ``k`` distinct samples.
    """
    X = np.atleast_2d(np.asarray(samples, dtype=np.float64))
    if k < 1:
        raise ValueError("k must be positive")
    U, inverse, counts = dedupe_rows(X)
    if U.shape[0] < k:
        raise ValueError(f"only {U.shape[0]} distinct samples for k={k}")
    if U.shape[0] == k:
        return ClusteringResult(U.copy(), inverse.copy(), 0.0)
    rng = np.random.default_rng(seed)
    C, labels, _ = _weighted_kmeans(U, counts.astype(np.float64), k, rng, restarts)
    assign = labels[inverse]
    inertia = float(((X - C[assign]) ** 2).sum())
    return ClusteringResult(C, assign, inertia)


def _pad(domain, count, rng, existing):
    out = []
    while len(out) < count:
        p = domain.lower + rng.random(domain.dim) * domain.width
        if all(np.abs(p - e).max() > DUP_TOL for e in list(existing) + out):
            out.append(p)
    return np.asarray(out).reshape(count, domain.dim)


def _domain_for(pop, domain):
    return domain if domain is not None else BoxDomain.unit(pop.X.shape[1])


def select_batch_X(pop: Population, q: int, seed=0, domain: BoxDomain | None = None) -> BatchProposal:
    """Cluster decision vectors and return the ``q`` centers."""
    domain = _domain_for(pop, domain)
    rng = np.random.default_rng(seed)
    front = pop.front(0)
    U = dedupe_rows(pop.X[front])[0]
    if U.shape[0] < q:
        U = dedupe_rows(pop.X)[0]
    if U.shape[0] >= q:
        res = kmeans(U, q, seed=rng)
        C = domain.clip(res.centers)
        # coincident centers cannot come from distinct clusters of distinct points,
        # but guard anyway: the GP needs distinct inputs
        keep = dedupe_rows(C)[0]
        if keep.shape[0] < q:
            log.warning("select_batch_X: %d coincident centers replaced by uniform points",
                        q - keep.shape[0])
            C = np.vstack([keep, _pad(domain, q - keep.shape[0], rng, keep)])
        return BatchProposal(C, res.centers, None, q - keep.shape[0])
    log.warning("select_batch_X: %d distinct points for q=%d, padding uniformly", U.shape[0], q)
    P = np.vstack([U, _pad(domain, q - U.shape[0], rng, U)])
    return BatchProposal(P, U.copy(), None, q - U.shape[0])


def _normalize(F):
    lo = F.min(axis=0)
    span = F.max(axis=0) - lo
    span[span <= 0] = 1.0
    return (F - lo) / span


def select_batch_F(pop: Population, q: int, seed=0, domain: BoxDomain | None = None) -> BatchProposal:
    """Cluster objective pairs; return the member nearest each center."""
    domain = _domain_for(pop, domain)
    rng = np.random.default_rng(seed)
    cand = pop.front(0)
    if dedupe_rows(pop.F[cand])[0].shape[0] < q:
        cand = np.arange(len(pop))
    Fn = _normalize(pop.F[cand])
    n_distinct = dedupe_rows(Fn)[0].shape[0]
    k = min(q, n_distinct)
    res = kmeans(Fn, k, seed=rng)
    chosen = []
    for c in res.centers:
        d = np.sqrt(((Fn - c) ** 2).sum(axis=1))
        for j in np.argsort(d, kind="stable"):
            idx = int(cand[j])
            if all(np.abs(pop.X[idx] - pop.X[o]).max() > DUP_TOL for o in chosen):
                chosen.append(idx)
                break
    # fewer distinct images than q: fill with other distinct members, then pad
    for idx in cand:
        if len(chosen) >= q:
            break
        if all(np.abs(pop.X[idx] - pop.X[o]).max() > DUP_TOL for o in chosen):
            chosen.append(int(idx))
    P = pop.X[chosen] if chosen else np.empty((0, pop.X.shape[1]))
    n_pad = q - len(chosen)
    members = np.asarray(chosen + [-1] * n_pad, dtype=np.int64)
    if n_pad:
        log.warning("select_batch_F: only %d distinct members for q=%d, padding uniformly",
                    len(chosen), q)
        P = np.vstack([P, _pad(domain, n_pad, rng, P)])
    return BatchProposal(np.array(P, dtype=np.float64), res.centers, members, n_pad)
