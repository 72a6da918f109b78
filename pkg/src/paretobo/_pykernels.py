"""NumPy implementations of the inner loops.

These are the reference versions of the routines in ``_ckernels.pyx``; the
two must agree bit-for-bit on ranks/labels and to rounding on reals. They
are selected automatically when the compiled module is unavailable.
"""
import numpy as np


def nondominated_ranks(F):
    """Pareto rank of every row of ``F`` (0 = non-dominated)."""
    F = np.ascontiguousarray(F, dtype=np.float64)
    n = F.shape[0]
    le = np.all(F[:, None, :] <= F[None, :, :], axis=2)
    lt = np.any(F[:, None, :] < F[None, :, :], axis=2)
    dom = le & lt  # dom[i, j]: i dominates j
    ranks = np.full(n, -1, dtype=np.int64)
    remaining = np.ones(n, dtype=bool)
    r = 0
    while remaining.any():
        idx = np.flatnonzero(remaining)
        dominated = dom[np.ix_(idx, idx)].any(axis=0)
        front = idx[~dominated]
        ranks[front] = r
        remaining[front] = False
        r += 1
    return ranks


def crowding_distance(F):
    F = np.ascontiguousarray(F, dtype=np.float64)
    npts, m = F.shape
    if npts <= 2:
        return np.full(npts, np.inf)
    dist = np.zeros(npts)
    for j in range(m):
        order = np.argsort(F[:, j], kind="stable")
        fj = F[order, j]
        span = fj[-1] - fj[0]
        if span > 0:
            dist[order[1:-1]] += (fj[2:] - fj[:-2]) / span
        dist[order[0]] = np.inf
        dist[order[-1]] = np.inf
    return dist


def simplex_pivots(T, basis, n_cols, max_iter, tol):
    """Bland's-rule pivoting on a dense tableau, in place.

    ``T`` has the constraint rows first and the reduced-cost row last; its
    last column is the right-hand side. Only columns ``< n_cols`` may enter.

    Returns ``(status, iterations)`` with status 0 optimal, 1 unbounded,
    2 iteration limit.
    """
    m = T.shape[0] - 1
    for it in range(max_iter):
        cost = T[m, :n_cols]
        cand = np.flatnonzero(cost < -tol)
        if cand.size == 0:
            return 0, it
        col = int(cand[0])
        colv = T[:m, col]
        pos = np.flatnonzero(colv > tol)
        if pos.size == 0:
            return 1, it
        ratios = T[pos, -1] / colv[pos]
        rmin = ratios.min()
        ties = pos[ratios <= rmin + tol * (1.0 + abs(rmin))]
        row = int(ties[np.argmin(basis[ties])])
        T[row] /= T[row, col]
        factors = T[:, col].copy()
        factors[row] = 0.0
        T -= np.outer(factors, T[row])
        basis[row] = col
    return 2, max_iter


def lloyd(X, w, centers, max_iter, tol):
    """Weighted Lloyd iterations from the given centers.

    Empty clusters are repaired by moving the point farthest from its center
    in the largest cluster. Stops when every center moves less than ``tol``.

    Returns ``(centers, labels, inertia, n_iter, history)`` where ``history``
    holds the inertia after each assignment step.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    w = np.ascontiguousarray(w, dtype=np.float64)
    C = np.array(centers, dtype=np.float64, copy=True)
    k = C.shape[0]
    history = []
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        d2 = ((X[:, None, :] - C[None, :, :]) ** 2).sum(axis=2)
        labels = np.argmin(d2, axis=1)
        history.append(float((w * d2[np.arange(len(X)), labels]).sum()))
        counts = np.bincount(labels, minlength=k)
        for c in range(k):
            if counts[c] == 0:
                big = int(np.argmax(counts))
                members = np.flatnonzero(labels == big)
                far = members[np.argmax(d2[members, big])]
                labels[far] = c
                counts[big] -= 1
                counts[c] = 1
        newC = np.empty_like(C)
        for c in range(k):
            mask = labels == c
            wc = w[mask]
            newC[c] = (wc[:, None] * X[mask]).sum(axis=0) / wc.sum()
        shift = np.sqrt(((newC - C) ** 2).sum(axis=1)).max()
        C = newC
        if shift < tol:
            break
    d2 = ((X[:, None, :] - C[None, :, :]) ** 2).sum(axis=2)
    labels = np.argmin(d2, axis=1)
    inertia = float((w * d2[np.arange(len(X)), labels]).sum())
    return C, labels.astype(np.int64), inertia, n_iter, np.asarray(history)
