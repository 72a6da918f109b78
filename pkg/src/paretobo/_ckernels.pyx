# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the loops in ``_pykernels``.

Same signatures and return conventions; see that module for documentation.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, INFINITY, fabs

cnp.import_array()


def nondominated_ranks(F):
    cdef double[:, ::1] f = np.ascontiguousarray(F, dtype=np.float64)
    cdef Py_ssize_t n = f.shape[0], m = f.shape[1]
    cdef Py_ssize_t i, j, t, p, nfront, nnext
    cdef bint le, lt
    cdef cnp.int64_t[::1] count = np.zeros(n, dtype=np.int64)
    ranks_arr = np.full(n, -1, dtype=np.int64)
    cdef cnp.int64_t[::1] ranks = ranks_arr
    # dominated-by lists as a dense boolean matrix: n is at most a few hundred
    dom_arr = np.zeros((n, n), dtype=np.uint8)
    cdef cnp.uint8_t[:, ::1] dom = dom_arr
    for i in range(n):
        for j in range(i + 1, n):
            le = True
            lt = False
            for t in range(m):
                if f[i, t] > f[j, t]:
                    le = False
                    break
                if f[i, t] < f[j, t]:
                    lt = True
            if le and lt:
                dom[i, j] = 1
                count[j] += 1
                continue
            le = True
            lt = False
            for t in range(m):
                if f[j, t] > f[i, t]:
                    le = False
                    break
                if f[j, t] < f[i, t]:
                    lt = True
            if le and lt:
                dom[j, i] = 1
                count[i] += 1
    front_arr = np.empty(n, dtype=np.int64)
    next_arr = np.empty(n, dtype=np.int64)
    cdef cnp.int64_t[::1] front = front_arr
    cdef cnp.int64_t[::1] nxt = next_arr
    nfront = 0
    for i in range(n):
        if count[i] == 0:
            front[nfront] = i
            nfront += 1
    cdef cnp.int64_t r = 0
    while nfront > 0:
        nnext = 0
        for p in range(nfront):
            i = front[p]
            ranks[i] = r
        for p in range(nfront):
            i = front[p]
            for j in range(n):
                if dom[i, j]:
                    count[j] -= 1
                    if count[j] == 0:
                        nxt[nnext] = j
                        nnext += 1
        # keep fronts in ascending index order
        nxt_sorted = np.sort(next_arr[:nnext])
        for p in range(nnext):
            front[p] = nxt_sorted[p]
        nfront = nnext
        r += 1
    return ranks_arr


def crowding_distance(F):
    cdef double[:, ::1] f = np.ascontiguousarray(F, dtype=np.float64)
    cdef Py_ssize_t npts = f.shape[0], m = f.shape[1]
    cdef Py_ssize_t j, p
    cdef double span
    if npts <= 2:
        return np.full(npts, np.inf)
    out = np.zeros(npts, dtype=np.float64)
    cdef double[::1] dist = out
    cdef cnp.int64_t[::1] order
    for j in range(m):
        order = np.argsort(np.asarray(f[:, j]), kind="stable").astype(np.int64)
        span = f[order[npts - 1], j] - f[order[0], j]
        if span > 0:
            for p in range(1, npts - 1):
                dist[order[p]] += (f[order[p + 1], j] - f[order[p - 1], j]) / span
        dist[order[0]] = INFINITY
        dist[order[npts - 1]] = INFINITY
    return out


def simplex_pivots(T, basis, Py_ssize_t n_cols, Py_ssize_t max_iter, double tol):
    cdef double[:, ::1] t = T
    cdef cnp.int64_t[::1] b = basis
    cdef Py_ssize_t m = t.shape[0] - 1, ncol = t.shape[1]
    cdef Py_ssize_t it, i, j, col, row
    cdef double rmin, ratio, piv, fac, thresh
    for it in range(max_iter):
        col = -1
        for j in range(n_cols):
            if t[m, j] < -tol:
                col = j
                break
        if col < 0:
            return 0, it
        rmin = INFINITY
        for i in range(m):
            if t[i, col] > tol:
                ratio = t[i, ncol - 1] / t[i, col]
                if ratio < rmin:
                    rmin = ratio
        if rmin == INFINITY:
            return 1, it
        thresh = rmin + tol * (1.0 + fabs(rmin))
        row = -1
        for i in range(m):
            if t[i, col] > tol:
                ratio = t[i, ncol - 1] / t[i, col]
                if ratio <= thresh and (row < 0 or b[i] < b[row]):
                    row = i
        piv = t[row, col]
        for j in range(ncol):
            t[row, j] /= piv
        for i in range(m + 1):
            if i == row:
                continue
            fac = t[i, col]
            if fac != 0.0:
                for j in range(ncol):
                    t[i, j] -= fac * t[row, j]
        b[row] = col
    return 2, max_iter


cdef inline void _assign(double[:, ::1] x, double[:, ::1] c, cnp.int64_t[::1] labels,
                         double[::1] best) noexcept nogil:
    cdef Py_ssize_t n = x.shape[0], d = x.shape[1], k = c.shape[0]
    cdef Py_ssize_t i, a, t
    cdef double s, diff
    for i in range(n):
        best[i] = INFINITY
        labels[i] = 0
        for a in range(k):
            s = 0.0
            for t in range(d):
                diff = x[i, t] - c[a, t]
                s += diff * diff
            if s < best[i]:
                best[i] = s
                labels[i] = a


def lloyd(X, w, centers, Py_ssize_t max_iter, double tol):
    cdef double[:, ::1] x = np.ascontiguousarray(X, dtype=np.float64)
    cdef double[::1] wt = np.ascontiguousarray(w, dtype=np.float64)
    C_arr = np.array(centers, dtype=np.float64, order="C", copy=True)
    cdef double[:, ::1] c = C_arr
    cdef Py_ssize_t n = x.shape[0], d = x.shape[1], k = c.shape[0]
    labels_arr = np.zeros(n, dtype=np.int64)
    cdef cnp.int64_t[::1] labels = labels_arr
    best_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] best = best_arr
    newc_arr = np.zeros((k, d), dtype=np.float64)
    cdef double[:, ::1] newc = newc_arr
    wsum_arr = np.zeros(k, dtype=np.float64)
    cdef double[::1] wsum = wsum_arr
    counts_arr = np.zeros(k, dtype=np.int64)
    cdef cnp.int64_t[::1] counts = counts_arr
    cdef Py_ssize_t it, i, a, t, big, far
    cdef double inertia, shift, s, diff, fardist
    history = []
    it = 0
    for it in range(1, max_iter + 1):
        _assign(x, c, labels, best)
        inertia = 0.0
        for i in range(n):
            inertia += wt[i] * best[i]
        history.append(inertia)
        for a in range(k):
            counts[a] = 0
        for i in range(n):
            counts[labels[i]] += 1
        for a in range(k):
            if counts[a] == 0:
                big = 0
                for t in range(k):
                    if counts[t] > counts[big]:
                        big = t
                far = -1
                fardist = -1.0
                for i in range(n):
                    if labels[i] == big and best[i] > fardist:
                        fardist = best[i]
                        far = i
                labels[far] = a
                counts[big] -= 1
                counts[a] = 1
        for a in range(k):
            wsum[a] = 0.0
            for t in range(d):
                newc[a, t] = 0.0
        for i in range(n):
            a = labels[i]
            wsum[a] += wt[i]
            for t in range(d):
                newc[a, t] += wt[i] * x[i, t]
        shift = 0.0
        for a in range(k):
            s = 0.0
            for t in range(d):
                newc[a, t] /= wsum[a]
                diff = newc[a, t] - c[a, t]
                s += diff * diff
                c[a, t] = newc[a, t]
            s = sqrt(s)
            if s > shift:
                shift = s
        if shift < tol:
            break
    _assign(x, c, labels, best)
    inertia = 0.0
    for i in range(n):
        inertia += wt[i] * best[i]
    return C_arr, labels_arr, inertia, it, np.asarray(history)
