"""Fast oracle checks behind ``paretobo selftest``.

Each check compares a component against an independent computation on a
small instance and prints one PASS/FAIL line.
"""
from __future__ import annotations

import itertools

import numpy as np

from . import gp, kernels
from .acq import MCAcquisition, ei_from_moments, sobol_normal
from .benchfns import CATALOGUE, get_benchmark, known_minimizer
from .benchfns import BoxDomain
from .metrics import confidence_interval, normalized_regret, nr_auc
from .moo import nondominated_sort, partial_descent_direction
from .select import kmeans


def _check_benchmarks():
    worst = 0.0
    for key, e in CATALOGUE.items():
        dims = sorted(e.optima) if e.optima is not None else [2, 10]
        for n in dims:
            b = get_benchmark(key, n)
            if b.optimal_value is None:
                continue
            worst = max(worst, abs(b(known_minimizer(b)) - b.optimal_value))
    return worst <= 1e-4, f"max |f(x*) - f*| = {worst:.2e}"


def _check_gp_interpolation():
    rng = np.random.default_rng(1)
    dom = BoxDomain.unit(3)
    X = rng.random((8, 3))
    y = np.sin(X.sum(axis=1) * 3)
    m = gp.fit(X, y, dom, seed=0)
    mu, var = gp.predict(m, m.X_scaled)
    err = np.abs(mu - m.y_scaled).max()
    return err <= 1e-6 and var.max() <= 1e-6 * m.params.output_scale, f"max error {err:.1e}"


def _check_qei():
    rng = np.random.default_rng(2)
    dom = BoxDomain.unit(2)
    X = rng.random((6, 2))
    m = gp.fit(X, (X ** 2).sum(axis=1), dom, seed=0)
    x = rng.random((1, 2))
    mu, var = gp.predict(m, x)
    # incumbent half a standard deviation above the mean keeps EI well away from 0
    f_best = mu[0] + 0.5 * np.sqrt(var[0])
    ref = ei_from_moments(mu[0], np.sqrt(var[0]), f_best)
    acq = MCAcquisition(m, "qei", sobol_normal(1, 2 ** 13, 0), f_best=f_best)
    got = acq.value_unit(x)
    return ref > 1e-4 and abs(got - ref) <= 1e-2, f"EI {ref:.3e}, |qEI - EI| = {abs(got - ref):.1e}"


def _check_sorting():
    rng = np.random.default_rng(3)
    ok = True
    for _ in range(20):
        F = rng.integers(0, 5, (12, 2)).astype(float)
        ranks = nondominated_sort(F)
        remaining, r = set(range(12)), 0
        while remaining:
            front = {i for i in remaining
                     if not any(np.all(F[j] <= F[i]) and np.any(F[j] < F[i]) for j in remaining)}
            ok &= all(ranks[i] == r for i in front)
            remaining -= front
            r += 1
    return ok, f"backend {kernels.BACKEND}"


def _check_direction():
    rng = np.random.default_rng(4)
    grid = np.linspace(-1, 1, 41)
    worst = 0.0
    for _ in range(10):
        G = rng.normal(size=(2, 2))
        dr = partial_descent_direction(G, np.full(2, 0.5), BoxDomain.unit(2))
        D = np.array(list(itertools.product(grid, grid)))
        grid_best = min((D @ G.T).max(axis=1).min(), 0.0)
        worst = max(worst, dr.theta - grid_best)
    return worst <= 1e-6, f"theta - grid optimum <= {worst:.1e}"


def _check_kmeans():
    rng = np.random.default_rng(5)
    X = rng.random((7, 2))
    best = np.inf
    for lab in itertools.product(range(2), repeat=7):
        lab = np.array(lab)
        if len(set(lab)) < 2:
            continue
        best = min(best, sum(((X[lab == c] - X[lab == c].mean(axis=0)) ** 2).sum() for c in range(2)))
    res = kmeans(X, 2, seed=0)
    return abs(res.inertia - best) <= 1e-9, f"inertia {res.inertia:.6f} vs {best:.6f}"


def _check_metrics():
    nr = normalized_regret([10.0, 6.0, 4.0], 2.0, 10.0)
    auc = nr_auc([1.0, 0.5, 0.25], [0, 30, 60])
    lo, hi = confidence_interval([0.0, 2.0])
    ok = np.allclose(nr, [1.0, 0.5, 0.25]) and abs(auc - 33.75) < 1e-12 and abs(hi - 1 - 1.96) < 1e-12
    return ok, f"AUC {auc}"


CHECKS = [
    ("benchmark optima", _check_benchmarks),
    ("GP interpolation", _check_gp_interpolation),
    ("q-EI vs closed form", _check_qei),
    ("non-dominated sorting", _check_sorting),
    ("descent direction vs grid", _check_direction),
    ("k-means vs exhaustive", _check_kmeans),
    ("metric arithmetic", _check_metrics),
]


def run_all(out=print) -> bool:
    all_ok = True
    for name, fn in CHECKS:
        try:
            ok, detail = fn()
        except Exception as exc:
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        all_ok &= bool(ok)
        out(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    return all_ok
