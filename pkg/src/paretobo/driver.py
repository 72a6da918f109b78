"""Batch Bayesian optimization loop and strategy dispatch.

One run evaluates ``N_i`` uniform points, then repeatedly fits a GP, asks a
strategy for ``q`` new points and evaluates them until ``N_i + N_M``
evaluations have been spent.
"""
from __future__ import annotations

import enum
import logging
import math
import time
from dataclasses import dataclass, field, asdict

import numpy as np

from . import gp as gpmod
from .acq import MCAcquisition, optimize_acquisition, sobol_normal
from .benchfns import Benchmark, BoxDomain, get_benchmark
from .metrics import (batch_knots, boundary_distance_trace, normalized_regret,
                      nr_auc as _nr_auc)
from .moo import gp_biobjective, nsga2_run, nsma_run
from .select import BatchProposal, DUP_TOL, select_batch_F, select_batch_X

__all__ = [
    "Strategy",
    "StrategyParams",
    "ExperimentConfig",
    "ConfigError",
    "RunAborted",
    "BudgetExceeded",
    "CountingEvaluator",
    "RunHistory",
    "MetricsReport",
    "run_bayesopt",
    "dispatch_strategy",
    "compute_metrics",
]

log = logging.getLogger(__name__)

DUP_JITTER = 1e-6
FIT_ATTEMPTS = 3


class Strategy(str, enum.Enum):
    NSMA_X = "NSMA_X"
    NSMA_F = "NSMA_F"
    NSGA2_X = "NSGA2_X"
    NSGA2_F = "NSGA2_F"
    QEI = "QEI"
    QLCB = "QLCB"

    @property
    def is_moo(self) -> bool:
        return self in (Strategy.NSMA_X, Strategy.NSMA_F, Strategy.NSGA2_X, Strategy.NSGA2_F)


class ConfigError(ValueError):
    pass


class RunAborted(RuntimeError):
    """The GP could not be fitted; ``history`` holds what was evaluated."""

    def __init__(self, msg, history=None):
        super().__init__(msg)
        self.history = history


class BudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class StrategyParams:
    population: int = 100
    iters: int = 20
    n_opt: int = 5
    mc_samples: int = 512
    beta: float = math.sqrt(3.0)
    starts: int = 100
    maxiter: int = 100
    n_refine: int = 10
    moo_init: int = 100

    @classmethod
    def from_dict(cls, d: dict | None) -> "StrategyParams":
        d = dict(d or {})
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown strategy_params: {sorted(extra)}")
        return cls(**d)


@dataclass(frozen=True)
class ExperimentConfig:
    """One benchmark/strategy cell of the experiment grid.

    ``n_max = 0`` is accepted as a degenerate run with no BO iterations.
    """

    benchmark: str
    strategy: Strategy
    q: int = 3
    n_init: int = 10
    n_max: int = 60
    seeds: tuple = tuple(range(20))
    params: StrategyParams = field(default_factory=StrategyParams)
    name: str | None = None

    def __post_init__(self):
        try:
            object.__setattr__(self, "strategy", Strategy(self.strategy))
        except ValueError:
            raise ConfigError(f"unknown strategy {self.strategy!r}; "
                              f"choose from {[s.value for s in Strategy]}") from None
        if isinstance(self.params, dict):
            object.__setattr__(self, "params", StrategyParams.from_dict(self.params))
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        if self.q < 2:
            raise ConfigError("q must be >= 2")
        if self.n_init < 1:
            raise ConfigError("n_init must be >= 1")
        if self.n_max != 0 and self.n_max < self.q:
            raise ConfigError("n_max must be >= q (or 0)")
        get_benchmark(self.benchmark)  # raises BenchmarkError on a bad name
        if self.name is None:
            b = get_benchmark(self.benchmark)
            object.__setattr__(self, "name",
                               f"{b.key}-n{b.dimension}_{self.strategy.value}_q{self.q}")

    @property
    def bench(self) -> Benchmark:
        return get_benchmark(self.benchmark)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["strategy"] = self.strategy.value
        d["seeds"] = list(self.seeds)
        return d


class CountingEvaluator:
    """Wraps the true function, counting calls and enforcing the budget."""

    def __init__(self, bench: Benchmark, budget: int):
        self.bench = bench
        self.budget = budget
        self.count = 0

    def __call__(self, x) -> float:
        if self.count >= self.budget:
            raise BudgetExceeded(f"evaluation budget of {self.budget} exhausted")
        self.count += 1
        return float(self.bench(np.asarray(x, dtype=np.float64)))


@dataclass
class RunHistory:
    """Everything a run evaluated.

    ``f_best_trace[k]`` is the best value after the initial design plus
    ``k`` acquired points, ``k = 0..N_M``.
    """

    X: np.ndarray
    y: np.ndarray
    batch: np.ndarray
    n_init: int
    f_best_trace: np.ndarray
    wall_times: list
    n_evaluations: int

    @property
    def evaluations(self):
        return [(self.X[i], float(self.y[i]), int(self.batch[i])) for i in range(len(self.y))]

    @property
    def incumbent(self):
        i = int(np.argmin(self.y))
        return self.X[i].copy(), float(self.y[i])

    @property
    def acquired(self) -> np.ndarray:
        return self.X[self.n_init:]


@dataclass(frozen=True)
class MetricsReport:
    nr_trace: np.ndarray | None
    nr_auc: float | None
    d_omega_trace: np.ndarray
    final_best: float
    ci95: tuple | None = None


def _seed(seed: int, *key: int) -> int:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _jitter_duplicates(Z, history_Z, rng):
    """Perturb rows of ``Z`` that coincide with history or with each other."""
    Z = Z.copy()
    n_moved = 0
    for i in range(Z.shape[0]):
        others = np.vstack([history_Z, Z[:i]]) if i else history_Z
        for _ in range(100):
            if others.size == 0 or np.abs(others - Z[i]).max(axis=1).min() > DUP_TOL:
                break
            Z[i] = np.clip(Z[i] + rng.uniform(-DUP_JITTER, DUP_JITTER, Z.shape[1]), 0.0, 1.0)
            n_moved += 1
    if n_moved:
        log.info("jittered %d duplicate proposal coordinate(s) by up to %g of the range",
                 n_moved, DUP_JITTER)
    return Z


def dispatch_strategy(strategy, gp, domain: BoxDomain, q: int, seed,
                      params: StrategyParams = StrategyParams()) -> BatchProposal:
    """Ask one strategy for ``q`` new points in ``domain`` coordinates.

    Multi-objective strategies work on ``(mu, -var)`` in the unit cube and
    start from ``params.moo_init`` uniform points. The Monte Carlo
    strategies maximize q-EI or minimize q-LCB with a frozen Sobol base.
    Points coinciding with observed data are jittered.
    """
    strategy = Strategy(strategy)
    if q < 1:
        raise ValueError("q must be positive")
    rng = np.random.default_rng(seed)
    unit = BoxDomain.unit(domain.dim)
    if strategy.is_moo:
        obj = gp_biobjective(gp)
        init = rng.random((params.moo_init, domain.dim))
        if strategy in (Strategy.NSMA_X, Strategy.NSMA_F):
            pop = nsma_run(obj, N=params.population, iters=params.iters,
                           n_opt=params.n_opt, init=init, seed=rng)
        else:
            pop = nsga2_run(obj, N=params.population, iters=params.iters, init=init, seed=rng)
        if strategy in (Strategy.NSMA_X, Strategy.NSGA2_X):
            prop = select_batch_X(pop, q, seed=rng, domain=unit)
        else:
            prop = select_batch_F(pop, q, seed=rng, domain=unit)
        Z, centers, members, n_pad = prop.points, prop.centers, prop.member_indices, prop.n_padded
    else:
        base = sobol_normal(q, params.mc_samples, int(rng.integers(2**31)))
        if strategy is Strategy.QEI:
            acqf = MCAcquisition(gp, "qei", base, f_best=gp.f_best)
        else:
            acqf = MCAcquisition(gp, "qlcb", base, beta=params.beta)
        cand = optimize_acquisition(acqf, domain, q, starts=params.starts,
                                    maxiter=params.maxiter, seed=rng, n_refine=params.n_refine)
        Z = domain.to_unit(cand.points)
        centers, members, n_pad = Z.copy(), None, 0
    Z = _jitter_duplicates(np.clip(Z, 0.0, 1.0), gp.X_scaled, rng)
    return BatchProposal(domain.from_unit(Z), centers, members, n_pad)


def _fit(X, y, domain, seed, it):
    last = None
    for attempt in range(FIT_ATTEMPTS):
        try:
            return gpmod.fit(X, y, domain, seed=_seed(seed, 2, it, attempt))
        except gpmod.GPFitError as exc:
            last = exc
            log.warning("GP fit failed at iteration %d (attempt %d): %s", it, attempt + 1, exc)
    raise last


def run_bayesopt(cfg: ExperimentConfig, seed: int, evaluator=None) -> RunHistory:
    """Run one seeded batch BO experiment.

    The initial design depends only on ``(benchmark, seed)``, so all
    strategies start from the same points.

    Raises
    ------
    RunAborted
        If the GP cannot be fitted after retries. The partial history is
        attached.
    """
    bench = cfg.bench
    dom = bench.domain
    budget = cfg.n_init + cfg.n_max
    f = evaluator if evaluator is not None else CountingEvaluator(bench, budget)

    X0 = dom.lower + np.random.default_rng(_seed(seed, 0)).random((cfg.n_init, dom.dim)) * dom.width
    X = [x for x in X0]
    y = [f(x) for x in X0]
    batch = [0] * cfg.n_init
    wall = []

    def history():
        Xa = np.asarray(X)
        ya = np.asarray(y)
        best0 = ya[:cfg.n_init].min()
        trace = np.minimum.accumulate(np.concatenate([[best0], ya[cfg.n_init:]]))
        return RunHistory(Xa, ya, np.asarray(batch), cfg.n_init, trace, wall, len(ya))

    it = 0
    while len(y) < budget:
        it += 1
        t0 = time.perf_counter()
        try:
            model = _fit(np.asarray(X), np.asarray(y), dom, seed, it)
        except gpmod.GPFitError as exc:
            raise RunAborted(f"GP fit failed at iteration {it}: {exc}", history()) from exc
        prop = dispatch_strategy(cfg.strategy, model, dom, cfg.q, _seed(seed, 1, it), cfg.params)
        P = prop.points[:budget - len(y)]
        for x in P:
            X.append(np.array(x))
            y.append(f(x))
            batch.append(it)
        wall.append(time.perf_counter() - t0)
        log.debug("%s seed %d iter %d: best %.6g", cfg.name, seed, it, min(y))

    h = history()
    if isinstance(f, CountingEvaluator):
        assert f.count == budget, f"{f.count} evaluations for a budget of {budget}"
    return h


def compute_metrics(history: RunHistory, bench: Benchmark, q: int) -> MetricsReport:
    """Normalized regret, its AUC over batch knots, and the boundary trace.

    The regret terms are ``None`` when the benchmark has no catalogued
    optimum. ``d_omega_trace`` covers the acquired points only.
    """
    trace = history.f_best_trace
    nr = auc = None
    if bench.optimal_value is not None:
        nr = np.clip(normalized_regret(trace, bench.optimal_value), 0.0, None)
        n_max = trace.size - 1
        auc = _nr_auc(nr, batch_knots(n_max, q)) if n_max > 0 else 0.0
    d = boundary_distance_trace(history.acquired, bench.domain)
    return MetricsReport(nr, auc, d, float(trace[-1]))
