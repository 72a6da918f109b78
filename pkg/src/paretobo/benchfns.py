"""Noise-free global-optimization test functions.

Every function is addressable as ``"<name>:<dim>"`` (e.g. ``"rastrigin:50"``);
names are case-insensitive and ignore underscores, so ``"Levy_8:100"`` and
``"levy8:100"`` are the same benchmark.

Optimal values are catalogued only for the dimensions listed in
``CATALOGUE``; scalable functions can still be built and evaluated at any
dimension.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "BoxDomain",
    "Benchmark",
    "BenchmarkError",
    "evaluate",
    "known_optimum",
    "known_minimizer",
    "sample_uniform",
    "get_benchmark",
    "list_benchmarks",
    "CATALOGUE",
]


class BenchmarkError(ValueError):
    """Bad benchmark name, dimension, or input point."""


@dataclass(frozen=True, eq=False)
class BoxDomain:
    lower: np.ndarray
    upper: np.ndarray

    def __eq__(self, other):
        if not isinstance(other, BoxDomain):
            return NotImplemented
        return bool(np.array_equal(self.lower, other.lower) and np.array_equal(self.upper, other.upper))

    def __hash__(self):
        return hash((self.lower.tobytes(), self.upper.tobytes()))

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lower, dtype=np.float64)).copy()
        hi = np.atleast_1d(np.asarray(self.upper, dtype=np.float64)).copy()
        if lo.ndim != 1 or lo.shape != hi.shape or lo.size < 1:
            raise ValueError("lower and upper must be 1-D vectors of equal length >= 1")
        if not np.all(lo < hi):
            raise ValueError("lower[i] < upper[i] must hold for all i")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self) -> int:
        return self.lower.size

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower

    @classmethod
    def unit(cls, n: int) -> "BoxDomain":
        return cls(np.zeros(n), np.ones(n))

    def contains(self, x, rtol: float = 1e-12) -> bool:
        x = np.asarray(x, dtype=np.float64)
        slack = rtol * self.width
        return bool(np.all(x >= self.lower - slack) and np.all(x <= self.upper + slack))

    def clip(self, x):
        return np.clip(x, self.lower, self.upper)

    def to_unit(self, x):
        return (np.asarray(x, dtype=np.float64) - self.lower) / self.width

    def from_unit(self, z):
        # clip guards against one-ulp overshoot of the affine map
        return np.clip(self.lower + np.asarray(z, dtype=np.float64) * self.width,
                       self.lower, self.upper)


# ---------------------------------------------------------------------------
# formulas
#
# Sources, one per function family:
#   rastrigin       Torn & Zilinskas (1989)
#   hartmann 3/6    Hartman (1973); constants as tabulated by Dixon & Szego
#   rosenbrock      Rosenbrock (1960), chained form
#   ackley          Back (1993); a=20, b=0.2, c=2*pi
#   alpine 1        Rahnamayan et al. (2007)
#   branin          Branin (1972); a=1, b=5.1/(4 pi^2), c=5/pi, r=6, s=10, t=1/(8 pi)
#   schwefel        Schwefel (1981), shifted so that f* = 0
#   levy            Levy & Montalvo (1985) form with w = 1 + (x - 1)/4
#   michalewicz     Molga & Smutnicki (2005); steepness m = 10
#   six-hump camel  Branin (1972)
#   bukin 6         Bukin (1997)
#   styblinski-tang Styblinski & Tang (1990)
#   holder table 2, egg holder  Jamil & Yang (2013) survey
#   shekel m=10     Opacic (1973); Dixon & Szego constants


def _rastrigin(x):
    return 10.0 * x.size + float(np.sum(x * x - 10.0 * np.cos(2.0 * np.pi * x)))


_H3_ALPHA = np.array([1.0, 1.2, 3.0, 3.2])
_H3_A = np.array([[3.0, 10.0, 30.0], [0.1, 10.0, 35.0], [3.0, 10.0, 30.0], [0.1, 10.0, 35.0]])
_H3_P = 1e-4 * np.array([[3689, 1170, 2673], [4699, 4387, 7470],
                         [1091, 8732, 5547], [381, 5743, 8828]], dtype=float)
_H6_A = np.array([[10.0, 3.0, 17.0, 3.5, 1.7, 8.0],
                  [0.05, 10.0, 17.0, 0.1, 8.0, 14.0],
                  [3.0, 3.5, 1.7, 10.0, 17.0, 8.0],
                  [17.0, 8.0, 0.05, 10.0, 0.1, 14.0]])
_H6_P = 1e-4 * np.array([[1312, 1696, 5569, 124, 8283, 5886],
                         [2329, 4135, 8307, 3736, 1004, 9991],
                         [2348, 1451, 3522, 2883, 3047, 6650],
                         [4047, 8828, 8732, 5743, 1091, 381]], dtype=float)


def _hartmann(x):
    if x.size == 3:
        A, P = _H3_A, _H3_P
    elif x.size == 6:
        A, P = _H6_A, _H6_P
    else:
        raise BenchmarkError("hartmann is defined for n in {3, 6}")
    inner = np.sum(A * (x[None, :] - P) ** 2, axis=1)
    return -float(np.sum(_H3_ALPHA * np.exp(-inner)))


def _rosenbrock(x):
    return float(np.sum(100.0 * (x[1:] - x[:-1] ** 2) ** 2 + (x[:-1] - 1.0) ** 2))


def _ackley(x):
    n = x.size
    a = -20.0 * math.exp(-0.2 * math.sqrt(float(np.sum(x * x)) / n))
    b = -math.exp(float(np.sum(np.cos(2.0 * np.pi * x))) / n)
    return a + b + 20.0 + math.e


def _alpine1(x):
    return float(np.sum(np.abs(x * np.sin(x) + 0.1 * x)))


def _branin(x):
    x1, x2 = x
    b = 5.1 / (4.0 * np.pi ** 2)
    c = 5.0 / np.pi
    t = 1.0 / (8.0 * np.pi)
    return float((x2 - b * x1 ** 2 + c * x1 - 6.0) ** 2 + 10.0 * (1.0 - t) * np.cos(x1) + 10.0)


# 418.9829 is the usual rounded constant; the exact per-coordinate maximum of
# x*sin(sqrt|x|) on [-500, 500] is needed for f* = 0 at n = 100 within 1e-4
_SCHWEFEL_C = 418.98288727243374


def _schwefel(x):
    return _SCHWEFEL_C * x.size - float(np.sum(x * np.sin(np.sqrt(np.abs(x)))))


def _levy(x):
    w = 1.0 + (x - 1.0) / 4.0
    head = np.sin(np.pi * w[0]) ** 2
    mid = np.sum((w[:-1] - 1.0) ** 2 * (1.0 + 10.0 * np.sin(np.pi * w[:-1] + 1.0) ** 2))
    tail = (w[-1] - 1.0) ** 2 * (1.0 + np.sin(2.0 * np.pi * w[-1]) ** 2)
    return float(head + mid + tail)


def _michalewicz(x, m=10):
    i = np.arange(1, x.size + 1)
    return -float(np.sum(np.sin(x) * np.sin(i * x * x / np.pi) ** (2 * m)))


def _sixhump(x):
    x1, x2 = x
    return float((4.0 - 2.1 * x1 ** 2 + x1 ** 4 / 3.0) * x1 ** 2 + x1 * x2
                 + (-4.0 + 4.0 * x2 ** 2) * x2 ** 2)


def _bukin6(x):
    x1, x2 = x
    return float(100.0 * math.sqrt(abs(x2 - 0.01 * x1 ** 2)) + 0.01 * abs(x1 + 10.0))


def _styblinski_tang(x):
    return 0.5 * float(np.sum(x ** 4 - 16.0 * x ** 2 + 5.0 * x))


def _holder_table(x):
    x1, x2 = x
    return -abs(math.sin(x1) * math.cos(x2)
                * math.exp(abs(1.0 - math.sqrt(x1 * x1 + x2 * x2) / math.pi)))


def _eggholder(x):
    x1, x2 = x
    return float(-(x2 + 47.0) * math.sin(math.sqrt(abs(x2 + x1 / 2.0 + 47.0)))
                 - x1 * math.sin(math.sqrt(abs(x1 - (x2 + 47.0)))))


_SHEKEL_BETA = 0.1 * np.array([1, 2, 2, 4, 4, 6, 3, 7, 5, 5], dtype=float)
_SHEKEL_C = np.array([[4, 1, 8, 6, 3, 2, 5, 8, 6, 7],
                      [4, 1, 8, 6, 7, 9, 3, 1, 2, 3.6],
                      [4, 1, 8, 6, 3, 2, 5, 8, 6, 7],
                      [4, 1, 8, 6, 7, 9, 3, 1, 2, 3.6]], dtype=float)


def _shekel(x):
    d2 = np.sum((x[:, None] - _SHEKEL_C) ** 2, axis=0)
    return -float(np.sum(1.0 / (d2 + _SHEKEL_BETA)))


def _michalewicz_minimizer(n, m=10):
    # separable: minimize each coordinate term on a fine grid, then polish
    from scipy.optimize import minimize_scalar

    grid = np.linspace(0.0, np.pi, 200001)
    xs = np.empty(n)
    for i in range(1, n + 1):
        g = -np.sin(grid) * np.sin(i * grid * grid / np.pi) ** (2 * m)
        j = int(np.argmin(g))
        lo, hi = grid[max(j - 1, 0)], grid[min(j + 1, grid.size - 1)]
        res = minimize_scalar(lambda t: -np.sin(t) * np.sin(i * t * t / np.pi) ** (2 * m),
                              bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-12})
        xs[i - 1] = res.x if res.fun <= g[j] else grid[j]
    return xs


@dataclass(frozen=True)
class _Entry:
    display: str
    func: Callable[[np.ndarray], float]
    bounds: Callable[[int], tuple]
    optima: dict | None  # dim -> f*; None means a function of n
    optimum_fn: Callable[[int], float] | None
    minimizer: Callable[[int], np.ndarray]
    at_origin: bool
    dims: tuple | None  # fixed dimensions; None means scalable
    min_dim: int = 1


def _const(lo, hi):
    return lambda n: (np.full(n, lo, dtype=float), np.full(n, hi, dtype=float))


_SCALABLE = (2, 4, 10, 20, 50, 100)

CATALOGUE = {
    "rastrigin": _Entry("Rastrigin", _rastrigin, _const(-5.12, 5.12),
                        {n: 0.0 for n in _SCALABLE}, None, np.zeros, True, None),
    "hartmann": _Entry("Hartmann", _hartmann, _const(0.0, 1.0),
                       {3: -3.86278, 6: -3.32237}, None,
                       lambda n: (np.array([0.114614, 0.555649, 0.852547]) if n == 3 else
                                  np.array([0.20169, 0.150011, 0.476874,
                                            0.275332, 0.311652, 0.6573])),
                       False, (3, 6)),
    "rosenbrock": _Entry("Rosenbrock", _rosenbrock, _const(-5.0, 10.0),
                         {n: 0.0 for n in _SCALABLE}, None, np.ones, False, None, min_dim=2),
    "ackley1": _Entry("Ackley_1", _ackley, _const(-32.768, 32.768),
                      {n: 0.0 for n in _SCALABLE}, None, np.zeros, True, None),
    "alpine1": _Entry("Alpine_1", _alpine1, _const(-10.0, 10.0),
                      {n: 0.0 for n in _SCALABLE}, None, np.zeros, True, None),
    "branin": _Entry("Branin", _branin,
                     lambda n: (np.array([-5.0, 0.0]), np.array([10.0, 15.0])),
                     {2: 0.397887}, None, lambda n: np.array([-np.pi, 12.275]), False, (2,)),
    "schwefel": _Entry("Schwefel", _schwefel, _const(-500.0, 500.0),
                       {n: 0.0 for n in _SCALABLE}, None,
                       lambda n: np.full(n, 420.9687463), False, None),
    "levy8": _Entry("Levy_8", _levy, _const(-10.0, 10.0),
                    {n: 0.0 for n in _SCALABLE}, None, np.ones, False, None),
    "michalewicz": _Entry("Michalewicz", _michalewicz, _const(0.0, np.pi),
                          {2: -1.80130341, 5: -4.687658, 10: -9.66015}, None,
                          _michalewicz_minimizer, False, None),
    "sixhumpcamel": _Entry("SixHumpCamel", _sixhump,
                           lambda n: (np.array([-3.0, -2.0]), np.array([3.0, 2.0])),
                           {2: -1.0316}, None, lambda n: np.array([0.0898, -0.7126]),
                           False, (2,)),
    "bukin6": _Entry("Bukin_6", _bukin6,
                     lambda n: (np.array([-15.0, -3.0]), np.array([-5.0, 3.0])),
                     {2: 0.0}, None, lambda n: np.array([-10.0, 1.0]), False, (2,)),
    "styblinskitang": _Entry("StyblinskiTang", _styblinski_tang, _const(-5.0, 5.0),
                             None, lambda n: -39.166166 * n,
                             lambda n: np.full(n, -2.903534), False, None),
    "holdertable2": _Entry("HolderTable_2", _holder_table, _const(-10.0, 10.0),
                           {2: -19.2085}, None, lambda n: np.array([8.05502, 9.66459]),
                           False, (2,)),
    "eggholder": _Entry("EggHolder", _eggholder, _const(-512.0, 512.0),
                        {2: -959.6407}, None, lambda n: np.array([512.0, 404.2319]),
                        False, (2,)),
    "shekel": _Entry("Shekel", _shekel, _const(0.0, 10.0),
                     {4: -10.5363}, None, lambda n: np.full(4, 4.0), False, (4,)),
}


def _key(name: str) -> str:
    return name.lower().replace("_", "").replace("-", "").replace(" ", "")


@dataclass(frozen=True)
class Benchmark:
    name: str
    dimension: int
    domain: BoxDomain
    optimal_value: float | None
    optimum_at_origin: bool
    key: str = field(repr=False, default="")

    @property
    def spec(self) -> str:
        return f"{self.key}:{self.dimension}"

    def __call__(self, x) -> float:
        return evaluate(self, x)


def get_benchmark(name: str, dimension: int | None = None) -> Benchmark:
    """Build a benchmark from ``"name:dim"`` or ``(name, dim)``."""
    if dimension is None:
        if ":" in name:
            name, dim_s = name.split(":", 1)
            try:
                dimension = int(dim_s)
            except ValueError:
                raise BenchmarkError(f"bad dimension in benchmark name {dim_s!r}") from None
    key = _key(name)
    if key not in CATALOGUE:
        raise BenchmarkError(f"unknown benchmark {name!r}; known: {', '.join(sorted(CATALOGUE))}")
    entry = CATALOGUE[key]
    if dimension is None:
        if entry.dims is None:
            raise BenchmarkError(f"{entry.display} is scalable; give a dimension")
        dimension = entry.dims[0]
    dimension = int(dimension)
    if entry.dims is not None and dimension not in entry.dims:
        raise BenchmarkError(f"{entry.display} is defined for n in {entry.dims}, got {dimension}")
    if dimension < entry.min_dim:
        raise BenchmarkError(f"{entry.display} needs n >= {entry.min_dim}")
    lo, hi = entry.bounds(dimension)
    if entry.optimum_fn is not None:
        fstar = float(entry.optimum_fn(dimension)) if dimension in _SCALABLE else None
    else:
        fstar = entry.optima.get(dimension)
    return Benchmark(entry.display, dimension, BoxDomain(lo, hi), fstar, entry.at_origin, key)


def list_benchmarks():
    """(key, display name, catalogued dimensions, bounds description) rows."""
    rows = []
    for key, e in CATALOGUE.items():
        if e.optima is not None:
            dims = tuple(sorted(e.optima))
        else:
            dims = _SCALABLE
        lo, hi = e.bounds(dims[0])
        if np.all(lo == lo[0]) and np.all(hi == hi[0]):
            b = f"[{lo[0]:g}, {hi[0]:g}]^n"
        else:
            b = " x ".join(f"[{a:g}, {c:g}]" for a, c in zip(lo, hi))
        rows.append((key, e.display, dims, b))
    return rows


def evaluate(bench: Benchmark, x) -> float:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.size != bench.dimension:
        raise BenchmarkError(f"{bench.name} expects a vector of length {bench.dimension}, "
                             f"got shape {x.shape}")
    if not bench.domain.contains(x):
        raise BenchmarkError(f"point outside the domain of {bench.name}")
    return float(CATALOGUE[bench.key].func(x))


def known_optimum(bench: Benchmark) -> float:
    if bench.optimal_value is None:
        raise LookupError(f"no catalogued optimum for {bench.name} at n={bench.dimension}")
    return bench.optimal_value


def known_minimizer(bench: Benchmark) -> np.ndarray:
    """A published global minimizer (or, for Michalewicz, a computed one)."""
    return np.asarray(CATALOGUE[bench.key].minimizer(bench.dimension), dtype=np.float64)


def sample_uniform(domain: BoxDomain, count: int, seed) -> np.ndarray:
    """``count`` i.i.d. uniform points in the closed box, shape (count, n)."""
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    u = rng.random((count, domain.dim))
    return domain.lower + u * domain.width
