import numpy as np
import pytest

from paretobo.benchfns import (CATALOGUE, BenchmarkError, BoxDomain, evaluate, get_benchmark,
                               known_minimizer, known_optimum, list_benchmarks, sample_uniform)

# catalogued f* values
TABLE_OPTIMA = [
    ("rastrigin", 2, 0.0), ("rastrigin", 100, 0.0),
    ("hartmann", 3, -3.86278), ("hartmann", 6, -3.32237),
    ("rosenbrock", 4, 0.0), ("ackley1", 10, 0.0), ("alpine1", 50, 0.0),
    ("branin", 2, 0.397887), ("schwefel", 20, 0.0), ("levy8", 100, 0.0),
    ("michalewicz", 2, -1.80130341), ("michalewicz", 5, -4.687658), ("michalewicz", 10, -9.66015),
    ("sixhumpcamel", 2, -1.0316), ("bukin6", 2, 0.0), ("styblinskitang", 2, -78.332332),
    ("holdertable2", 2, -19.2085), ("eggholder", 2, -959.6407), ("shekel", 4, -10.5363),
]


class TestBoxDomain:
    def test_rejects_inverted_bounds(self):
        with pytest.raises(ValueError):
            BoxDomain(np.array([0.0, 1.0]), np.array([1.0, 1.0]))

    def test_unit_roundtrip(self, rng):
        dom = BoxDomain(np.array([-5.0, 0.0]), np.array([10.0, 15.0]))
        x = dom.lower + rng.random((20, 2)) * dom.width
        np.testing.assert_allclose(dom.from_unit(dom.to_unit(x)), x, atol=1e-12)

    def test_contains_closed_box(self):
        dom = BoxDomain.unit(2)
        assert dom.contains([0.0, 1.0])
        assert not dom.contains([0.0, 1.1])


class TestEvaluate:
    def test_rastrigin_origin(self):
        assert evaluate(get_benchmark("rastrigin:2"), np.zeros(2)) == 0.0

    def test_ackley_origin(self):
        assert abs(evaluate(get_benchmark("ackley1", 10), np.zeros(10))) < 1e-12

    def test_rosenbrock_ones(self):
        assert evaluate(get_benchmark("rosenbrock:4"), np.ones(4)) == 0.0

    def test_rosenbrock_independent_formula(self, rng):
        b = get_benchmark("rosenbrock:4")
        x = rng.uniform(-5, 10, 4)
        ref = sum(100 * (x[i + 1] - x[i] ** 2) ** 2 + (1 - x[i]) ** 2 for i in range(3))
        assert evaluate(b, x) == pytest.approx(ref, rel=1e-14)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            evaluate(get_benchmark("rastrigin:2"), np.zeros(3))

    def test_outside_box(self):
        with pytest.raises(ValueError):
            evaluate(get_benchmark("rastrigin:2"), np.array([6.0, 0.0]))

    def test_pure(self, rng):
        b = get_benchmark("levy8:10")
        x = b.domain.lower + rng.random(10) * b.domain.width
        assert evaluate(b, x) == evaluate(b, x.copy())

    @pytest.mark.parametrize("key", sorted(CATALOGUE))
    def test_finite_in_box(self, key, rng):
        b = get_benchmark(key, list_dims(key)[0])
        for _ in range(20):
            assert np.isfinite(b(b.domain.lower + rng.random(b.dimension) * b.domain.width))


def list_dims(key):
    return next(r[2] for r in list_benchmarks() if r[0] == key)


class TestKnownOptimum:
    @pytest.mark.parametrize("key,n,fstar", TABLE_OPTIMA)
    def test_table_values(self, key, n, fstar):
        assert known_optimum(get_benchmark(key, n)) == pytest.approx(fstar, abs=1e-12)

    @pytest.mark.parametrize("key,n,fstar", TABLE_OPTIMA)
    def test_value_at_minimizer(self, key, n, fstar):
        b = get_benchmark(key, n)
        assert abs(b(known_minimizer(b)) - fstar) <= 1e-4

    def test_uncatalogued_dimension(self):
        with pytest.raises(LookupError):
            known_optimum(get_benchmark("michalewicz", 3))

    def test_scalable_accepts_any_n(self):
        assert get_benchmark("rastrigin:7").dimension == 7

    def test_name_forms(self):
        assert get_benchmark("Levy_8:4") == get_benchmark("levy8", 4)

    def test_unknown_name(self):
        with pytest.raises(BenchmarkError):
            get_benchmark("nosuch:2")


class TestSampleUniform:
    def test_single_point_in_box(self):
        dom = BoxDomain.unit(2)
        P = sample_uniform(dom, 1, seed=0)
        assert P.shape == (1, 2) and dom.contains(P[0])

    def test_deterministic(self):
        dom = BoxDomain.unit(3)
        np.testing.assert_array_equal(sample_uniform(dom, 5, 7), sample_uniform(dom, 5, 7))

    def test_mean(self):
        dom = BoxDomain(np.array([-1.0]), np.array([1.0]))
        assert abs(sample_uniform(dom, 1000, 0).mean()) < 0.1
