import numpy as np
import pytest
from scipy.optimize import linprog

from paretobo.benchfns import BoxDomain
from paretobo.moo import (BiObjective, LPError, armijo_line_search, crossover, crowding_distance,
                          dominates, get_parents, gp_biobjective, hypervolume_2d,
                          is_pareto_stationary, make_population, mutation, nondominated_sort,
                          nsga2_run, nsma_run, optimize_population, partial_descent_direction,
                          selection, solve_lp)
from paretobo.moo import descent
from paretobo.moo.descent import ARMIJO_GAMMA

from conftest import make_gp
from oracles import (brute_force_ranks, feasible_bounds, quadratic_biobjective, theta_exact,
                     theta_grid)


class _FixedDraws:
    """Stand-in generator whose ``integers`` returns preset tournament draws."""

    def __init__(self, draws):
        self.draws = np.asarray(draws)

    def integers(self, low, high, size):
        return self.draws.reshape(size)


def _constant_objective(g1, g2, n):
    g1, g2 = np.asarray(g1, float), np.asarray(g2, float)
    return BiObjective(lambda X: np.column_stack([np.atleast_2d(X) @ g1, np.atleast_2d(X) @ g2]),
                       lambda x: np.vstack([g1, g2]), BoxDomain.unit(n))


class TestDominates:
    def test_strict(self):
        assert dominates((1, 2), (2, 3))

    def test_equal(self):
        assert not dominates((1, 2), (1, 2))

    def test_incomparable(self):
        assert not dominates((1, 3), (2, 2))
        assert not dominates((2, 2), (1, 3))

    def test_weak_in_one_component(self):
        assert dominates((1, 2), (1, 3))


class TestNondominatedSort:
    def test_incomparable_all_rank_zero(self):
        F = np.column_stack([np.arange(5), -np.arange(5)])
        assert nondominated_sort(F).tolist() == [0] * 5

    def test_chain(self):
        assert nondominated_sort([[2, 2], [0, 0], [1, 1]]).tolist() == [2, 0, 1]

    @pytest.mark.parametrize("seed", range(10))
    def test_brute_force(self, seed):
        r = np.random.default_rng(seed)
        F = r.random((64, 2)) if seed % 2 else r.integers(0, 6, (64, 2)).astype(float)
        np.testing.assert_array_equal(nondominated_sort(F), brute_force_ranks(F))

    def test_empty_raises(self):
        with pytest.raises(ValueError):
            nondominated_sort(np.zeros((0, 2)))


class TestCrowdingDistance:
    def test_two_points(self):
        assert np.all(np.isinf(crowding_distance([[0, 1], [1, 0]])))

    def test_collinear_equally_spaced(self):
        c = crowding_distance([[0, 2], [1, 1], [2, 0]])
        assert c[1] == pytest.approx(2.0)
        assert np.isinf(c[0]) and np.isinf(c[2])

    def test_duplicates_finite_and_stable(self):
        F = [[0, 2], [1, 1], [1, 1], [2, 0]]
        c = crowding_distance(F)
        np.testing.assert_allclose(c[1:3], [1.0, 1.0])
        np.testing.assert_array_equal(c, crowding_distance(F))

    def test_constant_objective_contributes_nothing(self):
        c = crowding_distance([[0, 5], [1, 5], [3, 5]])
        # f1 neighbours of the middle point span 3 of a range of 3
        assert c[1] == pytest.approx(1.0)


class TestGetParents:
    def test_lower_rank_wins(self):
        pop = make_population(np.zeros((2, 1)), [[0, 0], [1, 1]])
        rng = _FixedDraws([[0, 1], [1, 0]])
        assert get_parents(pop, rng).tolist() == [[0, 0]]

    def test_infinite_crowding_wins(self):
        pop = make_population(np.zeros((3, 1)), [[0, 2], [1, 1], [2, 0]])
        rng = _FixedDraws([[1, 0], [1, 2]])
        assert get_parents(pop, rng).tolist() == [[0, 2]]

    def test_pair_count_and_reproducible(self):
        r = np.random.default_rng(0)
        pop = make_population(r.random((11, 2)), r.random((11, 2)))
        a = get_parents(pop, np.random.default_rng(5))
        b = get_parents(pop, np.random.default_rng(5))
        assert a.shape == (5, 2)
        np.testing.assert_array_equal(a, b)


class TestCrossover:
    def test_identical_parents(self, rng):
        P = rng.random((20, 3))
        np.testing.assert_array_equal(crossover(P, P, BoxDomain.unit(3), rng), np.vstack([P, P]))

    def test_children_in_box(self, rng):
        dom = BoxDomain(np.array([-1.0, 2.0]), np.array([0.0, 5.0]))
        P1 = dom.lower + rng.random((10 ** 4, 2)) * dom.width
        P2 = dom.lower + rng.random((10 ** 4, 2)) * dom.width
        C = crossover(P1, P2, dom, rng, prob=1.0)
        assert np.all(C >= dom.lower) and np.all(C <= dom.upper)

    def test_index_concentrates_children(self):
        dom = BoxDomain.unit(2)
        r = np.random.default_rng(0)
        P1, P2 = 0.4 + 0.2 * r.random((5000, 2)), 0.4 + 0.2 * r.random((5000, 2))
        spread = []
        for eta in (2, 20, 200):
            C = crossover(P1, P2, dom, np.random.default_rng(1), prob=1.0, eta=eta)
            spread.append(np.abs(C - np.vstack([P1, P2])).mean())
        assert spread[0] > spread[1] > spread[2]


class TestMutation:
    def test_zero_probability_is_identity(self, rng):
        X = rng.random((50, 4))
        np.testing.assert_array_equal(mutation(X, BoxDomain.unit(4), rng, prob=0.0), X)

    def test_in_box(self, rng):
        dom = BoxDomain(np.full(3, -2.0), np.full(3, 1.0))
        X = dom.lower + rng.random((5000, 3)) * dom.width
        M = mutation(X, dom, rng, prob=1.0)
        assert np.all(M >= dom.lower) and np.all(M <= dom.upper)

    def test_flip_rate(self, rng):
        n, m = 100, 1000
        X = np.full((m, n), 0.5)
        flips = int((mutation(X, BoxDomain.unit(n), rng) != X).sum())
        p = 1.0 / n
        sd = np.sqrt(m * n * p * (1 - p))
        assert abs(flips - m * n * p) <= 3 * sd


class TestSelection:
    def test_identity_at_size(self, rng):
        pop = make_population(rng.random((10, 2)), rng.random((10, 2)))
        out = selection(pop, 10)
        np.testing.assert_array_equal(out.X, pop.X)
        np.testing.assert_array_equal(out.rank, pop.rank)

    def test_chain_keeps_best(self):
        X = np.arange(20.0)[:, None]
        pop = make_population(X, np.column_stack([X[:, 0], X[:, 0]]))
        out = selection(pop, 10)
        assert sorted(out.X[:, 0]) == list(range(10))

    @pytest.mark.parametrize("seed", range(5))
    def test_sort_oracle(self, seed):
        r = np.random.default_rng(seed)
        pop = make_population(r.random((40, 2)), r.random((40, 2)))
        order = sorted(range(40), key=lambda i: (pop.rank[i], -pop.crowding[i]))[:20]
        np.testing.assert_array_equal(selection(pop, 20).X, pop.X[order])

    def test_shrunken_population(self, rng, caplog):
        pop = make_population(rng.random((5, 2)), rng.random((5, 2)))
        with caplog.at_level("INFO"):
            assert len(selection(pop, 8)) == 5
        assert "only 5 points" in caplog.text


class TestPartialDescentDirection:
    def test_single_interior(self):
        g = np.array([0.5, -2.0, 1.0])
        dr = partial_descent_direction([g], np.full(3, 0.5), BoxDomain.unit(3))
        assert dr.theta == pytest.approx(-np.abs(g).sum())
        np.testing.assert_allclose(dr.d, -np.sign(g))

    def test_active_lower_bound_blocks_descent(self):
        # at x_0 = lower, decreasing along g_0 > 0 would need d_0 < 0
        g = np.array([1.0, -1.0])
        dr = partial_descent_direction([g], np.array([0.0, 0.5]), BoxDomain.unit(2))
        assert dr.d[0] == 0.0
        assert dr.theta == pytest.approx(-1.0)

    def test_active_upper_bound_blocks_descent(self):
        g = np.array([-1.0, 0.0])
        dr = partial_descent_direction([g], np.array([1.0, 0.5]), BoxDomain.unit(2))
        assert dr.theta == 0.0 and np.all(dr.d == 0)

    def test_zero_gradient(self):
        dr = partial_descent_direction(np.zeros((2, 3)), np.full(3, 0.5), BoxDomain.unit(3))
        assert dr.theta == 0.0

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_grid_oracle(self, n):
        r = np.random.default_rng(n)
        dom = BoxDomain.unit(n)
        for trial in range(20):
            G = r.normal(size=(2, n))
            x = r.random(n)
            if trial % 2:  # put some coordinates on a bound
                x[r.random(n) < 0.5] = r.choice([0.0, 1.0])
            lo, hi = feasible_bounds(x, dom)
            dr = partial_descent_direction(G, x, dom)
            assert dr.theta <= 0.0
            assert dr.theta <= theta_grid(G, lo, hi) + 1e-6
            assert abs(dr.theta - theta_exact(G, lo, hi)) <= 1e-6
            assert np.abs(dr.d).max() <= 1.0 + 1e-12
            assert np.all(dr.d >= lo - 1e-12) and np.all(dr.d <= hi + 1e-12)
            assert abs((G @ dr.d).max() - dr.theta) <= 1e-8 or dr.theta == 0.0


class TestArmijo:
    def test_hand_quadratic(self):
        dom = BoxDomain(np.array([-2.0]), np.array([2.0]))
        f = lambda X: np.column_stack([(np.atleast_2d(X) ** 2).sum(1)] * 2)
        obj = BiObjective(f, lambda x: np.vstack([2 * x, 2 * x]), dom)
        t, xn, fn = armijo_line_search(obj, np.array([1.0]), np.array([-1.0]), -2.0, [0])
        assert t == 1.0 and xn[0] == 0.0 and fn[0] == 0.0

    def test_rejects_nonnegative_theta(self):
        obj, _ = quadratic_biobjective()
        with pytest.raises(ValueError):
            armijo_line_search(obj, np.full(2, 0.5), np.zeros(2), 0.0, [0])

    def test_no_acceptable_step(self):
        obj = _constant_objective([1.0, 0.0], [0.0, 1.0], 2)
        # an ascent direction with a (false) negative theta never satisfies the test
        t, xn, _ = armijo_line_search(obj, np.full(2, 0.5), np.array([1.0, 0.0]), -1.0, [0])
        assert t == 0.0
        np.testing.assert_array_equal(xn, np.full(2, 0.5))

    def test_sufficient_decrease_holds(self, rng):
        obj, _ = quadratic_biobjective(3)
        for _ in range(50):
            x = rng.random(3)
            J = obj.gradients(x)
            for I in ((0, 1), (0,), (1,)):
                dr = partial_descent_direction(J[list(I)], x, obj.domain)
                if dr.theta < -1e-6:
                    t, xn, _ = armijo_line_search(obj, x, dr.d, dr.theta, I)
                    assert t > 0 and obj.domain.contains(xn)
                    fx, fn = obj(x)[0], obj(xn)[0]
                    assert np.all(fn[list(I)] <= fx[list(I)] + ARMIJO_GAMMA * t * dr.theta + 1e-15)


class TestOptimizePopulation:
    def test_stationary_noop(self):
        c = np.full(2, 0.3)
        ev = lambda X: np.column_stack([((np.atleast_2d(X) - c) ** 2).sum(1)] * 2)
        obj = BiObjective(ev, lambda x: np.vstack([2 * (x - c)] * 2), BoxDomain.unit(2))
        pop = make_population(c[None, :], obj(c))
        assert optimize_population(obj, pop) is pop

    def test_single_point_improves(self):
        obj, _ = quadratic_biobjective()
        x = np.array([[0.9, 0.1]])
        pop = make_population(x, obj(x))
        out = optimize_population(obj, pop)
        assert len(out) == 4  # one step per subset
        np.testing.assert_array_equal(out.X[0], x[0])
        f0 = pop.F[0]
        new = out.F[1:]
        assert np.all(new[0] <= f0)  # I = {1, 2} improves both
        assert new[1][0] < f0[0] and new[2][1] < f0[1]

    def test_gp_surface_armijo_recheck(self, monkeypatch):
        m = make_gp(3, 12, seed=8)
        obj = gp_biobjective(m)
        calls = []
        orig = descent.armijo_line_search

        def spy(obj_, x, d, theta, I, fx=None):
            res = orig(obj_, x, d, theta, I, fx)
            calls.append((x.copy(), theta, list(I), res))
            return res

        monkeypatch.setattr(descent, "armijo_line_search", spy)
        r = np.random.default_rng(0)
        Z = r.random((40, 3))
        pop = make_population(Z, obj(Z))
        out = optimize_population(obj, pop)
        accepted = [c for c in calls if c[3][0] > 0]
        assert accepted and len(out) == 40 + len(accepted)
        for x, theta, I, (t, xn, _) in accepted:
            fx, fn = obj(x)[0], obj(xn)[0]
            assert np.all(fn[I] <= fx[I] + ARMIJO_GAMMA * t * theta + 1e-12)
            assert obj.domain.contains(xn)

    def test_gp_biobjective_gradients(self):
        m = make_gp(2, 8, seed=4)
        obj = gp_biobjective(m)
        z = np.array([0.37, 0.61])
        J = obj.gradients(z)
        h = 1e-6
        for i in range(2):
            e = np.zeros(2)
            e[i] = h
            fd = (obj(z + e)[0] - obj(z - e)[0]) / (2 * h)
            np.testing.assert_allclose(J[:, i], fd, rtol=1e-4, atol=1e-7)


class TestSolvers:
    def test_iters_zero_is_selection(self, rng):
        obj, _ = quadratic_biobjective()
        init = rng.random((150, 2))
        ref = selection(make_population(init, obj(init)), 100)
        for run in (nsma_run, nsga2_run):
            np.testing.assert_array_equal(run(obj, iters=0, init=init, seed=0).X, ref.X)

    @pytest.mark.parametrize("run", [nsma_run, nsga2_run])
    def test_deterministic(self, run):
        obj, _ = quadratic_biobjective()
        init = np.random.default_rng(3).random((100, 2))
        a = run(obj, iters=6, init=init, seed=7)
        b = run(obj, iters=6, init=init, seed=7)
        np.testing.assert_array_equal(a.X, b.X)
        np.testing.assert_array_equal(a.F, b.F)

    def test_final_front_and_box(self):
        obj, _ = quadratic_biobjective(3)
        pop = nsma_run(obj, N=50, iters=10, init=np.random.default_rng(1).random((30, 3)), seed=1)
        assert len(pop) == 50
        assert np.all(pop.X >= 0) and np.all(pop.X <= 1)
        front = pop.F[pop.front(0)]
        assert np.all(brute_force_ranks(front) == 0)

    def test_padding_logged(self, caplog):
        obj, _ = quadratic_biobjective()
        with caplog.at_level("INFO"):
            pop = nsma_run(obj, N=20, iters=0, init=np.full((3, 2), 0.5), seed=0)
        assert len(pop) == 20 and "padding" in caplog.text

    def test_init_outside_box(self):
        obj, _ = quadratic_biobjective()
        with pytest.raises(ValueError):
            nsma_run(obj, init=np.array([[1.5, 0.5]]))

    def test_hypervolume_not_below_nsga2(self):
        obj, _ = quadratic_biobjective()
        wins = 0
        for s in range(5):
            init = np.random.default_rng(1000 + s).random((100, 2))
            hv1 = hypervolume_2d(nsma_run(obj, init=init, seed=s).F, [1, 1])
            hv2 = hypervolume_2d(nsga2_run(obj, init=init, seed=s).F, [1, 1])
            wins += hv2 <= hv1 + 1e-6
        assert wins >= 4


class TestHypervolume:
    def test_hand(self):
        assert hypervolume_2d([[0, 1], [1, 0], [0.5, 0.5]], [2, 2]) == pytest.approx(3.25)

    def test_outside_reference(self):
        assert hypervolume_2d([[3, 3]], [2, 2]) == 0.0


class TestStationarity:
    def test_double_critical(self):
        obj = _constant_objective([0.0, 0.0], [0.0, 0.0], 2)
        assert is_pareto_stationary(obj, np.full(2, 0.5))

    def test_opposite_gradients(self):
        g = np.array([1.0, -2.0])
        obj = _constant_objective(g, -g, 2)
        assert is_pareto_stationary(obj, np.full(2, 0.5))
        lo, hi = feasible_bounds(np.full(2, 0.5), obj.domain)
        assert theta_exact(np.vstack([g, -g]), lo, hi) == 0.0

    def test_equal_gradients(self):
        g = np.array([1.0, -2.0])
        obj = _constant_objective(g, g, 2)
        assert not is_pareto_stationary(obj, np.full(2, 0.5))
        J = obj.gradients(np.full(2, 0.5))
        assert partial_descent_direction(J, np.full(2, 0.5), obj.domain).theta == pytest.approx(-3.0)


class TestSimplex:
    @pytest.mark.parametrize("seed", range(20))
    def test_matches_highs(self, seed):
        r = np.random.default_rng(seed)
        m, n = r.integers(2, 8), r.integers(2, 8)
        A = r.normal(size=(m, n))
        x0 = r.random(n)
        b = A @ x0 + r.random(m) * (seed % 2)  # odd seeds: slack; even: tight, some b < 0
        A = np.vstack([A, np.eye(n)])
        b = np.concatenate([b, np.full(n, 3.0)])
        c = r.normal(size=n)
        ref = linprog(c, A_ub=A, b_ub=b, bounds=(0, None), method="highs")
        res = solve_lp(c, A, b)
        assert res.fun == pytest.approx(ref.fun, abs=1e-8)
        assert np.all(A @ res.x <= b + 1e-8) and np.all(res.x >= 0)

    def test_infeasible(self):
        with pytest.raises(LPError, match="infeasible"):
            solve_lp([1.0], [[1.0]], [-1.0])

    def test_unbounded(self):
        with pytest.raises(LPError, match="unbounded"):
            solve_lp([-1.0, 0.0], [[0.0, 1.0]], [1.0])

    def test_degenerate_terminates(self):
        # several constraints tight at the optimum vertex
        A = np.array([[1.0, 1.0], [1.0, 2.0], [2.0, 1.0], [1.0, 0.0], [0.0, 1.0]])
        b = np.array([2.0, 3.0, 3.0, 1.0, 1.0])
        res = solve_lp([-1.0, -1.0], A, b)
        assert res.fun == pytest.approx(-2.0)
