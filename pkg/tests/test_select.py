import numpy as np
import pytest

from paretobo.benchfns import BoxDomain
from paretobo.moo import make_population
from paretobo.select import dedupe_rows, kmeans, select_batch_F, select_batch_X

from oracles import exhaustive_kmeans


def _front_population(X, F=None):
    """Population whose members are all rank 0 (objectives on an anti-diagonal)."""
    X = np.asarray(X, dtype=float)
    if F is None:
        t = np.arange(len(X), dtype=float)
        F = np.column_stack([t, -t])
    return make_population(X, F)


class TestDedupe:
    def test_groups(self):
        U, inv, cnt = dedupe_rows([[0, 0], [1, 1], [0, 0], [1, 1 + 1e-13]])
        assert U.tolist() == [[0, 0], [1, 1]]
        assert inv.tolist() == [0, 1, 0, 1]
        assert cnt.tolist() == [2, 2]


class TestKMeans:
    def test_k_equals_n(self, rng):
        X = rng.random((5, 2))
        res = kmeans(X, 5)
        assert res.inertia == 0.0
        np.testing.assert_array_equal(res.centers, X)

    def test_line_example(self):
        X = np.array([[0.0], [1.0], [10.0], [11.0]])
        res = kmeans(X, 2, seed=0)
        assert sorted(res.centers[:, 0]) == pytest.approx([0.5, 10.5])
        assert res.inertia == pytest.approx(1.0)
        assert res.inertia == pytest.approx(exhaustive_kmeans(X, 2)[0])

    def test_duplicated_dataset(self, rng):
        X = rng.random((12, 2))
        a = kmeans(X, 3, seed=1)
        b = kmeans(np.vstack([X, X]), 3, seed=1)
        np.testing.assert_allclose(np.sort(a.centers, axis=0), np.sort(b.centers, axis=0))

    def test_too_few_distinct(self):
        with pytest.raises(ValueError):
            kmeans([[0.0], [0.0], [1.0]], 3)

    @pytest.mark.parametrize("seed", range(10))
    def test_exhaustive_oracle(self, seed):
        r = np.random.default_rng(seed)
        X = r.random((r.integers(4, 9), 2))
        k = int(r.integers(2, 4))
        res = kmeans(X, k, seed=seed)
        assert res.inertia == pytest.approx(exhaustive_kmeans(X, k)[0], abs=1e-9)

    def test_result_invariants(self, rng):
        X = rng.random((30, 3))
        res = kmeans(X, 4, seed=2)
        d2 = ((X[:, None, :] - res.centers[None]) ** 2).sum(axis=2)
        assert np.all(d2[np.arange(30), res.assignments] <= d2.min(axis=1) + 1e-12)
        recomputed = d2[np.arange(30), res.assignments].sum()
        assert res.inertia == pytest.approx(recomputed, rel=1e-9)

    def test_seeded(self, rng):
        X = rng.random((25, 2))
        a, b = kmeans(X, 3, seed=9), kmeans(X, 3, seed=9)
        np.testing.assert_array_equal(a.centers, b.centers)


class TestSelectBatchX:
    def test_exactly_q_points(self):
        X = np.array([[0.1, 0.2], [0.5, 0.5], [0.9, 0.3]])
        prop = select_batch_X(_front_population(X), 3)
        np.testing.assert_array_equal(np.sort(prop.points, axis=0), np.sort(X, axis=0))

    def test_four_corner_example(self):
        X = np.array([[0, 0], [0, 1], [10, 0], [10, 1]], dtype=float)
        dom = BoxDomain(np.zeros(2), np.array([10.0, 1.0]))
        prop = select_batch_X(_front_population(X), 2, domain=dom)
        got = sorted(map(tuple, prop.points))
        assert got == [pytest.approx((0, 0.5)), pytest.approx((10, 0.5))]

    def test_in_box_distinct_and_seeded(self, rng):
        dom = BoxDomain.unit(3)
        pop = make_population(rng.random((60, 3)), rng.random((60, 2)))
        a = select_batch_X(pop, 5, seed=4, domain=dom)
        b = select_batch_X(pop, 5, seed=4, domain=dom)
        np.testing.assert_array_equal(a.points, b.points)
        assert a.points.shape == (5, 3)
        assert all(dom.contains(p) for p in a.points)
        assert dedupe_rows(a.points)[0].shape[0] == 5

    def test_small_front_falls_back_to_population(self):
        X = np.array([[0.1, 0.1], [0.2, 0.2], [0.8, 0.8], [0.9, 0.9]])
        F = np.array([[0, 0], [1, 1], [2, 2], [3, 3]], dtype=float)  # a chain: front of 1
        prop = select_batch_X(make_population(X, F), 2)
        assert prop.n_padded == 0
        assert sorted(prop.points[:, 0]) == pytest.approx([0.15, 0.85])

    def test_padding_when_too_few_distinct(self, caplog):
        X = np.full((4, 2), 0.5)
        with caplog.at_level("WARNING"):
            prop = select_batch_X(_front_population(X), 3, seed=0)
        assert prop.n_padded == 2 and "padding" in caplog.text
        assert dedupe_rows(prop.points)[0].shape[0] == 3


class TestSelectBatchF:
    def test_q_equals_distinct_images(self):
        X = np.array([[0.1, 0.2], [0.5, 0.5], [0.9, 0.3]])
        F = np.array([[0.0, 3.0], [1.0, 2.0], [3.0, 0.0]])
        prop = select_batch_F(make_population(X, F), 3)
        assert sorted(prop.member_indices.tolist()) == [0, 1, 2]

    def test_two_separated_clusters(self, rng):
        t = np.concatenate([rng.uniform(0, 0.05, 10), rng.uniform(0.95, 1, 10)])
        F = np.column_stack([t, 1 - t])
        X = rng.random((20, 2))
        prop = select_batch_F(make_population(X, F), 2, seed=1)
        groups = sorted(int(i >= 10) for i in prop.member_indices)
        assert groups == [0, 1]

    def test_members_are_population_rows(self, rng):
        pop = make_population(rng.random((80, 4)), rng.random((80, 2)))
        prop = select_batch_F(pop, 5, seed=0)
        assert prop.n_padded == 0
        for p, i in zip(prop.points, prop.member_indices):
            np.testing.assert_array_equal(p, pop.X[i])
        assert dedupe_rows(prop.points)[0].shape[0] == 5

    def test_seeded(self, rng):
        pop = make_population(rng.random((50, 2)), rng.random((50, 2)))
        a, b = select_batch_F(pop, 3, seed=8), select_batch_F(pop, 3, seed=8)
        np.testing.assert_array_equal(a.points, b.points)

    def test_scale_invariant_objectives(self, rng):
        X = rng.random((40, 2))
        F = rng.random((40, 2))
        a = select_batch_F(make_population(X, F), 3, seed=2)
        G = F * np.array([1e4, 1e-3]) + np.array([5.0, -2.0])
        b = select_batch_F(make_population(X, G), 3, seed=2)
        np.testing.assert_array_equal(a.member_indices, b.member_indices)

    def test_padding_when_all_identical(self, caplog):
        pop = make_population(np.full((4, 2), 0.3), np.zeros((4, 2)))
        with caplog.at_level("WARNING"):
            prop = select_batch_F(pop, 3, seed=0)
        assert prop.n_padded == 2
        assert prop.member_indices.tolist() == [0, -1, -1]
