import numpy as np
import pytest

from paretobo import gp
from paretobo.acq import ei
from paretobo.benchfns import BoxDomain, get_benchmark
from paretobo.driver import (BudgetExceeded, ConfigError, CountingEvaluator, ExperimentConfig,
                             RunAborted, Strategy, StrategyParams, compute_metrics,
                             dispatch_strategy, run_bayesopt)
from paretobo.select import dedupe_rows

from conftest import make_gp

FAST = StrategyParams(population=20, iters=3, starts=10, maxiter=20, mc_samples=64, moo_init=20)


def _cfg(strategy="NSMA_X", bench="branin:2", **kw):
    kw.setdefault("n_init", 5)
    kw.setdefault("n_max", 6)
    kw.setdefault("params", FAST)
    return ExperimentConfig(bench, strategy, **kw)


class TestConfig:
    def test_defaults(self):
        c = ExperimentConfig("levy8:10", "QEI")
        assert (c.q, c.n_init, c.n_max, len(c.seeds)) == (3, 10, 60, 20)
        assert c.name == "levy8-n10_QEI_q3"
        assert c.strategy is Strategy.QEI

    @pytest.mark.parametrize("kw", [{"q": 1}, {"n_init": 0}, {"n_max": 2, "q": 3},
                                    {"strategy": "EI"}, {"params": {"bogus": 1}}])
    def test_invalid(self, kw):
        args = {"benchmark": "branin:2", "strategy": "QEI", **kw}
        with pytest.raises(ConfigError):
            ExperimentConfig(**args)

    def test_bad_benchmark(self):
        with pytest.raises(ValueError):
            ExperimentConfig("nosuch:2", "QEI")

    def test_zero_budget_allowed(self):
        assert ExperimentConfig("branin:2", "QEI", n_max=0).n_max == 0

    def test_params_from_dict(self):
        c = ExperimentConfig("branin:2", "QEI", params={"mc_samples": 128})
        assert c.params.mc_samples == 128 and c.params.population == 100

    def test_moo_flag(self):
        assert Strategy.NSGA2_F.is_moo and not Strategy.QLCB.is_moo


class TestCountingEvaluator:
    def test_budget(self):
        f = CountingEvaluator(get_benchmark("branin:2"), 2)
        f([0.0, 5.0])
        f([1.0, 5.0])
        with pytest.raises(BudgetExceeded):
            f([2.0, 5.0])
        assert f.count == 2


class TestDispatch:
    @pytest.mark.parametrize("strategy", list(Strategy))
    def test_rows_in_box_and_distinct(self, strategy):
        dom = BoxDomain(np.array([-5.0, 0.0]), np.array([10.0, 15.0]))
        m = make_gp(2, 8, seed=1, domain=dom)
        prop = dispatch_strategy(strategy, m, dom, 3, seed=0, params=FAST)
        assert prop.points.shape == (3, 2)
        assert all(dom.contains(p) for p in prop.points)
        assert dedupe_rows(dom.to_unit(prop.points))[0].shape[0] == 3
        Xobs = dom.from_unit(m.X_scaled)
        assert np.abs(prop.points[:, None] - Xobs[None]).max(axis=2).min() > 0

    @pytest.mark.parametrize("strategy", list(Strategy))
    def test_same_seed_same_batch(self, strategy):
        m = make_gp(2, 8, seed=2)
        a = dispatch_strategy(strategy, m, m.domain, 2, seed=11, params=FAST)
        b = dispatch_strategy(strategy, m, m.domain, 2, seed=11, params=FAST)
        np.testing.assert_array_equal(a.points, b.points)

    def test_qei_single_point_matches_grid(self):
        dom = BoxDomain(np.array([0.0]), np.array([1.0]))
        X = np.array([[0.05], [0.3], [0.55], [0.9]])
        m = gp.fit(X, np.sin(6 * X[:, 0]) + X[:, 0], dom, seed=0)
        grid = np.linspace(0, 1, 20001)
        vals = [ei(m, np.array([g]), m.f_best) for g in grid]
        x_star = grid[int(np.argmax(vals))]
        params = StrategyParams(mc_samples=2 ** 13)
        prop = dispatch_strategy("QEI", m, dom, 1, seed=0, params=params)
        assert abs(prop.points[0, 0] - x_star) <= 1e-3

    def test_duplicate_jitter(self, caplog):
        from paretobo.driver import _jitter_duplicates
        hist = np.array([[0.5, 0.5]])
        Z = np.array([[0.5, 0.5], [0.2, 0.2], [0.2, 0.2]])
        with caplog.at_level("INFO"):
            out = _jitter_duplicates(Z, hist, np.random.default_rng(0))
        assert dedupe_rows(np.vstack([hist, out]))[0].shape[0] == 4
        assert np.abs(out - Z).max() <= 1e-6 * 100
        assert "jittered" in caplog.text


class TestRunBayesopt:
    def test_zero_iterations(self):
        cfg = _cfg(n_max=0)
        h = run_bayesopt(cfg, 0)
        assert h.n_evaluations == 5
        assert h.f_best_trace.tolist() == [h.y.min()]
        assert h.incumbent[1] == h.y.min()

    @pytest.mark.parametrize("strategy", ["NSMA_F", "QLCB"])
    def test_deterministic(self, strategy):
        a = run_bayesopt(_cfg(strategy), 3)
        b = run_bayesopt(_cfg(strategy), 3)
        np.testing.assert_array_equal(a.X, b.X)
        np.testing.assert_array_equal(a.y, b.y)

    def test_history_invariants(self):
        cfg = _cfg("NSGA2_X", n_max=7)  # 7 = 2 full batches + 1 truncated
        h = run_bayesopt(cfg, 1)
        assert h.n_evaluations == 12 == len(h.evaluations)
        assert h.batch.tolist() == [0] * 5 + [1, 1, 1, 2, 2, 2, 3]
        assert h.f_best_trace.size == 8
        assert np.all(np.diff(h.f_best_trace) <= 0)
        assert h.f_best_trace[-1] == h.y.min() == h.incumbent[1]
        assert all(cfg.bench.domain.contains(x) for x in h.X)

    def test_shared_initial_design(self):
        a = run_bayesopt(_cfg("QEI", n_max=0), 4)
        b = run_bayesopt(_cfg("NSMA_X", n_max=0), 4)
        np.testing.assert_array_equal(a.X, b.X)

    def test_evaluator_overrun_detected(self):
        cfg = _cfg("QEI")
        f = CountingEvaluator(cfg.bench, 8)
        with pytest.raises(BudgetExceeded):
            run_bayesopt(cfg, 0, evaluator=f)

    def test_fit_failure_aborts_with_history(self, monkeypatch):
        def boom(*a, **k):
            raise gp.GPFitError("forced")

        monkeypatch.setattr(gp, "fit", boom)
        with pytest.raises(RunAborted) as exc:
            run_bayesopt(_cfg("QEI"), 0)
        assert exc.value.history.n_evaluations == 5

    @pytest.mark.slow
    def test_rastrigin_beats_random_search(self):
        cfg = ExperimentConfig("rastrigin:2", "NSMA_F", q=3, n_init=10, n_max=60)
        bench = cfg.bench
        wins = 0
        for s in range(5):
            bo = run_bayesopt(cfg, s).f_best_trace[-1]
            # median over 11 random-search replicates paired with this seed
            rs = []
            for r in range(11):
                U = np.random.default_rng([s, 999, r]).random((70, 2))
                rs.append(min(bench(x) for x in bench.domain.lower + U * bench.domain.width))
            wins += bo < np.median(rs)
        assert wins >= 4


class TestMetrics:
    def test_report(self):
        cfg = _cfg("QEI", n_max=6)
        h = run_bayesopt(cfg, 0)
        rep = compute_metrics(h, cfg.bench, cfg.q)
        assert rep.nr_trace[0] == pytest.approx(1.0)
        assert np.all((rep.nr_trace >= 0) & (rep.nr_trace <= 1))
        assert 0 <= rep.nr_auc <= 6
        assert rep.d_omega_trace.size == 7 and rep.d_omega_trace[0] == 0
        assert np.all(np.diff(rep.d_omega_trace) >= 0)
        assert rep.final_best == h.y.min()

    def test_no_catalogued_optimum(self):
        cfg = _cfg("QEI", bench="rosenbrock:3", n_max=3)
        bench = cfg.bench
        if bench.optimal_value is not None:
            pytest.skip("optimum catalogued")
        rep = compute_metrics(run_bayesopt(cfg, 0), bench, 3)
        assert rep.nr_trace is None and rep.nr_auc is None
