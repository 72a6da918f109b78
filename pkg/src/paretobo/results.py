"""Suite files, on-disk run records and report tables.

A suite is a YAML file::

    name: desk
    output_dir: results/desk
    jobs: 1
    defaults: {q: 3, n_init: 10, n_max: 60, seeds: [0, 1, 2]}
    grid:                       # optional cartesian product
      benchmarks: [levy8:2, branin:2]
      strategies: [NSMA_X, QEI]
      q: [2, 3]
    experiments:                # optional explicit cells
      - {name: my_run, benchmark: levy8:100, strategy: NSMA_X}

Each (experiment, seed) cell is stored as ``records/<name>__seed<k>.json``.
JSON floats use the shortest repr that round-trips exactly.
"""
from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .benchfns import BenchmarkError, get_benchmark
from .driver import ConfigError, ExperimentConfig, StrategyParams, compute_metrics
from .metrics import confidence_interval, relative_gap_distribution

__all__ = [
    "SuiteError",
    "ExperimentSuite",
    "load_suite",
    "packaged_suite",
    "parse_suite",
    "make_record",
    "write_json_atomic",
    "load_records",
    "filter_records",
    "report_trace",
    "report_auc_table",
    "report_gap_curves",
    "report_boundary",
    "rank_flags",
]

RECORD_KEYS = ("experiment", "strategy", "benchmark", "n", "q", "seed", "n_init", "n_max",
               "f_best_trace", "d_omega_trace", "nr_auc", "final_best", "incumbent",
               "n_evaluations", "y", "batch", "X")
HIGH_DIM = 10


class SuiteError(ValueError):
    """Suite file problem, with a location prefix such as ``line 4`` or ``experiments[2].q``."""


@dataclass
class ExperimentSuite:
    name: str
    experiments: list = field(default_factory=list)
    output_dir: Path = Path("results")
    jobs: int = 1

    def cells(self):
        return [(e, s) for e in self.experiments for s in e.seeds]


_CFG_FIELDS = {"benchmark", "strategy", "q", "n_init", "n_max", "seeds", "strategy_params", "name"}


def _config(d: dict, where: str) -> ExperimentConfig:
    if not isinstance(d, dict):
        raise SuiteError(f"{where}: expected a mapping")
    extra = set(d) - _CFG_FIELDS
    if extra:
        raise SuiteError(f"{where}: unknown field(s) {sorted(extra)}")
    if "benchmark" not in d or "strategy" not in d:
        raise SuiteError(f"{where}: 'benchmark' and 'strategy' are required")
    kw = dict(d)
    params = kw.pop("strategy_params", None)
    try:
        kw["params"] = StrategyParams.from_dict(params)
        for k in ("q", "n_init", "n_max"):
            if k in kw and (isinstance(kw[k], bool) or not isinstance(kw[k], int)):
                raise ConfigError(f"{k} must be an integer")
        if "seeds" in kw:
            s = kw["seeds"]
            if isinstance(s, int) and not isinstance(s, bool):
                kw["seeds"] = tuple(range(s))
            elif not isinstance(s, list) or not all(isinstance(v, int) for v in s):
                raise ConfigError("seeds must be an integer count or a list of integers")
        return ExperimentConfig(**kw)
    except (ConfigError, BenchmarkError, TypeError) as exc:
        raise SuiteError(f"{where}: {exc}") from None


def parse_suite(text: str, base_dir: Path | None = None) -> ExperimentSuite:
    try:
        doc = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        loc = f"line {mark.line + 1}, column {mark.column + 1}" if mark else "unknown position"
        raise SuiteError(f"{loc}: {exc.problem}") from None
    except yaml.YAMLError as exc:
        raise SuiteError(str(exc)) from None
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise SuiteError("top level: expected a mapping")
    extra = set(doc) - {"name", "output_dir", "jobs", "defaults", "grid", "experiments"}
    if extra:
        raise SuiteError(f"top level: unknown field(s) {sorted(extra)}")
    defaults = doc.get("defaults") or {}
    if not isinstance(defaults, dict):
        raise SuiteError("defaults: expected a mapping")
    exps = []
    grid = doc.get("grid")
    if grid is not None:
        if not isinstance(grid, dict) or not {"benchmarks", "strategies"} <= set(grid):
            raise SuiteError("grid: needs 'benchmarks' and 'strategies' lists")
        extra = set(grid) - {"benchmarks", "strategies", "q"}
        if extra:
            raise SuiteError(f"grid: unknown field(s) {sorted(extra)}")
        qs = grid.get("q", [defaults.get("q", 3)])
        qs = qs if isinstance(qs, list) else [qs]
        for b in grid["benchmarks"]:
            for s in grid["strategies"]:
                for q in qs:
                    exps.append(_config({**defaults, "benchmark": b, "strategy": s, "q": q},
                                        f"grid[{b}, {s}, q={q}]"))
    for i, e in enumerate(doc.get("experiments") or []):
        merged = {**defaults, **(e if isinstance(e, dict) else {})}
        if "strategy_params" in defaults and isinstance(e, dict) and "strategy_params" in e:
            merged["strategy_params"] = {**defaults["strategy_params"], **e["strategy_params"]}
        exps.append(_config(merged if isinstance(e, dict) else e, f"experiments[{i}]"))
    names = [e.name for e in exps]
    dup = sorted({n for n in names if names.count(n) > 1})
    if dup:
        raise SuiteError(f"experiments: duplicate names {dup}")
    out = Path(doc.get("output_dir", "results"))
    if not out.is_absolute() and base_dir is not None:
        out = base_dir / out
    jobs = doc.get("jobs", 1)
    if not isinstance(jobs, int) or jobs < 1:
        raise SuiteError("jobs: must be a positive integer")
    return ExperimentSuite(str(doc.get("name", "suite")), exps, out, jobs)


def packaged_suite(name: str) -> Path | None:
    """Path of a suite shipped with the package (``desk``, ``full``), if any."""
    p = Path(__file__).parent / "suites" / f"{name}.yaml"
    return p if p.is_file() else None


def load_suite(path) -> ExperimentSuite:
    """Read a suite file, or a packaged suite by bare name.

    ``output_dir`` is resolved against the working directory.
    """
    path = Path(path)
    if not path.exists() and packaged_suite(str(path)) is not None:
        path = packaged_suite(str(path))
    try:
        text = path.read_text()
    except OSError as exc:
        raise SuiteError(f"{path}: {exc.strerror}") from None
    try:
        return parse_suite(text)
    except SuiteError as exc:
        raise SuiteError(f"{path}: {exc}") from None


# ---------------------------------------------------------------------------
# records


def _floats(a):
    return [float(v) for v in np.asarray(a, dtype=np.float64).ravel()]


def make_record(cfg: ExperimentConfig, seed: int, history) -> dict:
    bench = cfg.bench
    m = compute_metrics(history, bench, cfg.q)
    x_inc, f_inc = history.incumbent
    return {
        "experiment": cfg.name,
        "strategy": cfg.strategy.value,
        "benchmark": bench.key,
        "n": bench.dimension,
        "q": cfg.q,
        "seed": int(seed),
        "n_init": cfg.n_init,
        "n_max": cfg.n_max,
        "f_best_trace": _floats(history.f_best_trace),
        "d_omega_trace": _floats(m.d_omega_trace),
        "nr_auc": None if m.nr_auc is None else float(m.nr_auc),
        "final_best": float(m.final_best),
        "incumbent": _floats(x_inc),
        "n_evaluations": int(history.n_evaluations),
        "y": _floats(history.y),
        "batch": [int(b) for b in history.batch],
        "X": [_floats(x) for x in history.X],
    }


def dumps(obj) -> str:
    return json.dumps(obj, indent=1, allow_nan=False) + "\n"


def write_json_atomic(path: Path, obj) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix="." + path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(dumps(obj))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def record_path(out_dir: Path, name: str, seed: int) -> Path:
    return Path(out_dir) / "records" / f"{name}__seed{seed}.json"


def load_records(results_dir) -> list:
    d = Path(results_dir)
    rec_dir = d / "records" if (d / "records").is_dir() else d
    out = []
    for p in sorted(rec_dir.glob("*.json")):
        if p.name.endswith(".timing.json") or p.name == "manifest.json":
            continue
        with open(p) as fh:
            r = json.load(fh)
        if isinstance(r, dict) and "f_best_trace" in r:
            out.append(r)
    return out


def _match_function(r, name):
    key = name.split(":")[0].lower().replace("_", "").replace("-", "").replace(" ", "")
    return r["benchmark"] == key


def filter_records(records, function=None, dim=None, q=None):
    out = records
    if function is not None:
        out = [r for r in out if _match_function(r, function)]
    if dim is not None:
        out = [r for r in out if r["n"] == dim]
    if q is not None:
        out = [r for r in out if r["q"] == q]
    return out


# ---------------------------------------------------------------------------
# reports (lists of row dicts; the CLI writes them as CSV)


def _group(records, keys):
    groups = {}
    for r in records:
        groups.setdefault(tuple(r[k] for k in keys), []).append(r)
    return dict(sorted(groups.items(), key=lambda kv: tuple(str(v) for v in kv[0])))


def _series_rows(records, field_name, value_name):
    rows = []
    for (b, n, q, s), rs in _group(records, ("benchmark", "n", "q", "strategy")).items():
        length = min(len(r[field_name]) for r in rs)
        M = np.array([r[field_name][:length] for r in rs])
        for k in range(length):
            lo, hi = confidence_interval(M[:, k])
            mean = float(M[:, k].mean())
            rows.append({"benchmark": b, "n": n, "q": q, "strategy": s, "k": k,
                         value_name: mean, "ci_lo": lo, "ci_hi": hi,
                         "ci_halfwidth": (hi - lo) / 2, "n_seeds": len(rs),
                         "degenerate": int(len(rs) < 2)})
    return rows


def report_trace(records):
    """Mean best-so-far value against acquired-evaluation count, with 95% CI."""
    return _series_rows(records, "f_best_trace", "mean_f_best")


def report_boundary(records):
    """Mean boundary-distance series."""
    return _series_rows(records, "d_omega_trace", "mean_d_omega")


def rank_flags(values: dict):
    """Competition ranks (lower is better, ties share a rank) for ``{label: value}``."""
    vals = {k: v for k, v in values.items() if v is not None}
    return {k: 1 + sum(1 for w in vals.values() if w < v) for k, v in vals.items()}


def _mean_or_none(xs):
    xs = [x for x in xs if x is not None]
    return float(np.mean(xs)) if xs else None


def report_auc_table(records):
    """Per problem and strategy: mean NR-AUC and final best, with best/second flags."""
    rows = []
    for (b, n, q), rs in _group(records, ("benchmark", "n", "q")).items():
        by_s = _group(rs, ("strategy",))
        auc = {s[0]: _mean_or_none([r["nr_auc"] for r in v]) for s, v in by_s.items()}
        fin = {s[0]: _mean_or_none([r["final_best"] for r in v]) for s, v in by_s.items()}
        ra, rf = rank_flags(auc), rank_flags(fin)
        for s in auc:
            rows.append({"benchmark": b, "n": n, "q": q, "strategy": s,
                         "n_seeds": len(by_s[(s,)]),
                         "nr_auc": auc[s], "nr_auc_best": int(ra.get(s) == 1),
                         "nr_auc_second": int(ra.get(s) == 2),
                         "final_best": fin[s], "final_best_best": int(rf.get(s) == 1),
                         "final_best_second": int(rf.get(s) == 2)})
    return rows


def report_gap_curves(records):
    """Relative-gap distributions of mean NR-AUC and mean final best, per dimension class."""
    rows = []
    for group, pred in (("low", lambda n: n < HIGH_DIM), ("high", lambda n: n >= HIGH_DIM)):
        rs = [r for r in records if pred(r["n"])]
        if not rs:
            continue
        for metric in ("nr_auc", "final_best"):
            scores = {}
            for (b, n, q, s), v in _group(rs, ("benchmark", "n", "q", "strategy")).items():
                scores.setdefault(s, {})[f"{b}:{n}:q{q}"] = _mean_or_none([r[metric] for r in v])
            taus, curves, _ = relative_gap_distribution(scores)
            for s in sorted(curves):
                for t, fr in zip(taus, curves[s]):
                    rows.append({"dims": group, "metric": metric, "strategy": s,
                                 "tau": float(t), "fraction": float(fr)})
    return rows


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: ("" if v is None else repr(float(v)) if isinstance(v, (float, np.floating)) else v)
                        for k, v in r.items()})
    return buf.getvalue()
