"""Command-line entry point: ``paretobo run|report|list-benchmarks|selftest``.

Exit codes: 0 success, 1 usage or parse error (including an empty report
filter), 2 runtime failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from .benchfns import list_benchmarks
from .driver import ExperimentConfig, RunAborted, run_bayesopt
from .results import (SuiteError, filter_records, load_records, load_suite, make_record,
                      record_path, report_auc_table, report_boundary, report_gap_curves,
                      report_trace, rows_to_csv, write_json_atomic)

log = logging.getLogger("paretobo")

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2

REPORTS = {
    "trace": report_trace,
    "auc-table": report_auc_table,
    "gap-curves": report_gap_curves,
    "boundary": report_boundary,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="paretobo", description="Batch Bayesian optimization experiments.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="execute every (experiment, seed) cell of a suite")
    r.add_argument("suite", type=Path)
    r.add_argument("--force", action="store_true", help="recompute cells that already have records")
    r.add_argument("--jobs", type=int, default=None, help="worker processes (default: suite setting)")
    r.add_argument("--out", type=Path, default=None, help="override the suite's output_dir")

    rp = sub.add_parser("report", help="write plot-ready CSV from stored records")
    rp.add_argument("results_dir", type=Path)
    rp.add_argument("--kind", required=True, choices=sorted(REPORTS))
    rp.add_argument("--function", default=None)
    rp.add_argument("--dim", type=int, default=None)
    rp.add_argument("--q", type=int, default=None)
    rp.add_argument("-o", "--output", type=Path, default=None, help="file to write (default stdout)")

    sub.add_parser("list-benchmarks", help="print the benchmark catalogue")
    sub.add_parser("selftest", help="run the built-in oracle checks")
    return p


def run_cell(cfg: ExperimentConfig, seed: int, out_dir: Path):
    """Run one cell and write its record. Returns ``(name, seed, error or None)``."""
    path = record_path(out_dir, cfg.name, seed)
    t0 = time.perf_counter()
    try:
        hist = run_bayesopt(cfg, seed)
    except RunAborted as exc:
        return cfg.name, seed, f"aborted: {exc}"
    except Exception as exc:  # keep the suite going; the manifest lists the failure
        log.debug("cell %s seed %d failed\n%s", cfg.name, seed, traceback.format_exc())
        return cfg.name, seed, f"{type(exc).__name__}: {exc}"
    write_json_atomic(path, make_record(cfg, seed, hist))
    write_json_atomic(path.with_suffix(".timing.json"),
                      {"wall_time": time.perf_counter() - t0,
                       "iteration_times": [float(t) for t in hist.wall_times]})
    return cfg.name, seed, None


def cmd_run(args) -> int:
    try:
        suite = load_suite(args.suite)
    except SuiteError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out = args.out if args.out is not None else suite.output_dir
    jobs = args.jobs if args.jobs is not None else suite.jobs
    if jobs < 1:
        print("error: --jobs must be positive", file=sys.stderr)
        return EXIT_USAGE
    out.mkdir(parents=True, exist_ok=True)
    cells = suite.cells()
    todo = [(c, s) for c, s in cells if args.force or not record_path(out, c.name, s).exists()]
    log.info("%d cells, %d to run, %d worker(s)", len(cells), len(todo), jobs)
    failures = {}
    if jobs == 1 or len(todo) <= 1:
        results = (run_cell(c, s, out) for c, s in todo)
        for name, seed, err in results:
            _log_cell(name, seed, err, failures)
    else:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            futs = [ex.submit(run_cell, c, s, out) for c, s in todo]
            for f in futs:
                _log_cell(*f.result(), failures)
    manifest = {
        "suite": suite.name,
        "experiments": [c.to_dict() for c in suite.experiments],
        "cells": [{"experiment": c.name, "seed": s,
                   "record": str(record_path(out, c.name, s).relative_to(out)),
                   "status": "failed" if (c.name, s) in failures else "ok"}
                  for c, s in cells],
        "failed": [{"experiment": n, "seed": s, "error": e} for (n, s), e in sorted(failures.items())],
    }
    write_json_atomic(out / "manifest.json", manifest)
    if failures:
        print(f"{len(failures)} of {len(cells)} cells failed; see {out / 'manifest.json'}",
              file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def _log_cell(name, seed, err, failures):
    if err is None:
        log.info("done %s seed %d", name, seed)
    else:
        failures[(name, seed)] = err
        log.error("failed %s seed %d: %s", name, seed, err)


def cmd_report(args) -> int:
    if not args.results_dir.is_dir():
        print(f"error: no such results directory: {args.results_dir}", file=sys.stderr)
        return EXIT_USAGE
    records = filter_records(load_records(args.results_dir), args.function, args.dim, args.q)
    if not records:
        flt = ", ".join(f"{k}={v}" for k, v in
                        (("function", args.function), ("dim", args.dim), ("q", args.q))
                        if v is not None) or "no filter"
        print(f"error: no records match ({flt}) in {args.results_dir}", file=sys.stderr)
        return EXIT_USAGE
    text = rows_to_csv(REPORTS[args.kind](records))
    if args.output is None:
        sys.stdout.write(text)
    else:
        args.output.parent.mkdir(parents=True, exist_ok=True)
        args.output.write_text(text)
    return EXIT_OK


def cmd_list(args) -> int:
    print(f"{'key':<16}{'name':<18}{'n':<18}bounds")
    for key, display, dims, bounds in list_benchmarks():
        print(f"{key:<16}{display:<18}{','.join(map(str, dims)):<18}{bounds}")
    return EXIT_OK


def cmd_selftest(args) -> int:
    from .selftest import run_all
    return EXIT_OK if run_all() else EXIT_RUNTIME


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    handler = {"run": cmd_run, "report": cmd_report,
               "list-benchmarks": cmd_list, "selftest": cmd_selftest}[args.verb]
    try:
        return handler(args)
    except KeyboardInterrupt:
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
