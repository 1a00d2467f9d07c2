"""Experiment harness: trace files, bound checking, preset comparison.

Trace CSVs have the fixed header ``n,f_x,f_avg,gap_best,gap_avg,bound,
backward_step,nnz,elapsed_s``; floats are written with 17 significant
digits so values round-trip exactly, and files are written atomically
(temp file + rename).  With the default deterministic timing a run is a
pure function of (config text, seed) and repeated invocations produce
byte-identical files.
"""

import json
import math
import os
import statistics
import tempfile
from pathlib import Path

import numpy as np

from .config import build_problem_from_config, build_schedule_from_config
from .reference import ReferenceSolution, reference_optimum
from .schedules import constant_steps, power_steps, schedule_preset
from .solver import TraceRow, run

TRACE_FIELDS = ("n", "f_x", "f_avg", "gap_best", "gap_avg", "bound",
                "backward_step", "nnz", "elapsed_s")
TRACE_HEADER = ",".join(TRACE_FIELDS)


def _fmt(value):
    return "%.17g" % value


def write_trace_csv(rows, path):
    """Atomically write trace rows; floats keep full round-trip precision."""
    path = Path(path)
    lines = [TRACE_HEADER]
    for r in rows:
        lines.append(",".join((
            str(r.n), _fmt(r.f_x), _fmt(r.f_avg), _fmt(r.gap_best),
            _fmt(r.gap_avg), _fmt(r.bound), _fmt(r.backward_step),
            str(r.nnz), _fmt(r.elapsed_s))))
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write("\n".join(lines) + "\n")
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise
    return path


def read_trace_csv(path):
    path = Path(path)
    with open(path, "r", newline="") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != TRACE_HEADER:
        raise ValueError("%s is not a trace file (bad header)" % path)
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != len(TRACE_FIELDS):
            raise ValueError("%s line %d: expected %d fields, got %d"
                             % (path, lineno, len(TRACE_FIELDS), len(parts)))
        try:
            rows.append(TraceRow(int(parts[0]), float(parts[1]), float(parts[2]),
                                 float(parts[3]), float(parts[4]), float(parts[5]),
                                 float(parts[6]), int(parts[7]), float(parts[8])))
        except ValueError as exc:
            raise ValueError("%s line %d: %s" % (path, lineno, exc)) from None
    return rows


def _reference_cache_path(out_dir, key):
    return Path(out_dir) / "_refcache" / ("%s.json" % key)


def cached_reference(cfg, problem, out_dir):
    """Reference optimum, cached on disk keyed by the problem definition."""
    cache = _reference_cache_path(out_dir, cfg.problem_key)
    if cache.exists():
        data = json.loads(cache.read_text())
        return ReferenceSolution(np.asarray(data["x_star"], dtype=float),
                                 data["f_star"], data["certified_gap"],
                                 data["converged"], data["method"])
    ref = reference_optimum(problem, tol=cfg.reference_tol)
    cache.parent.mkdir(parents=True, exist_ok=True)
    payload = {"x_star": [float(v) for v in ref.x_star], "f_star": ref.f_star,
               "certified_gap": ref.certified_gap, "converged": ref.converged,
               "method": ref.method}
    fd, tmp = tempfile.mkstemp(dir=cache.parent, suffix=".tmp")
    with os.fdopen(fd, "w") as fh:
        json.dump(payload, fh)
    os.replace(tmp, cache)
    return ref


def run_experiment(cfg, out_dir=None, unsafe=False, stride=None):
    """Run one trace per seed; returns the list of written paths.

    Exact mode ignores seed values, so listed seeds produce identical
    traces; the reference optimum is computed once and cached.
    """
    out = Path(out_dir) if out_dir is not None else Path(cfg.directory)
    out.mkdir(parents=True, exist_ok=True)
    problem = build_problem_from_config(cfg)
    schedule = build_schedule_from_config(cfg)
    reference = cached_reference(cfg, problem, out)
    paths = []
    for seed in cfg.seeds:
        result = run(problem, schedule, cfg.iterations, mode=cfg.mode, seed=seed,
                     stride=stride if stride is not None else cfg.stride,
                     x1=cfg.x1, reference=reference, unsafe=unsafe,
                     timing=cfg.timing)
        path = out / ("%s_seed%d.csv" % (cfg.name, seed))
        write_trace_csv(result.rows, path)
        paths.append(path)
    return paths


class BoundCheckReport:

    def __init__(self, strict, slack):
        self.strict = strict
        self.slack = slack
        self.checked_rows = 0
        self.failures = []

    @property
    def ok(self):
        return not self.failures

    def summary(self):
        mode = "strict" if self.strict else "seed-mean"
        if self.ok:
            return ("bound check (%s) passed: %d rows within bound + %g"
                    % (mode, self.checked_rows, self.slack))
        return "bound check (%s) FAILED:\n  " % mode + "\n  ".join(self.failures)


def check_bound(trace_paths, strict, slack=1e-9):
    """Verify gap columns against the bound column.

    Strict mode compares every row of every trace; non-strict mode
    (stochastic runs) compares the seed-mean gaps at the final logged n
    against 1.10x the bound.  Traces without a valid bound column (from
    --unsafe runs) are rejected.
    """
    if not trace_paths:
        raise ValueError("no trace files given")
    report = BoundCheckReport(strict, slack)
    finals = []
    for path in trace_paths:
        rows = read_trace_csv(path)
        if not rows:
            report.failures.append("%s: empty trace" % path)
            continue
        if any(math.isnan(r.bound) or math.isnan(r.gap_best) for r in rows):
            report.failures.append(
                "%s: missing bound or gap values (run from --unsafe or without "
                "a reference); refusing to check" % path)
            continue
        if strict:
            for r in rows:
                report.checked_rows += 1
                for label, gap in (("gap_best", r.gap_best), ("gap_avg", r.gap_avg)):
                    if gap > r.bound + slack:
                        report.failures.append(
                            "%s: n=%d %s=%.12g exceeds bound=%.12g + %g"
                            % (path, r.n, label, gap, r.bound, slack))
        else:
            finals.append(rows[-1])
    if not strict and finals:
        ns = {r.n for r in finals}
        if len(ns) > 1:
            report.failures.append("traces end at different n: %s" % sorted(ns))
        else:
            report.checked_rows += len(finals)
            bound = max(r.bound for r in finals)
            for label, mean in (
                    ("gap_best", statistics.fmean(r.gap_best for r in finals)),
                    ("gap_avg", statistics.fmean(r.gap_avg for r in finals))):
                if mean > 1.10 * bound + slack:
                    report.failures.append(
                        "seed-mean %s=%.12g at n=%d exceeds 1.10 x bound=%.12g + %g"
                        % (label, mean, finals[0].n, bound, slack))
    return report


class CompareResult:

    def __init__(self, rows, csv_path):
        self.rows = rows
        self.csv_path = csv_path

    def table(self):
        header = ("preset", "final_gap_best", "final_nnz", "median_backward_step")
        cells = [header] + [
            (r["preset"], "%.6g" % r["final_gap_best"], str(r["final_nnz"]),
             "%.6g" % r["median_backward_step"]) for r in self.rows]
        widths = [max(len(row[j]) for row in cells) for j in range(len(header))]
        lines = []
        for i, row in enumerate(cells):
            lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
            if i == 0:
                lines.append("  ".join("-" * w for w in widths))
        return "\n".join(lines)


def compare(cfg, presets, out_dir=None, unsafe=False, stride=None):
    """Run several presets on the config's problem and tabulate the outcome.

    Presets named in the config's [schedule] section keep its parameters;
    the others use preset defaults (s_n = n**-0.5, c = 1).
    """
    if not presets:
        raise ValueError("no presets given")
    out = Path(out_dir) if out_dir is not None else Path(cfg.directory)
    out.mkdir(parents=True, exist_ok=True)
    problem = build_problem_from_config(cfg)
    reference = cached_reference(cfg, problem, out)
    rows = []
    for preset in presets:
        if preset == cfg.preset:
            schedule = build_schedule_from_config(cfg)
        elif preset == "rda":
            schedule = schedule_preset("rda")
        elif preset == "averaged_leap_frog":
            schedule = schedule_preset(preset, mu=cfg.mu if cfg.mu is not None else 0.5)
        else:
            schedule = schedule_preset(preset)
        result = run(problem, schedule, cfg.iterations, mode=cfg.mode,
                     seed=cfg.seeds[0],
                     stride=stride if stride is not None else cfg.stride,
                     x1=cfg.x1, reference=reference, unsafe=unsafe,
                     timing=cfg.timing)
        if not result.rows:
            raise RuntimeError("preset %s logged no rows; lower the stride" % preset)
        last = result.rows[-1]
        rows.append({
            "preset": preset,
            "final_gap_best": last.gap_best,
            "final_nnz": last.nnz,
            "median_backward_step": statistics.median(
                r.backward_step for r in result.rows),
        })
    csv_path = out / ("%s_compare.csv" % cfg.name)
    lines = ["preset,final_gap_best,final_nnz,median_backward_step"]
    for r in rows:
        lines.append("%s,%s,%d,%s" % (r["preset"], _fmt(r["final_gap_best"]),
                                      r["final_nnz"],
                                      _fmt(r["median_backward_step"])))
    fd, tmp = tempfile.mkstemp(dir=out, suffix=".tmp")
    with os.fdopen(fd, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
    os.replace(tmp, csv_path)
    return CompareResult(rows, csv_path)
