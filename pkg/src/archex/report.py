"""Run driver and report writers.

Artifacts written to the output directory:

``report.json``
    per-benchmark results plus run metadata
``evaluations.csv``
    every methodology evaluation request, in order
``oracle_evaluations.csv``
    every exhaustive-search evaluation (oracle runs only)
``pareto_<benchmark>.csv``
    plot data: v_power, v_time, on_front, is_solution (oracle runs only)
``summary.txt``
    fixed-width table for humans
``figures/``
    significance and Pareto/objective-line PNGs

Watts and milliseconds are written with 3 decimals, objectives and
normalized values with 6. Normalization constants keep full precision so
that reports can be compared against each other exactly.
"""

from __future__ import annotations

import csv
import datetime as _dt
import json
import logging
import re
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__
from .config import RunConfig
from .errors import ArchexError, MismatchedRun
from .evaluator import BenchmarkId, CachedEvaluator
from .explorer import BenchmarkResult, explore, phase1_one_shot
from .objective import NormConstants, RawMetrics, Weights, normalize, score
from .oracle import OracleResult, RunSummary, compare, full_exhaustive, plot_rows
from .space import DesignSpace, format_setting

log = logging.getLogger(__name__)

REPORT_FILE = "report.json"
LOG_FILE = "evaluations.csv"
ORACLE_LOG_FILE = "oracle_evaluations.csv"
SUMMARY_FILE = "summary.txt"
FIGURE_DIR = "figures"


def r3(x: float) -> float:
    return round(x, 3)


def r6(x: float) -> float:
    return round(x, 6)


def safe_name(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]", "_", name)


def _settings_doc(config, space: DesignSpace) -> dict:
    return {name: json.loads(format_setting(config[name])) for name in space.names}


def _error_doc(exc: BaseException) -> dict:
    doc = {"type": type(exc).__name__, "message": str(exc)}
    command = getattr(exc, "command", None)
    if command:
        doc["command"] = command
    return doc


def _norms_doc(norms: NormConstants) -> dict:
    return {"max_power": norms.max_power, "max_time": norms.max_time}


def _stats_doc(stats) -> dict:
    return {
        "quality_gap_power_pct": round(stats.quality_gap_power, 4),
        "quality_gap_time_pct": round(stats.quality_gap_time, 4),
        "objective_gap_pct": round(stats.objective_gap, 4),
        "explored_fraction": r6(stats.explored_fraction),
        "speedup": round(stats.speedup, 4),
    }


def benchmark_doc(result: BenchmarkResult, space: DesignSpace, oracle: OracleResult | None = None,
                  oracle_error: BaseException | None = None) -> dict:
    doc = {
        "name": result.benchmark.name,
        "category": result.benchmark.category,
        "status": "ok",
        "configuration": _settings_doc(result.configuration, space),
        "power_watts": r3(result.raw.total_power),
        "exec_time_ms": r3(result.raw.exec_time),
        "objective": r6(result.objective),
        "phase1_objective": r6(result.phase1_objective),
        "normalization": _norms_doc(result.norms),
        "significance": {k: r6(v) for k, v in result.significance.d.items()},
        "partition": {
            "order": list(result.partition.index_order),
            "exhaustive": list(result.partition.exhaustive_set),
            "greedy": list(result.partition.greedy_set),
            "frozen": list(result.partition.frozen_set),
        },
        "provenance": dict(result.best.provenance),
        "evaluations": {
            "total_calls": result.counter.total_calls,
            "unique": result.counter.unique_configs,
            "bound": result.evaluation_bound(space),
            "by_phase": result.trace.phase_counts(),
        },
        "cardinality": result.cardinality,
        "explored_fraction": r6(result.explored_fraction),
    }
    if oracle is not None:
        doc["oracle"] = {
            "configuration": _settings_doc(oracle.configuration, space),
            "power_watts": r3(oracle.raw.total_power),
            "exec_time_ms": r3(oracle.raw.exec_time),
            "objective": r6(oracle.objective),
            "evaluations": oracle.evaluations,
        }
        doc["comparison"] = _stats_doc(compare(result, oracle))
    if oracle_error is not None:
        doc["oracle_error"] = _error_doc(oracle_error)
    return doc


def failure_doc(bench: BenchmarkId, exc: BaseException) -> dict:
    return {"name": bench.name, "category": bench.category, "status": "failed", "error": _error_doc(exc)}


def metadata_doc(cfg: RunConfig, kind: str, timestamp: str | None) -> dict:
    return {
        "tool": "archex",
        "version": __version__,
        "kind": kind,
        "config_hash": cfg.config_hash(),
        "seed": cfg.seed,
        "generated_at": timestamp,
    }


def run_doc(cfg: RunConfig) -> dict:
    return {
        "parameters": list(cfg.design_space.names),
        "cardinality": cfg.design_space.cardinality,
        "weights": {"power": cfg.weights.w_power, "time": cfg.weights.w_time},
        "threshold": cfg.threshold,
    }


def write_json(path: Path, doc: dict) -> None:
    path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def _csv_writer(fh):
    return csv.writer(fh, lineterminator="\n")


def log_header(space: DesignSpace) -> list[str]:
    return ["benchmark", "phase", *space.names, "power_watts", "exec_time_ms", "v_power", "v_time",
            "objective", "cache_hit"]


def log_rows(space: DesignSpace, records, norms: NormConstants, weights: Weights):
    for r in records:
        v = normalize(r.raw, norms)
        yield [
            r.benchmark.name,
            r.phase_tag,
            *(format_setting(r.config[n]) for n in space.names),
            f"{r.raw.total_power:.3f}",
            f"{r.raw.exec_time:.3f}",
            f"{v.v_power:.6f}",
            f"{v.v_time:.6f}",
            f"{score(r.raw, norms, weights):.6f}",
            "true" if r.cache_hit else "false",
        ]


def write_log(path: Path, space: DesignSpace, batches, weights: Weights) -> None:
    """``batches`` is an iterable of ``(records, norms)`` pairs."""
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = _csv_writer(fh)
        w.writerow(log_header(space))
        for records, norms in batches:
            w.writerows(log_rows(space, records, norms, weights))


def write_plot_data(path: Path, rows) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = _csv_writer(fh)
        w.writerow(["v_power", "v_time", "on_front", "is_solution"])
        for vp, vt, on, sol in rows:
            w.writerow([f"{vp:.6f}", f"{vt:.6f}", "true" if on else "false", "true" if sol else "false"])


def _fmt_config(doc: dict) -> str:
    return "/".join(str(v) for v in doc.values())


def summary_text(doc: dict) -> str:
    """Fixed-width table of the per-benchmark results in a report document."""
    run = doc["run"]
    lines = [
        f"archex {doc['metadata']['kind']} report",
        f"parameters: {', '.join(run['parameters'])} (cardinality {run['cardinality']})",
        f"weights: power={run['weights']['power']} time={run['weights']['time']}  threshold T={run['threshold']}",
        "",
    ]
    header = ["benchmark", "status", "configuration", "power_W", "time_ms", "objective", "unique", "explored_%"]
    with_cmp = any("comparison" in b for b in doc["benchmarks"])
    if with_cmp:
        header += ["gap_power_%", "gap_time_%", "gap_obj_%", "speedup"]
    rows = []
    for b in doc["benchmarks"]:
        if b["status"] != "ok":
            rows.append([b["name"], "FAILED", b["error"]["type"], "", "", "", "", ""] + ([""] * 4 if with_cmp else []))
            continue
        row = [
            b["name"], "ok", _fmt_config(b["configuration"]),
            f"{b['power_watts']:.3f}", f"{b['exec_time_ms']:.3f}", f"{b['objective']:.6f}",
            str(b["evaluations"]["unique"]) if "evaluations" in b else str(b.get("unique", "")),
            f"{100 * b['explored_fraction']:.2f}" if "explored_fraction" in b else "",
        ]
        if with_cmp:
            c = b.get("comparison")
            row += [f"{c['quality_gap_power_pct']:.2f}", f"{c['quality_gap_time_pct']:.2f}",
                    f"{c['objective_gap_pct']:.2f}", f"{c['speedup']:.2f}"] if c else [""] * 4
        rows.append(row)
    widths = [max(len(str(x)) for x in col) for col in zip(header, *rows)]
    fmt = "  ".join(f"{{:<{w}}}" for w in widths)
    lines.append(fmt.format(*header).rstrip())
    lines.append(fmt.format(*("-" * w for w in widths)))
    lines.extend(fmt.format(*r).rstrip() for r in rows)
    return "\n".join(lines) + "\n"


def _timestamp() -> str:
    return _dt.datetime.now(_dt.timezone.utc).replace(microsecond=0).isoformat()


def _map(fn, items, jobs):
    if jobs > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def run(cfg: RunConfig, out_dir=None, jobs: int = 1, plots: bool = True, timestamp: str | None = None) -> int:
    """Explore every benchmark (and the oracle when enabled); write all artifacts.

    Returns 0 when every benchmark succeeded, 1 otherwise. Outputs for the
    benchmarks that did succeed are written either way.
    """
    out = Path(out_dir or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    space = cfg.design_space
    evaluator = cfg.build_evaluator()
    benches = cfg.benchmark_ids

    started = time.perf_counter()
    exploration = explore(space, CachedEvaluator(evaluator), benches, cfg.weights, cfg.threshold, jobs=jobs)
    method_wall = time.perf_counter() - started
    for name, exc in exploration.failures.items():
        log.error("benchmark %s failed: %s", name, exc)

    oracles: dict[str, OracleResult] = {}
    oracle_errors: dict[str, BaseException] = {}
    if cfg.oracle:
        oracle_cache = CachedEvaluator(evaluator)

        def one(bench):
            res = exploration.results[bench.name]
            try:
                return bench.name, full_exhaustive(space, oracle_cache, bench, cfg.weights, res.norms,
                                                   cfg.oracle_budget)
            except ArchexError as exc:
                return bench.name, exc

        todo = [b for b in benches if b.name in exploration.results]
        started = time.perf_counter()
        for name, outcome in _map(one, todo, jobs):
            if isinstance(outcome, OracleResult):
                oracles[name] = outcome
            else:
                oracle_errors[name] = outcome
                log.error("oracle for %s failed: %s", name, outcome)
        oracle_wall = time.perf_counter() - started
        # wall time stays out of the report files so they remain reproducible
        log.info("wall time: methodology %.2f s, oracle %.2f s, ratio %.2fx", method_wall, oracle_wall,
                 oracle_wall / method_wall if method_wall > 0 else float("inf"))

    entries = []
    for bench in benches:
        if bench.name in exploration.failures:
            entries.append(failure_doc(bench, exploration.failures[bench.name]))
        else:
            entries.append(benchmark_doc(exploration.results[bench.name], space,
                                         oracles.get(bench.name), oracle_errors.get(bench.name)))
    doc = {
        "metadata": metadata_doc(cfg, "explore", timestamp if timestamp is not None else _timestamp()),
        "run": run_doc(cfg),
        "benchmarks": entries,
    }
    write_json(out / REPORT_FILE, doc)
    results = [exploration.results[b.name] for b in benches if b.name in exploration.results]
    write_log(out / LOG_FILE, space, ((r.trace.records, r.norms) for r in results), cfg.weights)
    if cfg.oracle:
        write_log(out / ORACLE_LOG_FILE, space,
                  ((oracles[r.benchmark.name].records, r.norms) for r in results if r.benchmark.name in oracles),
                  cfg.weights)
    (out / SUMMARY_FILE).write_text(summary_text(doc), encoding="utf-8")

    plot_data = {}
    for r in results:
        o = oracles.get(r.benchmark.name)
        if o is not None:
            rows = plot_rows(o.records, r.norms, r.configuration)
            plot_data[r.benchmark.name] = rows
            write_plot_data(out / f"pareto_{safe_name(r.benchmark.name)}.csv", rows)
    if plots and results:
        _render_figures(out / FIGURE_DIR, results, plot_data, cfg.weights)

    return 0 if not exploration.failures and not oracle_errors else 1


def _render_figures(fig_dir: Path, results, plot_data, weights: Weights) -> None:
    from .plotting import pareto_figure, significance_figure

    fig_dir.mkdir(exist_ok=True)
    for r in results:
        name = r.benchmark.name
        significance_figure(r.significance.d, fig_dir / f"significance_{safe_name(name)}.png",
                            title=f"parameter significance: {name}")
        if name in plot_data:
            pareto_figure(plot_data[name], weights.w_power, weights.w_time,
                          fig_dir / f"pareto_{safe_name(name)}.png", title=f"Pareto front: {name}")


def run_oracle(cfg: RunConfig, out_dir=None, jobs: int = 1, timestamp: str | None = None) -> int:
    """Stand-alone exhaustive search; normalization comes from the one-shot probes."""
    out = Path(out_dir or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    space = cfg.design_space
    cache = CachedEvaluator(cfg.build_evaluator())
    benches = cfg.benchmark_ids

    def one(bench):
        try:
            _, _, norms = phase1_one_shot(space, cache, bench, cfg.weights)
            return bench, full_exhaustive(space, cache, bench, cfg.weights, norms, cfg.oracle_budget)
        except ArchexError as exc:
            return bench, exc

    entries, ok = [], []
    for bench, outcome in _map(one, benches, jobs):
        if isinstance(outcome, OracleResult):
            ok.append(outcome)
            entries.append({
                "name": bench.name,
                "category": bench.category,
                "status": "ok",
                "configuration": _settings_doc(outcome.configuration, space),
                "power_watts": r3(outcome.raw.total_power),
                "exec_time_ms": r3(outcome.raw.exec_time),
                "objective": r6(outcome.objective),
                "normalization": _norms_doc(outcome.norms),
                "evaluations": {"unique": outcome.evaluations},
                "cardinality": space.cardinality,
            })
        else:
            log.error("oracle for %s failed: %s", bench.name, outcome)
            entries.append(failure_doc(bench, outcome))
    doc = {
        "metadata": metadata_doc(cfg, "oracle", timestamp if timestamp is not None else _timestamp()),
        "run": run_doc(cfg),
        "benchmarks": entries,
    }
    write_json(out / REPORT_FILE, doc)
    write_log(out / ORACLE_LOG_FILE, space, ((o.records, o.norms) for o in ok), cfg.weights)
    (out / SUMMARY_FILE).write_text(summary_text(doc), encoding="utf-8")
    return 0 if len(ok) == len(benches) else 1


def load_report(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def _summary_from_entry(entry: dict, run: dict) -> RunSummary:
    norms = entry.get("normalization")
    return RunSummary(
        benchmark=entry["name"],
        raw=RawMetrics(entry["power_watts"], entry["exec_time_ms"]),
        objective=entry["objective"],
        evaluations=entry["evaluations"]["unique"],
        cardinality=entry.get("cardinality", run["cardinality"]),
        norms=NormConstants(norms["max_power"], norms["max_time"]) if norms else None,
        weights=Weights(run["weights"]["power"], run["weights"]["time"]),
    )


def compare_reports(method_doc: dict, oracle_doc: dict) -> list[tuple[str, object]]:
    """Pair benchmarks by name; returns ``(name, ComparisonStats | error)``."""
    m_run, o_run = method_doc["run"], oracle_doc["run"]
    if m_run["parameters"] != o_run["parameters"] or m_run["cardinality"] != o_run["cardinality"]:
        raise MismatchedRun("reports describe different design spaces")
    oracle_entries = {b["name"]: b for b in oracle_doc["benchmarks"]}
    out = []
    for entry in method_doc["benchmarks"]:
        name = entry["name"]
        other = oracle_entries.get(name)
        if entry["status"] != "ok" or other is None or other["status"] != "ok":
            out.append((name, MismatchedRun(f"no successful result pair for {name!r}")))
            continue
        try:
            stats = compare(_summary_from_entry(entry, m_run), _summary_from_entry(other, o_run))
        except MismatchedRun as exc:
            stats = exc
        out.append((name, stats))
    return out


def comparison_table(pairs) -> str:
    header = ["benchmark", "gap_power_%", "gap_time_%", "gap_obj_%", "explored_%", "speedup"]
    rows = []
    for name, stats in pairs:
        if isinstance(stats, Exception):
            rows.append([name, "error:", str(stats), "", "", ""])
        else:
            rows.append([name, f"{stats.quality_gap_power:.2f}", f"{stats.quality_gap_time:.2f}",
                         f"{stats.objective_gap:.2f}", f"{100 * stats.explored_fraction:.2f}",
                         f"{stats.speedup:.2f}"])
    widths = [max(len(str(x)) for x in col) for col in zip(header, *rows)]
    fmt = "  ".join(f"{{:<{w}}}" for w in widths)
    return "\n".join([fmt.format(*header).rstrip(), *(fmt.format(*r).rstrip() for r in rows)]) + "\n"
