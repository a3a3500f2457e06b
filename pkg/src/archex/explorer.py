"""Four-phase configuration search, run independently per benchmark.

1. one-shot: probe every parameter at its first and last setting (all other
   parameters at their first setting), derive a signed significance and an
   initial best setting per parameter;
2. partition: rank parameters by |significance| and split them into an
   exhaustive set (joint search space bounded by the threshold), a greedy
   set (half of the rest, rounded up) and a frozen set;
3. exhaustive: try every combination of the exhaustive set with all other
   parameters at their current best;
4. greedy: sweep each greedy parameter from its one-shot best end and stop
   at the first setting that does not improve the incumbent.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from decimal import Decimal

from .errors import ArchexError
from .evaluator import BenchmarkId, CachedEvaluator, EvaluationCounter, EvaluationRecord
from .objective import NormConstants, RawMetrics, Weights, score
from .space import Configuration, DesignSpace, compose

ONE_SHOT, EXHAUSTIVE, GREEDY = "one-shot", "exhaustive", "greedy"


@dataclass(frozen=True)
class SignificanceTable:
    """Signed objective difference F(last) - F(first) per parameter."""

    d: dict[str, float]

    def magnitude_order(self, space: DesignSpace) -> tuple[str, ...]:
        # sorted() is stable, so ties keep the original parameter order
        return tuple(sorted(space.names, key=lambda name: -abs(self.d[name])))


@dataclass
class BestSettings:
    values: dict[str, Decimal]
    provenance: dict[str, str]

    def configuration(self, space: DesignSpace) -> Configuration:
        return space.configuration(self.values)

    def copy(self) -> "BestSettings":
        return BestSettings(dict(self.values), dict(self.provenance))


@dataclass(frozen=True)
class Partition:
    exhaustive_set: tuple[str, ...]
    greedy_set: tuple[str, ...]
    frozen_set: tuple[str, ...]
    index_order: tuple[str, ...]


@dataclass(frozen=True)
class ExplorationThreshold:
    t: int

    def __post_init__(self):
        if not isinstance(self.t, int) or isinstance(self.t, bool) or self.t < 1:
            raise ValueError(f"exploration threshold must be an integer >= 1, got {self.t!r}")


@dataclass
class PhaseTrace:
    records: list[EvaluationRecord] = field(default_factory=list)
    # (phase tag, index into records, best objective after that evaluation)
    timeline: list[tuple[str, int, float]] = field(default_factory=list)

    def phase_counts(self) -> dict[str, dict[str, int]]:
        out = {}
        for r in self.records:
            c = out.setdefault(r.phase_tag, {"requested": 0, "unique": 0})
            c["requested"] += 1
            c["unique"] += not r.cache_hit
        return out


def _request(evaluator, config, benchmark) -> tuple[RawMetrics, bool]:
    if isinstance(evaluator, CachedEvaluator):
        return evaluator.request(config, benchmark)
    return evaluator.evaluate(config, benchmark), False


def _evaluate(evaluator, config, benchmark, phase, trace) -> RawMetrics:
    raw, hit = _request(evaluator, config, benchmark)
    if trace is not None:
        trace.records.append(EvaluationRecord(config, benchmark, raw, phase, hit))
    return raw


def phase1_one_shot(space: DesignSpace, evaluator, benchmark: BenchmarkId, weights: Weights, trace=None):
    """One-shot probes, significance and normalization constants.

    All 2n probes are evaluated before any objective is computed: the
    normalization constants are the maxima over these probes, so the
    objectives (and hence the significance values) are well defined.
    Returns ``(BestSettings, SignificanceTable, NormConstants)``.
    """
    s_first = space.first_configuration()
    probes = []
    for p in space.parameters:
        s_last = s_first.with_setting(p.name, p.last)
        raw_f = _evaluate(evaluator, s_first, benchmark, "phase1", trace)
        raw_l = _evaluate(evaluator, s_last, benchmark, "phase1", trace)
        probes.append((p, raw_f, raw_l))

    norms = NormConstants.from_metrics(m for _, f, l in probes for m in (f, l))
    d, values, provenance = {}, {}, {}
    for p, raw_f, raw_l in probes:
        d[p.name] = score(raw_l, norms, weights) - score(raw_f, norms, weights)
        values[p.name] = p.first if d[p.name] > 0 else p.last
        provenance[p.name] = ONE_SHOT
    return BestSettings(values, provenance), SignificanceTable(d), norms


def phase2_partition(sig: SignificanceTable, space: DesignSpace, t) -> Partition:
    """Split parameters into exhaustive, greedy and frozen sets.

    Parameters are admitted to the exhaustive set in significance order
    while the product of their setting counts stays within ``t``; the first
    parameter that would overflow is not admitted and heads the greedy set.
    """
    limit = t.t if isinstance(t, ExplorationThreshold) else ExplorationThreshold(t).t
    order = sig.magnitude_order(space)
    exhaustive = []
    product = 1
    i = 0
    while i < len(order):
        size = space.parameter(order[i]).size
        if product * size > limit:
            break
        product *= size
        exhaustive.append(order[i])
        i += 1
    num_greedy = math.ceil((space.n - len(exhaustive)) / 2)
    greedy = order[i:i + num_greedy]
    frozen = order[i + num_greedy:]
    return Partition(tuple(exhaustive), tuple(greedy), tuple(frozen), order)


def phase3_exhaustive(space, partition: Partition, best: BestSettings, evaluator, benchmark,
                      weights: Weights, norms: NormConstants, trace=None):
    """Exhaustive search over the exhaustive set; returns ``(best, f_best)``.

    The partial space is enumerated in original parameter order, last
    parameter fastest. Only strict improvements replace the incumbent, so
    ties go to the earlier combination. With an empty exhaustive set the
    one-shot best configuration is evaluated once to seed ``f_best``.
    """
    in_e = set(partition.exhaustive_set)
    e_names = [name for name in space.names if name in in_e]
    fixed = {name: best.values[name] for name in space.names if name not in in_e}
    best = best.copy()
    f_best = math.inf
    for partial in space.enumerate_partial(e_names):
        config = compose(partial, fixed, space)
        raw = _evaluate(evaluator, config, benchmark, "phase3", trace)
        f = score(raw, norms, weights)
        if f < f_best:
            f_best = f
            best.values.update(partial)
        if trace is not None:
            trace.timeline.append(("phase3", len(trace.records) - 1, f_best))
    for name in e_names:
        best.provenance[name] = EXHAUSTIVE
    return best, f_best


def sweep_order(settings: tuple[Decimal, ...], significance: float) -> tuple[Decimal, ...]:
    """Ascending unless the last setting won the one-shot probe (d < 0)."""
    return tuple(reversed(settings)) if significance < 0 else tuple(settings)


def phase4_greedy(space, partition: Partition, sig: SignificanceTable, best: BestSettings, evaluator,
                  benchmark, weights: Weights, norms: NormConstants, f_best: float, trace=None):
    """Early-stopping sweeps over the greedy set; returns ``(best, f_best)``.

    Revisiting the incumbent setting (a cache hit whose objective equals
    ``f_best``) does not end the sweep; the stop rule applies from the first
    other setting onward.
    """
    best = best.copy()
    for name in partition.greedy_set:
        incumbent = best.values[name]
        for value in sweep_order(space.parameter(name).settings, sig.d[name]):
            config = space.configuration({**best.values, name: value})
            raw = _evaluate(evaluator, config, benchmark, "phase4", trace)
            f = score(raw, norms, weights)
            improved = f < f_best
            if improved:
                f_best = f
                best.values[name] = value
            if trace is not None:
                trace.timeline.append(("phase4", len(trace.records) - 1, f_best))
            if not improved and value != incumbent:
                break
        best.provenance[name] = GREEDY
    return best, f_best


@dataclass
class BenchmarkResult:
    benchmark: BenchmarkId
    configuration: Configuration
    raw: RawMetrics
    objective: float
    norms: NormConstants
    weights: Weights
    significance: SignificanceTable
    partition: Partition
    best: BestSettings
    phase1_best: Configuration
    phase1_objective: float
    counter: EvaluationCounter
    cardinality: int
    trace: PhaseTrace

    @property
    def unique_evaluations(self) -> int:
        return self.counter.unique_configs

    @property
    def explored_fraction(self) -> float:
        return self.counter.unique_configs / self.cardinality

    def evaluation_bound(self, space: DesignSpace) -> int:
        """Ceiling on unique evaluations implied by the partition."""
        e = math.prod(space.parameter(n).size for n in self.partition.exhaustive_set)
        g = sum(space.parameter(n).size for n in self.partition.greedy_set)
        return space.n + 1 + e + g


@dataclass
class ExplorationReport:
    results: dict[str, BenchmarkResult]
    failures: dict[str, ArchexError]

    @property
    def ok(self) -> bool:
        return not self.failures


def explore_benchmark(space: DesignSpace, evaluator, benchmark: BenchmarkId, weights: Weights, t) -> BenchmarkResult:
    """Run all four phases for one benchmark.

    ``evaluator`` should be a :class:`CachedEvaluator`; a bare evaluator is
    wrapped in a fresh one.
    """
    if not isinstance(evaluator, CachedEvaluator):
        evaluator = CachedEvaluator(evaluator)
    threshold = t if isinstance(t, ExplorationThreshold) else ExplorationThreshold(t)
    trace = PhaseTrace()
    best, sig, norms = phase1_one_shot(space, evaluator, benchmark, weights, trace)
    phase1_best = best.configuration(space)
    partition = phase2_partition(sig, space, threshold)
    best, f_best = phase3_exhaustive(space, partition, best, evaluator, benchmark, weights, norms, trace)
    best, f_best = phase4_greedy(space, partition, sig, best, evaluator, benchmark, weights, norms, f_best, trace)

    final = best.configuration(space)
    raw = evaluator.evaluate(final, benchmark)
    phase1_raw = evaluator.evaluate(phase1_best, benchmark)
    # the two lookups above are cache hits and are kept out of the trace
    return BenchmarkResult(
        benchmark=benchmark,
        configuration=final,
        raw=raw,
        objective=f_best,
        norms=norms,
        weights=weights,
        significance=sig,
        partition=partition,
        best=best,
        phase1_best=phase1_best,
        phase1_objective=score(phase1_raw, norms, weights),
        counter=_counter_from_trace(trace),
        cardinality=space.cardinality,
        trace=trace,
    )


def _counter_from_trace(trace: PhaseTrace) -> EvaluationCounter:
    return EvaluationCounter(
        total_calls=len(trace.records),
        unique_configs=len({r.config for r in trace.records}),
    )


def explore(space: DesignSpace, evaluator, benchmarks, weights: Weights, t, jobs: int = 1) -> ExplorationReport:
    """Explore every benchmark; one benchmark's failure does not stop the others."""
    cache = evaluator if isinstance(evaluator, CachedEvaluator) else CachedEvaluator(evaluator)
    benchmarks = list(benchmarks)

    def one(bench):
        try:
            return bench, explore_benchmark(space, cache, bench, weights, t)
        except ArchexError as exc:
            return bench, exc

    if jobs > 1 and len(benchmarks) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(one, benchmarks))
    else:
        outcomes = [one(b) for b in benchmarks]

    results, failures = {}, {}
    for bench, outcome in outcomes:
        if isinstance(outcome, BenchmarkResult):
            results[bench.name] = outcome
        else:
            failures[bench.name] = outcome
    return ExplorationReport(results, failures)
