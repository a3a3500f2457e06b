"""Ground truth: full exhaustive search, Pareto front, tangency and comparison."""

from __future__ import annotations

import math
from collections.abc import Iterable
from dataclasses import dataclass

from .errors import BudgetExceeded, EmptyInput, MismatchedRun, SolutionNotInRecords
from .evaluator import BenchmarkId, CachedEvaluator, EvaluationRecord
from .objective import NormConstants, RawMetrics, Weights, normalize, score
from .space import Configuration, DesignSpace

DEFAULT_BUDGET = 10**6
TANGENCY_TOL = 1e-9


@dataclass
class OracleResult:
    benchmark: BenchmarkId
    configuration: Configuration
    raw: RawMetrics
    objective: float
    records: list[EvaluationRecord]
    norms: NormConstants
    weights: Weights

    @property
    def evaluations(self) -> int:
        return len(self.records)


def full_exhaustive(space: DesignSpace, evaluator, benchmark: BenchmarkId, weights: Weights,
                    norms: NormConstants, budget: int = DEFAULT_BUDGET) -> OracleResult:
    """Evaluate every configuration; ties go to the first in enumeration order."""
    if space.cardinality > budget:
        raise BudgetExceeded(f"design space has {space.cardinality} points, budget is {budget}")
    records = []
    best = None
    f_best = math.inf
    for config in space.enumerate():
        if isinstance(evaluator, CachedEvaluator):
            raw, hit = evaluator.request(config, benchmark)
        else:
            raw, hit = evaluator.evaluate(config, benchmark), False
        records.append(EvaluationRecord(config, benchmark, raw, "oracle", hit))
        f = score(raw, norms, weights)
        if f < f_best:
            f_best, best = f, (config, raw)
    return OracleResult(benchmark, best[0], best[1], f_best, records, norms, weights)


@dataclass(frozen=True)
class ParetoPoint:
    power: float
    time: float
    config: Configuration | None = None


@dataclass(frozen=True)
class ParetoFront:
    points: tuple[ParetoPoint, ...]
    # every distinct (power, time) pair the front was extracted from
    source: frozenset

    def __len__(self):
        return len(self.points)

    def contains(self, power: float, time: float) -> bool:
        return any(p.power == power and p.time == time for p in self.points)


def _as_point(item) -> ParetoPoint:
    if isinstance(item, ParetoPoint):
        return item
    if isinstance(item, EvaluationRecord):
        return ParetoPoint(item.raw.total_power, item.raw.exec_time, item.config)
    if isinstance(item, RawMetrics):
        return ParetoPoint(item.total_power, item.exec_time)
    power, time, *rest = item
    return ParetoPoint(float(power), float(time), rest[0] if rest else None)


def pareto_front(records: Iterable) -> ParetoFront:
    """Non-dominated subset under (minimize power, minimize time).

    Accepts evaluation records, RawMetrics, ParetoPoints or
    ``(power, time[, config])`` tuples. Exact duplicates collapse to the
    first one encountered. The result is sorted by power ascending.
    """
    points = [_as_point(r) for r in records]
    if not points:
        raise EmptyInput("cannot extract a Pareto front from no points")
    # stable sort: among exact duplicates the first encountered stays first
    order = sorted(range(len(points)), key=lambda i: (points[i].power, points[i].time))
    front = []
    best_time = math.inf
    for i in order:
        p = points[i]
        if p.time < best_time:
            front.append(p)
            best_time = p.time
    return ParetoFront(tuple(front), frozenset((p.power, p.time) for p in points))


@dataclass(frozen=True)
class TangencyResult:
    tangent: bool
    solution_value: float
    min_value: float
    argmin: ParetoPoint

    def __bool__(self):
        return self.tangent


def tangency_check(front: ParetoFront, weights: Weights, norms: NormConstants, solution) -> TangencyResult:
    """Does the objective line through ``solution`` support the front?

    True iff no front point has a strictly smaller weighted normalized value
    than the solution (within ``TANGENCY_TOL``). ``solution`` is anything
    :func:`pareto_front` accepts as a point; its metrics must be among the
    points the front was built from.
    """
    sol = _as_point(solution)
    if (sol.power, sol.time) not in front.source:
        raise SolutionNotInRecords("solution metrics are not among the evaluated points")

    def value(p):
        v = normalize(RawMetrics(p.power, p.time), norms)
        return weights.w_power * v.v_power + weights.w_time * v.v_time

    sol_value = value(sol)
    argmin = min(front.points, key=value)
    min_value = value(argmin)
    return TangencyResult(sol_value <= min_value + TANGENCY_TOL, sol_value, min_value, argmin)


@dataclass(frozen=True)
class RunSummary:
    """What :func:`compare` needs from either side of a comparison."""

    benchmark: str
    raw: RawMetrics
    objective: float
    evaluations: int
    cardinality: int
    norms: NormConstants | None = None
    weights: Weights | None = None


@dataclass(frozen=True)
class ComparisonStats:
    quality_gap_power: float  # percent
    quality_gap_time: float
    objective_gap: float
    explored_fraction: float
    speedup: float


def summarize(result) -> RunSummary:
    """RunSummary from a BenchmarkResult or an OracleResult."""
    if isinstance(result, RunSummary):
        return result
    if isinstance(result, OracleResult):
        evaluations, cardinality = result.evaluations, result.evaluations
    else:
        evaluations, cardinality = result.unique_evaluations, result.cardinality
    return RunSummary(
        benchmark=result.benchmark.name,
        raw=result.raw,
        objective=result.objective,
        evaluations=evaluations,
        cardinality=cardinality,
        norms=result.norms,
        weights=getattr(result, "weights", None),
    )


def _pct(method: float, oracle: float) -> float:
    return (method - oracle) / oracle * 100.0


def compare(method_report, oracle_result) -> ComparisonStats:
    """Signed percent gaps of the methodology against the oracle.

    Gaps are ``(method - oracle) / oracle * 100``; speedup counts
    evaluations, not wall time.
    """
    m, o = summarize(method_report), summarize(oracle_result)
    if m.benchmark != o.benchmark:
        raise MismatchedRun(f"benchmarks differ: {m.benchmark!r} vs {o.benchmark!r}")
    if m.cardinality != o.cardinality:
        raise MismatchedRun(f"design spaces differ: {m.cardinality} vs {o.cardinality} points")
    if m.norms is not None and o.norms is not None and m.norms != o.norms:
        raise MismatchedRun("normalization constants differ")
    if m.weights is not None and o.weights is not None and m.weights != o.weights:
        raise MismatchedRun("weights differ")
    return ComparisonStats(
        quality_gap_power=_pct(m.raw.total_power, o.raw.total_power),
        quality_gap_time=_pct(m.raw.exec_time, o.raw.exec_time),
        objective_gap=_pct(m.objective, o.objective),
        explored_fraction=m.evaluations / m.cardinality,
        speedup=o.evaluations / m.evaluations,
    )


def plot_rows(records, norms: NormConstants, solution: Configuration | None = None):
    """Rows ``(v_power, v_time, on_front, is_solution)`` for every record."""
    records = list(records)
    front = pareto_front(records)
    on = {(p.power, p.time) for p in front.points}
    rows = []
    for r in records:
        v = normalize(r.raw, norms)
        rows.append((
            v.v_power,
            v.v_time,
            (r.raw.total_power, r.raw.exec_time) in on,
            solution is not None and r.config == solution,
        ))
    return rows
