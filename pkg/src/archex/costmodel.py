"""Analytic power/performance model used as the built-in evaluator.

The model is deliberately simple and monotone so that global optima are
known in closed form for the extreme weightings, while per-workload working
sets still create cache-size trade-offs for intermediate weights.

Execution time (ms)::

    amdahl   = 1 / ((1 - parallel_fraction) + parallel_fraction / cores)
    r(ws, size, k) = min(1, (ws / size) ** k)          local miss rate
    l1       = (r(inst_ws, L1-I, 0.5) + r(data_ws, L1-D, 0.5)) / 2
    l2       = l1 * r(inst_ws + data_ws, L2, l2_locality)
    l3       = l2 * r(inst_ws + data_ws, L3, l3_locality)
    cpi      = base_cpi + mem_access_fraction * (l1 * pen_l1 + l2 * pen_l2
                                                 + l3 * (pen_l3 + pen_mem))
    time_ms  = instruction_count * cpi / (freq_mhz * 1e3 * amdahl)

Misses compose inclusively: each level only sees the previous level's
misses. An L3 miss pays the L3 miss penalty plus the memory latency. The
L1 exponent 0.5 is the usual square-root rule of thumb.

Power (W)::

    cores * cap_per_core * (freq_mhz / 1000) ** 3
    + cores * leak_per_core
    + leak_per_kb_cache * (L1-I + L1-D + L2 + L3)
    + idle_floor
"""

from __future__ import annotations

import zlib
from dataclasses import asdict, dataclass, fields, replace

import numpy as np

from .errors import MissingParameter, UnknownCategory
from .evaluator import CATEGORIES, UNCATEGORIZED, BenchmarkId
from .objective import RawMetrics

F_REF_MHZ = 1000.0
L1_LOCALITY = 0.5

ROLES = ("cores", "frequency", "l1i", "l1d", "l2", "l3")
DEFAULT_NAMES = {
    "cores": "Cores",
    "frequency": "Frequency",
    "l1i": "L1-I",
    "l1d": "L1-D",
    "l2": "L2",
    "l3": "L3",
}


@dataclass(frozen=True)
class WorkloadProfile:
    name: str
    instruction_count: int
    parallel_fraction: float
    base_cpi: float
    inst_working_set: float  # kB
    data_working_set: float  # kB
    l2_locality: float
    l3_locality: float
    miss_penalty_l1: float  # cycles
    miss_penalty_l2: float
    miss_penalty_l3: float
    miss_penalty_mem: float
    mem_access_fraction: float

    def __post_init__(self):
        if self.instruction_count <= 0:
            raise ValueError("instruction_count must be positive")
        for name in ("parallel_fraction", "mem_access_fraction"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        for name in ("base_cpi", "inst_working_set", "data_working_set", "l2_locality", "l3_locality"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for name in ("miss_penalty_l1", "miss_penalty_l2", "miss_penalty_l3", "miss_penalty_mem"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "WorkloadProfile":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown workload field(s): {', '.join(sorted(unknown))}")
        return cls(**data)


@dataclass(frozen=True)
class PowerModelParams:
    cap_per_core: float = 15.0  # W per core at F_REF_MHZ
    leak_per_core: float = 0.02
    leak_per_kb_cache: float = 1e-5
    idle_floor: float = 0.05

    def __post_init__(self):
        vals = (self.cap_per_core, self.leak_per_core, self.leak_per_kb_cache, self.idle_floor)
        if any(v < 0 for v in vals):
            raise ValueError("power coefficients must be non-negative")
        if not any(v > 0 for v in vals):
            raise ValueError("at least one power coefficient must be positive")

    @classmethod
    def low_power(cls) -> "PowerModelParams":
        return cls()

    @classmethod
    def high_performance(cls) -> "PowerModelParams":
        # static power dominates at GHz clocks in this preset
        return cls(cap_per_core=0.001, leak_per_core=0.2, leak_per_kb_cache=2e-5, idle_floor=0.3)


def _settings(config, names, fixed=None) -> dict[str, float]:
    out = {}
    for role in ROLES:
        name = names[role]
        if name in config:
            out[role] = float(config[name])
        elif fixed and name in fixed:
            out[role] = float(fixed[name])
        else:
            raise MissingParameter(f"configuration has no {name!r} ({role}) setting")
    return out


def _local_miss(ws: float, size: float, k: float) -> float:
    return min(1.0, (ws / size) ** k)


def miss_rates(s: dict[str, float], w: WorkloadProfile) -> tuple[float, float, float]:
    """Global miss rates (l1, l2, l3) per memory reference."""
    ws = w.inst_working_set + w.data_working_set
    l1 = 0.5 * (
        _local_miss(w.inst_working_set, s["l1i"], L1_LOCALITY)
        + _local_miss(w.data_working_set, s["l1d"], L1_LOCALITY)
    )
    l2 = l1 * _local_miss(ws, s["l2"], w.l2_locality)
    l3 = l2 * _local_miss(ws, s["l3"], w.l3_locality)
    return l1, l2, l3


def _exec_time(s, w: WorkloadProfile) -> float:
    l1, l2, l3 = miss_rates(s, w)
    stall = l1 * w.miss_penalty_l1 + l2 * w.miss_penalty_l2 + l3 * (w.miss_penalty_l3 + w.miss_penalty_mem)
    cpi = w.base_cpi + w.mem_access_fraction * stall
    amdahl = 1.0 / ((1.0 - w.parallel_fraction) + w.parallel_fraction / s["cores"])
    return w.instruction_count * cpi / (s["frequency"] * 1e3 * amdahl)


def _power(s, p: PowerModelParams) -> float:
    cores = s["cores"]
    dynamic = cores * p.cap_per_core * (s["frequency"] / F_REF_MHZ) ** 3
    cache_kb = s["l1i"] + s["l1d"] + s["l2"] + s["l3"]
    return dynamic + cores * p.leak_per_core + p.leak_per_kb_cache * cache_kb + p.idle_floor


def exec_time(config, w: WorkloadProfile, names=DEFAULT_NAMES) -> float:
    """Execution time in milliseconds."""
    return _exec_time(_settings(config, names), w)


def power(config, w: WorkloadProfile, p: PowerModelParams, names=DEFAULT_NAMES) -> float:
    """Total dynamic plus leakage power in watts.

    ``w`` is accepted for interface symmetry; the power model does not
    depend on the workload.
    """
    return _power(_settings(config, names), p)


# Per-category generator ranges, (low, high) uniform draws. Working sets in
# kB. Signal processing keeps its instruction footprint above its data
# footprint; analysis and graphics carry large data sets.
_COMMON = {
    "instruction_count": (2e7, 8e7),
    "l2_locality": (0.6, 1.6),
    "l3_locality": (0.6, 1.6),
    "miss_penalty_l1": (8.0, 14.0),
    "miss_penalty_l2": (20.0, 40.0),
    "miss_penalty_l3": (40.0, 80.0),
    "miss_penalty_mem": (80.0, 160.0),
}
CATEGORY_RANGES = {
    "data-sensing-aggregation": {
        "parallel_fraction": (0.1, 0.5),
        "base_cpi": (0.9, 1.4),
        "inst_working_set": (4.0, 16.0),
        "data_working_set": (16.0, 96.0),
        "mem_access_fraction": (0.25, 0.45),
    },
    "data-analysis-mining": {
        "parallel_fraction": (0.5, 0.95),
        "base_cpi": (0.8, 1.2),
        "inst_working_set": (8.0, 32.0),
        "data_working_set": (48.0, 256.0),
        "mem_access_fraction": (0.3, 0.45),
    },
    "graphics": {
        "parallel_fraction": (0.6, 0.95),
        "base_cpi": (0.8, 1.3),
        "inst_working_set": (8.0, 24.0),
        "data_working_set": (64.0, 512.0),
        "mem_access_fraction": (0.3, 0.5),
    },
    "signal-processing-communication": {
        "parallel_fraction": (0.3, 0.8),
        "base_cpi": (0.8, 1.2),
        "inst_working_set": (64.0, 192.0),
        "data_working_set": (8.0, 48.0),
        "mem_access_fraction": (0.2, 0.35),
    },
    UNCATEGORIZED: {
        "parallel_fraction": (0.0, 0.95),
        "base_cpi": (0.8, 1.6),
        "inst_working_set": (4.0, 128.0),
        "data_working_set": (8.0, 512.0),
        "mem_access_fraction": (0.2, 0.5),
    },
}
_DRAW_ORDER = (
    "instruction_count",
    "parallel_fraction",
    "base_cpi",
    "inst_working_set",
    "data_working_set",
    "l2_locality",
    "l3_locality",
    "miss_penalty_l1",
    "miss_penalty_l2",
    "miss_penalty_l3",
    "miss_penalty_mem",
    "mem_access_fraction",
)
_CATEGORY_KEYS = (*CATEGORIES, UNCATEGORIZED)


def generate_workload(seed: int, category: str, name: str | None = None, ranges=None) -> WorkloadProfile:
    """Deterministic synthetic workload for ``(seed, category)``.

    ``ranges`` optionally overrides entries of :data:`CATEGORY_RANGES`.
    """
    if category not in CATEGORY_RANGES:
        raise UnknownCategory(f"unknown workload category {category!r}")
    bounds = dict(_COMMON)
    bounds.update(CATEGORY_RANGES[category])
    if ranges:
        bounds.update(ranges.get(category, {}))
    rng = np.random.default_rng([int(seed) & 0xFFFFFFFF, _CATEGORY_KEYS.index(category)])
    draws = {key: float(rng.uniform(*bounds[key])) for key in _DRAW_ORDER}
    draws["instruction_count"] = int(draws["instruction_count"])
    return WorkloadProfile(name=name or f"{category}-{seed}", **draws)


def benchmark_seed(run_seed: int, benchmark_name: str) -> int:
    """Stable per-benchmark seed derived from the run seed and the name."""
    ss = np.random.SeedSequence([int(run_seed) & 0xFFFFFFFF, zlib.crc32(benchmark_name.encode())])
    return int(ss.generate_state(1)[0])


class CostModelEvaluator:
    """Evaluator backed by the analytic model.

    Workloads are looked up by benchmark name; unknown benchmarks get a
    generated profile from ``(benchmark_seed(seed, name), category)``.
    ``fixed`` pins model inputs (keyed by parameter name) that the design
    space does not tune, e.g. cache sizes for a cores-by-frequency space.
    """

    def __init__(self, power_params=None, workloads=None, seed: int = 0, names=None, ranges=None,
                 fixed=None):
        self.power_params = power_params or PowerModelParams()
        self.workloads = dict(workloads or {})
        self.seed = seed
        self.names = dict(DEFAULT_NAMES, **(names or {}))
        self.ranges = ranges
        self.fixed = {k: float(v) for k, v in (fixed or {}).items()}

    def workload(self, benchmark: BenchmarkId) -> WorkloadProfile:
        w = self.workloads.get(benchmark.name)
        if w is None:
            w = generate_workload(
                benchmark_seed(self.seed, benchmark.name),
                benchmark.category,
                name=benchmark.name,
                ranges=self.ranges,
            )
            # setdefault keeps concurrent first calls consistent
            w = self.workloads.setdefault(benchmark.name, w)
        return w

    def evaluate(self, config, benchmark: BenchmarkId) -> RawMetrics:
        s = _settings(config, self.names, self.fixed)
        return RawMetrics(_power(s, self.power_params), _exec_time(s, self.workload(benchmark)))

    def with_power(self, **overrides) -> "CostModelEvaluator":
        return CostModelEvaluator(
            replace(self.power_params, **overrides), self.workloads, self.seed, self.names, self.ranges,
            self.fixed,
        )
