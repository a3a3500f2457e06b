"""archex: threshold-bounded design space exploration for processor microarchitectures."""

from .costmodel import CostModelEvaluator, PowerModelParams, WorkloadProfile, generate_workload
from .evaluator import AdapterSpec, BenchmarkId, CachedEvaluator, ExternalEvaluator
from .explorer import (
    explore,
    explore_benchmark,
    phase1_one_shot,
    phase2_partition,
    phase3_exhaustive,
    phase4_greedy,
)
from .objective import NormConstants, RawMetrics, Weights, normalize, objective, validate_weights
from .oracle import compare, full_exhaustive, pareto_front, tangency_check
from .space import Configuration, DesignSpace, PartialConfiguration, compose, enumerate_partial, validate_space

__version__ = "0.1.0"

__all__ = [
    "AdapterSpec",
    "BenchmarkId",
    "CachedEvaluator",
    "Configuration",
    "CostModelEvaluator",
    "DesignSpace",
    "ExternalEvaluator",
    "NormConstants",
    "PartialConfiguration",
    "PowerModelParams",
    "RawMetrics",
    "Weights",
    "WorkloadProfile",
    "compare",
    "compose",
    "enumerate_partial",
    "explore",
    "explore_benchmark",
    "full_exhaustive",
    "generate_workload",
    "normalize",
    "objective",
    "pareto_front",
    "phase1_one_shot",
    "phase2_partition",
    "phase3_exhaustive",
    "phase4_greedy",
    "tangency_check",
    "validate_space",
    "validate_weights",
]
