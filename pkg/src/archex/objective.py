"""Design metrics, normalization and the weighted-sum objective.

Two metrics are carried: total power (watts) and execution time
(milliseconds). Both are minimized. Metrics are normalized by per-benchmark
maxima recorded once after the one-shot phase and never clamped, so later
configurations may normalize above 1.0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import NonPositiveMetric, WeightOutOfRange, WeightsDoNotSumToOne

WEIGHT_SUM_TOL = 1e-9


def _check_positive(label, value):
    if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
        raise NonPositiveMetric(f"{label} must be positive and finite, got {value!r}")


@dataclass(frozen=True)
class RawMetrics:
    total_power: float  # W
    exec_time: float  # ms

    def __post_init__(self):
        _check_positive("total_power", self.total_power)
        _check_positive("exec_time", self.exec_time)


@dataclass(frozen=True)
class NormConstants:
    max_power: float
    max_time: float

    def __post_init__(self):
        _check_positive("max_power", self.max_power)
        _check_positive("max_time", self.max_time)

    @classmethod
    def from_metrics(cls, metrics) -> "NormConstants":
        metrics = list(metrics)
        return cls(max(m.total_power for m in metrics), max(m.exec_time for m in metrics))

    def scaled(self, factor: float) -> "NormConstants":
        return NormConstants(self.max_power * factor, self.max_time * factor)


@dataclass(frozen=True)
class NormalizedMetrics:
    v_power: float
    v_time: float


@dataclass(frozen=True)
class Weights:
    w_power: float
    w_time: float

    def __post_init__(self):
        for label, w in (("w_power", self.w_power), ("w_time", self.w_time)):
            if not (isinstance(w, (int, float)) and math.isfinite(w) and 0.0 <= w <= 1.0):
                raise WeightOutOfRange(f"{label}={w!r} is outside [0, 1]")
        if abs(self.w_power + self.w_time - 1.0) > WEIGHT_SUM_TOL:
            raise WeightsDoNotSumToOne(
                f"weights sum to {self.w_power + self.w_time!r}, expected 1"
            )


def validate_weights(w_power: float, w_time: float) -> Weights:
    return Weights(float(w_power), float(w_time))


def normalize(raw: RawMetrics, norms: NormConstants) -> NormalizedMetrics:
    _check_positive("total_power", raw.total_power)
    _check_positive("exec_time", raw.exec_time)
    return NormalizedMetrics(raw.total_power / norms.max_power, raw.exec_time / norms.max_time)


def objective(v: NormalizedMetrics, w: Weights) -> float:
    """Weighted sum of normalized metrics; lower is better."""
    return w.w_power * v.v_power + w.w_time * v.v_time


def score(raw: RawMetrics, norms: NormConstants, w: Weights) -> float:
    return objective(normalize(raw, norms), w)
