"""Bundled fixtures: the low-power and high-performance processor design spaces."""

from .costmodel import PowerModelParams
from .evaluator import BenchmarkId
from .objective import Weights
from .space import DesignSpace, validate_space

LOW_POWER = "low-power"
HIGH_PERFORMANCE = "high-performance"
SPACE_NAMES = (LOW_POWER, HIGH_PERFORMANCE)

# frequencies in MHz, cache sizes in kB
_RAW_SPACES = {
    LOW_POWER: [
        ("Cores", [1, 2, 4]),
        ("Frequency", [75, 100, 125, 150]),
        ("L1-I", [8, 16, 32, 64]),
        ("L1-D", [8, 16, 32, 64]),
        ("L2", [256, 512, 1024]),
        ("L3", [2048, 4096]),
    ],
    HIGH_PERFORMANCE: [
        ("Cores", [2, 4, 8]),
        ("Frequency", [1700, 2200, 2800, 3200]),
        ("L1-I", [8, 16, 32, 64, 128]),
        ("L1-D", [8, 16, 32, 64, 128]),
        ("L2", [256, 512, 1024]),
        ("L3", [2048, 4096, 8192]),
    ],
}

WEIGHTS = {
    LOW_POWER: (0.9, 0.1),
    HIGH_PERFORMANCE: (0.1, 0.9),
}

BENCHMARKS = {
    LOW_POWER: (
        BenchmarkId("cholesky", "data-sensing-aggregation"),
        BenchmarkId("radix", "data-sensing-aggregation"),
    ),
    HIGH_PERFORMANCE: (
        BenchmarkId("blackscholes", "data-analysis-mining"),
        BenchmarkId("freqmine", "data-analysis-mining"),
        BenchmarkId("facesim", "graphics"),
        BenchmarkId("fluidanimate", "graphics"),
        BenchmarkId("fft", "signal-processing-communication"),
        BenchmarkId("x264", "uncategorized"),
    ),
}

DEFAULT_THRESHOLD = 150


def raw_space(name: str) -> list[tuple[str, list[int]]]:
    return [(p, list(s)) for p, s in _RAW_SPACES[name]]


def design_space(name: str) -> DesignSpace:
    if name not in _RAW_SPACES:
        raise KeyError(f"unknown bundled space {name!r}; choose from {', '.join(SPACE_NAMES)}")
    return validate_space(_RAW_SPACES[name])


def weights(name: str) -> Weights:
    return Weights(*WEIGHTS[name])


def power_params(name: str) -> PowerModelParams:
    if name == HIGH_PERFORMANCE:
        return PowerModelParams.high_performance()
    return PowerModelParams.low_power()
