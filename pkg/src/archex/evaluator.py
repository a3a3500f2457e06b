"""Evaluator boundary: (configuration, benchmark) -> raw power/time metrics.

Anything with an ``evaluate(config, benchmark)`` method returning
:class:`~archex.objective.RawMetrics` is an evaluator. Implementations must
be deterministic and must tolerate concurrent calls for distinct keys.
:class:`CachedEvaluator` wraps one and does the bookkeeping the explorer
relies on (unique-evaluation counts, cache-hit flags).
"""

from __future__ import annotations

import re
import shlex
import subprocess
import threading
from concurrent.futures import Future
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

from .errors import (
    EvaluationFailed,
    EvaluationTimeout,
    NonPositiveMetric,
    NonZeroExit,
    ResultFileMissing,
    ResultParseError,
    SpawnFailed,
    UnknownParameter,
)
from .objective import RawMetrics
from .space import Configuration, format_setting

CATEGORIES = (
    "data-sensing-aggregation",
    "data-analysis-mining",
    "graphics",
    "signal-processing-communication",
)
UNCATEGORIZED = "uncategorized"

PHASE_TAGS = ("phase1", "phase3", "phase4", "oracle")


@dataclass(frozen=True)
class BenchmarkId:
    name: str
    category: str = UNCATEGORIZED

    def __post_init__(self):
        if not self.name:
            raise ValueError("benchmark name must be non-empty")
        if self.category not in CATEGORIES and self.category != UNCATEGORIZED:
            raise ValueError(f"unknown benchmark category {self.category!r}")


@dataclass(frozen=True)
class EvaluationRecord:
    config: Configuration
    benchmark: BenchmarkId
    raw: RawMetrics
    phase_tag: str
    cache_hit: bool = False


@dataclass
class EvaluationCounter:
    total_calls: int = 0
    unique_configs: int = 0


class Evaluator(Protocol):
    def evaluate(self, config: Configuration, benchmark: BenchmarkId) -> RawMetrics: ...


class CachedEvaluator:
    """Memoizing, thread-safe wrapper around any evaluator.

    At most one underlying evaluation happens per distinct
    ``(config, benchmark name)`` key, even when several threads ask for the
    same key at once. Failed evaluations are not cached; the exception is
    delivered to every caller waiting on that key.
    """

    def __init__(self, inner: Evaluator):
        self.inner = inner
        self._lock = threading.Lock()
        self._done: dict = {}
        self._pending: dict = {}
        self._counters: dict[str, EvaluationCounter] = {}

    def counter(self, benchmark: BenchmarkId | str) -> EvaluationCounter:
        name = benchmark if isinstance(benchmark, str) else benchmark.name
        with self._lock:
            c = self._counters.get(name, EvaluationCounter())
            return EvaluationCounter(c.total_calls, c.unique_configs)

    def request(self, config: Configuration, benchmark: BenchmarkId) -> tuple[RawMetrics, bool]:
        """Return ``(metrics, cache_hit)``."""
        key = (config.key, benchmark.name)
        with self._lock:
            counter = self._counters.setdefault(benchmark.name, EvaluationCounter())
            counter.total_calls += 1
            if key in self._done:
                return self._done[key], True
            fut = self._pending.get(key)
            owner = fut is None
            if owner:
                fut = Future()
                self._pending[key] = fut
        if not owner:
            return fut.result(), True
        try:
            raw = self.inner.evaluate(config, benchmark)
            if not isinstance(raw, RawMetrics):
                raise EvaluationFailed(f"evaluator returned {type(raw).__name__}, not RawMetrics")
        except BaseException as exc:
            with self._lock:
                del self._pending[key]
            fut.set_exception(exc)
            raise
        with self._lock:
            self._done[key] = raw
            del self._pending[key]
            counter.unique_configs += 1
        fut.set_result(raw)
        return raw, False

    def evaluate(self, config: Configuration, benchmark: BenchmarkId) -> RawMetrics:
        return self.request(config, benchmark)[0]


def cached_evaluate(cache: CachedEvaluator, config: Configuration, benchmark: BenchmarkId) -> RawMetrics:
    return cache.evaluate(config, benchmark)


# external process adapter

_PLACEHOLDER = re.compile(r"\{param:([^{}]+)\}|\{benchmark\}")
_NUMBER = re.compile(r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")
REQUIRED_KEYS = ("power_watts", "exec_time_ms")


def template_parameters(template: str) -> list[str]:
    """Parameter names referenced by ``{param:<name>}`` placeholders."""
    return [m.group(1) for m in _PLACEHOLDER.finditer(template) if m.group(1) is not None]


def render_template(template: str, config, benchmark: BenchmarkId, quote=None) -> str:
    """Substitute ``{param:<name>}`` and ``{benchmark}`` placeholders."""

    def sub(match):
        name = match.group(1)
        if name is None:
            text = benchmark.name
        else:
            try:
                text = format_setting(config[name])
            except KeyError:
                raise UnknownParameter(f"template references unknown parameter {name!r}") from None
        return quote(text) if quote else text

    return _PLACEHOLDER.sub(sub, template)


def parse_result_text(text: str, command: str | None = None) -> RawMetrics:
    """Parse a ``key=value`` result file.

    Blank lines and ``#`` comments are skipped; unknown keys are ignored.
    """
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ResultParseError(f"line {lineno}: expected key=value, got {line!r}", command)
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key in REQUIRED_KEYS:
            if not _NUMBER.fullmatch(value):
                raise ResultParseError(f"line {lineno}: {key} is not a decimal number: {value!r}", command)
            values[key] = float(value)
    missing = [k for k in REQUIRED_KEYS if k not in values]
    if missing:
        raise ResultParseError(f"result lacks {', '.join(missing)}", command)
    try:
        return RawMetrics(values["power_watts"], values["exec_time_ms"])
    except NonPositiveMetric as exc:
        raise ResultParseError(str(exc), command) from None


@dataclass(frozen=True)
class AdapterSpec:
    command: str
    result_file: str
    timeout_s: float | None = None
    workdir: str | None = None


def external_evaluate(config: Configuration, benchmark: BenchmarkId, adapter_spec: AdapterSpec) -> RawMetrics:
    """Run an external simulator for one configuration and parse its result file.

    The stale result file, if any, is removed before the command runs so a
    command that silently writes nothing is reported as ResultFileMissing.
    """
    display = render_template(adapter_spec.command, config, benchmark)
    args = shlex.split(render_template(adapter_spec.command, config, benchmark, quote=shlex.quote))
    result_path = Path(render_template(adapter_spec.result_file, config, benchmark))
    if adapter_spec.workdir and not result_path.is_absolute():
        result_path = Path(adapter_spec.workdir) / result_path
    if not args:
        raise SpawnFailed("empty command", display)
    try:
        result_path.unlink()
    except FileNotFoundError:
        pass
    try:
        proc = subprocess.run(
            args,
            capture_output=True,
            text=True,
            timeout=adapter_spec.timeout_s,
            cwd=adapter_spec.workdir,
        )
    except subprocess.TimeoutExpired:
        raise EvaluationTimeout(f"killed after {adapter_spec.timeout_s} s", display) from None
    except OSError as exc:
        raise SpawnFailed(f"could not start {args[0]!r}: {exc.strerror or exc}", display) from None
    if proc.returncode != 0:
        tail = (proc.stderr or "").strip().splitlines()[-1:] or [""]
        raise NonZeroExit(f"exit status {proc.returncode} {tail[0]}".rstrip(), display)
    try:
        text = result_path.read_text(encoding="ascii", errors="strict")
    except FileNotFoundError:
        raise ResultFileMissing(f"no result file at {result_path}", display) from None
    except (UnicodeDecodeError, OSError) as exc:
        raise ResultParseError(f"unreadable result file {result_path}: {exc}", display) from None
    return parse_result_text(text, display)


class ExternalEvaluator:
    """Evaluator that shells out to a simulator through an :class:`AdapterSpec`."""

    def __init__(self, spec: AdapterSpec):
        self.spec = spec

    def evaluate(self, config: Configuration, benchmark: BenchmarkId) -> RawMetrics:
        return external_evaluate(config, benchmark, self.spec)

