"""Run-configuration document: parsing, validation and serialization.

The document is JSON; unknown keys are rejected everywhere. Schema::

    {
      "design_space": [{"name": "Cores", "settings": [1, 2, 4]}, ...],
      "weights": {"power": 0.9, "time": 0.1},
      "threshold": 150,
      "benchmarks": [
        {"name": "cholesky", "category": "data-sensing-aggregation",
         "workload": {...optional WorkloadProfile fields, all required...}}
      ],
      "evaluator": {"kind": "cost-model",
                    "preset": "low-power" | "high-performance",   (optional)
                    "power": {"cap_per_core": 15.0, ...},         (optional overrides)
                    "parameter_names": {"frequency": "Freq"},     (optional)
                    "fixed": {"L3": 4096}}                         (optional)
                 or {"kind": "external",
                     "command": "sim --cores {param:Cores} --bench {benchmark}",
                     "result_file": "out/{benchmark}.txt",
                     "timeout_s": 600, "workdir": "."},             (last two optional)
      "oracle": false,
      "oracle_budget": 1000000,
      "output_dir": "archex-out",
      "seed": 2017
    }

Only ``design_space``, ``weights``, ``threshold`` and ``benchmarks`` are
required; ``evaluator`` defaults to the cost model.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, fields, replace
from decimal import Decimal

from . import presets
from .costmodel import DEFAULT_NAMES, ROLES, CostModelEvaluator, PowerModelParams, WorkloadProfile
from .errors import ArchexError, ParseError, ValidationError
from .evaluator import CATEGORIES, UNCATEGORIZED, AdapterSpec, BenchmarkId, ExternalEvaluator, template_parameters
from .objective import Weights
from .oracle import DEFAULT_BUDGET
from .space import DesignSpace, validate_space

DEFAULT_SEED = 2017
DEFAULT_OUTPUT_DIR = "archex-out"
SEED_ENV = "ARCHEX_SEED"


@dataclass(frozen=True)
class BenchmarkSpec:
    benchmark: BenchmarkId
    workload: WorkloadProfile | None = None


@dataclass(frozen=True)
class CostModelSpec:
    power: PowerModelParams = field(default_factory=PowerModelParams)
    parameter_names: tuple[tuple[str, str], ...] = ()
    fixed: tuple[tuple[str, Decimal], ...] = ()

    def names(self) -> dict[str, str]:
        return dict(DEFAULT_NAMES, **dict(self.parameter_names))


@dataclass(frozen=True)
class RunConfig:
    design_space: DesignSpace
    weights: Weights
    threshold: int
    benchmarks: tuple[BenchmarkSpec, ...]
    evaluator: CostModelSpec | AdapterSpec = field(default_factory=CostModelSpec)
    oracle: bool = False
    output_dir: str = DEFAULT_OUTPUT_DIR
    seed: int = DEFAULT_SEED
    oracle_budget: int = DEFAULT_BUDGET

    @property
    def benchmark_ids(self) -> list[BenchmarkId]:
        return [b.benchmark for b in self.benchmarks]

    def build_evaluator(self):
        if isinstance(self.evaluator, AdapterSpec):
            return ExternalEvaluator(self.evaluator)
        spec = self.evaluator
        workloads = {b.benchmark.name: b.workload for b in self.benchmarks if b.workload is not None}
        return CostModelEvaluator(
            spec.power, workloads, seed=self.seed, names=dict(spec.parameter_names),
            fixed=dict(spec.fixed),
        )

    def config_hash(self) -> str:
        """sha256 of the canonical document, ignoring the output directory."""
        doc = to_document(self)
        doc.pop("output_dir")
        text = json.dumps(doc, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()


# parsing helpers

def _loc(path, key):
    return f"{path}[{key}]" if isinstance(key, int) else f"{path}.{key}"


def _reject_duplicates(pairs):
    out = {}
    for k, v in pairs:
        if k in out:
            raise ParseError(f"duplicate key {k!r}")
        out[k] = v
    return out


def _object(value, path, allowed, required=()):
    if not isinstance(value, dict):
        raise ValidationError("expected an object", path)
    for key in value:
        if key not in allowed:
            raise ValidationError(f"unknown key {key!r}", path)
    for key in required:
        if key not in value:
            raise ValidationError(f"missing required field {key!r}", _loc(path, key))
    return value


def _number(value, path) -> Decimal:
    if isinstance(value, bool) or not isinstance(value, (int, Decimal)):
        raise ValidationError("expected a number", path)
    return Decimal(value)


def _integer(value, path, minimum=None) -> int:
    if isinstance(value, Decimal) and value == value.to_integral_value():
        value = int(value)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValidationError("expected an integer", path)
    if minimum is not None and value < minimum:
        raise ValidationError(f"must be >= {minimum}", path)
    return value


def _string(value, path) -> str:
    if not isinstance(value, str) or not value:
        raise ValidationError("expected a non-empty string", path)
    return value


def _bool(value, path) -> bool:
    if not isinstance(value, bool):
        raise ValidationError("expected true or false", path)
    return value


def _wrap(path, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (ArchexError, ValueError, TypeError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"{type(exc).__name__}: {exc}", path, cause=exc) from exc


def _parse_space(value, path) -> DesignSpace:
    if not isinstance(value, list):
        raise ValidationError("expected a list of parameters", path)
    raw = []
    for i, item in enumerate(value):
        p = _loc(path, i)
        _object(item, p, ("name", "settings"), ("name", "settings"))
        name = _string(item["name"], _loc(p, "name"))
        settings = item["settings"]
        if not isinstance(settings, list):
            raise ValidationError("expected a list of numbers", _loc(p, "settings"))
        raw.append((name, [_number(v, _loc(_loc(p, "settings"), j)) for j, v in enumerate(settings)]))
    return _wrap(path, validate_space, raw)


def _parse_weights(value, path) -> Weights:
    _object(value, path, ("power", "time"), ("power", "time"))
    wp = float(_number(value["power"], _loc(path, "power")))
    wt = float(_number(value["time"], _loc(path, "time")))
    return _wrap(path, Weights, wp, wt)


def _parse_workload(value, path, name) -> WorkloadProfile:
    names = [f.name for f in fields(WorkloadProfile) if f.name != "name"]
    _object(value, path, names, names)
    data = {"name": name}
    for key in names:
        num = _number(value[key], _loc(path, key))
        data[key] = int(num) if key == "instruction_count" else float(num)
    return _wrap(path, WorkloadProfile, **data)


def _parse_benchmarks(value, path) -> tuple[BenchmarkSpec, ...]:
    if not isinstance(value, list) or not value:
        raise ValidationError("expected a non-empty list of benchmarks", path)
    out, seen = [], set()
    for i, item in enumerate(value):
        p = _loc(path, i)
        _object(item, p, ("name", "category", "workload"), ("name",))
        name = _string(item["name"], _loc(p, "name"))
        if name in seen:
            raise ValidationError(f"duplicate benchmark name {name!r}", _loc(p, "name"))
        seen.add(name)
        category = item.get("category", UNCATEGORIZED)
        if category not in CATEGORIES and category != UNCATEGORIZED:
            raise ValidationError(f"unknown category {category!r}", _loc(p, "category"))
        workload = None
        if "workload" in item:
            workload = _parse_workload(item["workload"], _loc(p, "workload"), name)
        out.append(BenchmarkSpec(BenchmarkId(name, category), workload))
    return tuple(out)


def _parse_evaluator(value, path, space: DesignSpace):
    if not isinstance(value, dict) or "kind" not in value:
        raise ValidationError("expected an object with a 'kind' field", path)
    kind = value["kind"]
    if kind == "cost-model":
        _object(value, path, ("kind", "preset", "power", "parameter_names", "fixed"))
        power = PowerModelParams()
        if "preset" in value:
            preset = value["preset"]
            if preset not in presets.SPACE_NAMES:
                raise ValidationError(f"unknown preset {preset!r}", _loc(path, "preset"))
            power = presets.power_params(preset)
        if "power" in value:
            p = _loc(path, "power")
            keys = [f.name for f in fields(PowerModelParams)]
            _object(value["power"], p, keys)
            overrides = {k: float(_number(v, _loc(p, k))) for k, v in value["power"].items()}
            power = _wrap(p, replace, power, **overrides)
        names = {}
        if "parameter_names" in value:
            p = _loc(path, "parameter_names")
            _object(value["parameter_names"], p, ROLES)
            names = {k: _string(v, _loc(p, k)) for k, v in value["parameter_names"].items()}
        fixed = {}
        if "fixed" in value:
            p = _loc(path, "fixed")
            if not isinstance(value["fixed"], dict):
                raise ValidationError("expected an object", p)
            fixed = {k: _number(v, _loc(p, k)) for k, v in value["fixed"].items()}
        spec = CostModelSpec(power, tuple(sorted(names.items())), tuple(sorted(fixed.items())))
        for role, name in spec.names().items():
            if name not in space.names and name not in fixed:
                raise ValidationError(
                    f"cost model needs parameter {name!r} ({role}); add it to the design space or to 'fixed'",
                    path,
                )
        return spec
    if kind == "external":
        _object(value, path, ("kind", "command", "result_file", "timeout_s", "workdir"), ("command", "result_file"))
        command = _string(value["command"], _loc(path, "command"))
        result_file = _string(value["result_file"], _loc(path, "result_file"))
        for key, template in (("command", command), ("result_file", result_file)):
            for name in template_parameters(template):
                if name not in space.names:
                    raise ValidationError(f"template references unknown parameter {name!r}", _loc(path, key))
        timeout = None
        if "timeout_s" in value:
            timeout = float(_number(value["timeout_s"], _loc(path, "timeout_s")))
            if timeout <= 0:
                raise ValidationError("must be positive", _loc(path, "timeout_s"))
        workdir = _string(value["workdir"], _loc(path, "workdir")) if "workdir" in value else None
        return AdapterSpec(command, result_file, timeout, workdir)
    raise ValidationError(f"unknown evaluator kind {kind!r}", _loc(path, "kind"))


_TOP_KEYS = (
    "design_space", "weights", "threshold", "benchmarks", "evaluator",
    "oracle", "oracle_budget", "output_dir", "seed",
)


def parse_run_config(document) -> RunConfig:
    """Parse and validate a run-configuration document (JSON text or bytes)."""
    if isinstance(document, bytes):
        try:
            document = document.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"document is not UTF-8: {exc}") from None
    try:
        doc = json.loads(document, parse_float=Decimal, object_pairs_hook=_reject_duplicates)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, f"line {exc.lineno} column {exc.colno}") from None
    return from_document(doc)


def from_document(doc) -> RunConfig:
    root = "$"
    _object(doc, root, _TOP_KEYS, ("design_space", "weights", "threshold", "benchmarks"))
    space = _parse_space(doc["design_space"], "$.design_space")
    weights = _parse_weights(doc["weights"], "$.weights")
    threshold = _integer(doc["threshold"], "$.threshold", minimum=1)
    benchmarks = _parse_benchmarks(doc["benchmarks"], "$.benchmarks")
    evaluator = CostModelSpec()
    if "evaluator" in doc:
        evaluator = _parse_evaluator(doc["evaluator"], "$.evaluator", space)
    else:
        for role, name in DEFAULT_NAMES.items():
            if name not in space.names:
                raise ValidationError(
                    f"default cost model needs parameter {name!r} ({role}); configure 'evaluator'", "$.evaluator"
                )
    return RunConfig(
        design_space=space,
        weights=weights,
        threshold=threshold,
        benchmarks=benchmarks,
        evaluator=evaluator,
        oracle=_bool(doc.get("oracle", False), "$.oracle"),
        output_dir=_string(doc.get("output_dir", DEFAULT_OUTPUT_DIR), "$.output_dir"),
        seed=_integer(doc.get("seed", DEFAULT_SEED), "$.seed", minimum=0),
        oracle_budget=_integer(doc.get("oracle_budget", DEFAULT_BUDGET), "$.oracle_budget", minimum=1),
    )


def _json_number(value: Decimal):
    if value == value.to_integral_value():
        return int(value)
    return float(value)


def to_document(cfg: RunConfig) -> dict:
    benchmarks = []
    for b in cfg.benchmarks:
        item = {"name": b.benchmark.name, "category": b.benchmark.category}
        if b.workload is not None:
            w = b.workload.to_dict()
            w.pop("name")
            item["workload"] = w
        benchmarks.append(item)
    if isinstance(cfg.evaluator, AdapterSpec):
        ev = {"kind": "external", "command": cfg.evaluator.command, "result_file": cfg.evaluator.result_file}
        if cfg.evaluator.timeout_s is not None:
            ev["timeout_s"] = cfg.evaluator.timeout_s
        if cfg.evaluator.workdir is not None:
            ev["workdir"] = cfg.evaluator.workdir
    else:
        ev = {
            "kind": "cost-model",
            "power": {f.name: getattr(cfg.evaluator.power, f.name) for f in fields(PowerModelParams)},
        }
        if cfg.evaluator.parameter_names:
            ev["parameter_names"] = dict(cfg.evaluator.parameter_names)
        if cfg.evaluator.fixed:
            ev["fixed"] = {k: _json_number(v) for k, v in cfg.evaluator.fixed}
    return {
        "design_space": [
            {"name": p.name, "settings": [_json_number(v) for v in p.settings]}
            for p in cfg.design_space.parameters
        ],
        "weights": {"power": cfg.weights.w_power, "time": cfg.weights.w_time},
        "threshold": cfg.threshold,
        "benchmarks": benchmarks,
        "evaluator": ev,
        "oracle": cfg.oracle,
        "oracle_budget": cfg.oracle_budget,
        "output_dir": cfg.output_dir,
        "seed": cfg.seed,
    }


def serialize_run_config(cfg: RunConfig) -> str:
    return json.dumps(to_document(cfg), indent=2) + "\n"


def resolve_seed(cfg: RunConfig, cli_seed: int | None = None, environ=None) -> RunConfig:
    """Apply seed precedence: command-line flag, then ARCHEX_SEED, then file."""
    if cli_seed is not None:
        return replace(cfg, seed=cli_seed)
    if environ and environ.get(SEED_ENV, "").strip():
        text = environ[SEED_ENV].strip()
        try:
            seed = int(text)
        except ValueError:
            raise ValidationError(f"{SEED_ENV}={text!r} is not an integer", SEED_ENV) from None
        if seed < 0:
            raise ValidationError(f"{SEED_ENV} must be >= 0", SEED_ENV)
        return replace(cfg, seed=seed)
    return cfg


def demo_config(space_name: str, oracle: bool = True, output_dir: str | None = None) -> RunConfig:
    """Bundled configuration for one of the two fixture spaces."""
    return RunConfig(
        design_space=presets.design_space(space_name),
        weights=presets.weights(space_name),
        threshold=presets.DEFAULT_THRESHOLD,
        benchmarks=tuple(BenchmarkSpec(b) for b in presets.BENCHMARKS[space_name]),
        evaluator=CostModelSpec(presets.power_params(space_name)),
        oracle=oracle,
        output_dir=output_dir or f"archex-demo-{space_name}",
    )
