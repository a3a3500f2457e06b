import sys
import threading
import time

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from archex import presets
from archex.costmodel import CostModelEvaluator
from archex.errors import (
    EvaluationFailed,
    EvaluationTimeout,
    NonZeroExit,
    ResultFileMissing,
    ResultParseError,
    SpawnFailed,
    UnknownParameter,
)
from archex.evaluator import (
    AdapterSpec,
    BenchmarkId,
    CachedEvaluator,
    ExternalEvaluator,
    cached_evaluate,
    external_evaluate,
    parse_result_text,
    render_template,
    template_parameters,
)
from archex.objective import RawMetrics
from archex.space import validate_space

from .conftest import TableEvaluator

STUB = """\
import sys
path = sys.argv[1]
with open(path, "w") as fh:
    fh.write("# stub simulator\\r\\n")
    fh.write("power_watts=" + sys.argv[2] + "\\r\\n")
    fh.write("exec_time_ms = " + sys.argv[3] + "\\r\\n")
    fh.write("ipc=1.25\\r\\n")
"""


@pytest.fixture
def stub(tmp_path):
    script = tmp_path / "stub_sim.py"
    script.write_text(STUB)
    return script


@pytest.fixture
def two_param_space():
    return validate_space([("Cores", [1, 2, 4]), ("Frequency", [1700, 3200])])


def test_render_template(two_param_space):
    config = two_param_space.configuration({"Cores": 2, "Frequency": 3200})
    rendered = render_template(
        "sim --cores {param:Cores} --freq {param:Frequency} --bench {benchmark}", config, BenchmarkId("x264")
    )
    assert rendered == "sim --cores 2 --freq 3200 --bench x264"


def test_template_unknown_parameter(two_param_space):
    config = two_param_space.first_configuration()
    assert template_parameters("a {param:L2} {benchmark} {param:Cores}") == ["L2", "Cores"]
    with pytest.raises(UnknownParameter):
        render_template("sim {param:L2}", config, BenchmarkId("fft"))


def test_parse_fixture_values_exactly():
    assert parse_result_text("power_watts=1.597\nexec_time_ms=35.142\n") == RawMetrics(1.597, 35.142)


def test_parse_missing_key():
    with pytest.raises(ResultParseError) as info:
        parse_result_text("power_watts=1.597\n", command="sim x")
    assert "exec_time_ms" in str(info.value)
    assert info.value.command == "sim x"


@pytest.mark.parametrize(
    "text",
    ["power_watts=abc\nexec_time_ms=1\n", "power_watts 1.0\nexec_time_ms=1\n", "power_watts=0\nexec_time_ms=1\n"],
)
def test_parse_rejects_malformed(text):
    with pytest.raises(ResultParseError):
        parse_result_text(text)


def test_parse_ignores_unknown_keys_and_crlf():
    assert parse_result_text("ipc=2\r\npower_watts=2.5\r\n\r\nexec_time_ms=1e1\r\n") == RawMetrics(2.5, 10.0)


def test_stub_round_trip(stub, tmp_path, two_param_space):
    spec = AdapterSpec(
        command=f"{sys.executable} {stub} {tmp_path}/{{benchmark}}.out 1.597 35.142",
        result_file=str(tmp_path / "{benchmark}.out"),
        timeout_s=30,
    )
    raw = external_evaluate(two_param_space.first_configuration(), BenchmarkId("x264"), spec)
    assert raw == RawMetrics(1.597, 35.142)


def test_stub_with_workdir(stub, tmp_path, two_param_space):
    spec = AdapterSpec(
        command=f"{sys.executable} {stub} res_{{param:Cores}}.txt 2 {{param:Frequency}}",
        result_file="res_{param:Cores}.txt",
        workdir=str(tmp_path),
    )
    config = two_param_space.configuration({"Cores": 4, "Frequency": 1700})
    assert ExternalEvaluator(spec).evaluate(config, BenchmarkId("fft")) == RawMetrics(2.0, 1700.0)


def test_missing_binary_is_spawn_failure(tmp_path, two_param_space):
    spec = AdapterSpec(command="/nonexistent/simulator --cores {param:Cores}", result_file=str(tmp_path / "r"))
    with pytest.raises(SpawnFailed) as info:
        external_evaluate(two_param_space.first_configuration(), BenchmarkId("x264"), spec)
    assert info.value.command == "/nonexistent/simulator --cores 1"
    assert "/nonexistent/simulator --cores 1" in str(info.value)


def test_nonzero_exit(tmp_path, two_param_space):
    spec = AdapterSpec(command=f"{sys.executable} -c 'import sys; sys.exit(3)'", result_file=str(tmp_path / "r"))
    with pytest.raises(NonZeroExit, match="exit status 3"):
        external_evaluate(two_param_space.first_configuration(), BenchmarkId("x264"), spec)


def test_result_file_missing_even_if_stale(tmp_path, two_param_space):
    stale = tmp_path / "r"
    stale.write_text("power_watts=1\nexec_time_ms=1\n")
    spec = AdapterSpec(command=f"{sys.executable} -c 'pass'", result_file=str(stale))
    with pytest.raises(ResultFileMissing):
        external_evaluate(two_param_space.first_configuration(), BenchmarkId("x264"), spec)


def test_timeout(tmp_path, two_param_space):
    spec = AdapterSpec(
        command=f"{sys.executable} -c 'import time; time.sleep(5)'", result_file=str(tmp_path / "r"), timeout_s=0.2
    )
    with pytest.raises(EvaluationTimeout):
        external_evaluate(two_param_space.first_configuration(), BenchmarkId("x264"), spec)


def test_cost_model_is_deterministic(low_power_space):
    ev = CostModelEvaluator(seed=5)
    cfg = low_power_space.first_configuration()
    b = BenchmarkId("cholesky", "data-sensing-aggregation")
    assert ev.evaluate(cfg, b) == ev.evaluate(cfg, b)
    assert CostModelEvaluator(seed=5).evaluate(cfg, b) == ev.evaluate(cfg, b)


def test_all_minimum_uses_less_power_than_all_maximum(low_power_space):
    ev = CostModelEvaluator(presets.power_params(presets.LOW_POWER), seed=1)
    b = BenchmarkId("radix", "data-sensing-aggregation")
    lo = low_power_space.first_configuration()
    hi = low_power_space.configuration({p.name: p.last for p in low_power_space.parameters})
    assert ev.evaluate(lo, b).total_power < ev.evaluate(hi, b).total_power


def test_cache_same_config_five_times(two_param_space, bench):
    inner = TableEvaluator(lambda c: (c["Cores"], 1.0 / c["Frequency"]))
    cache = CachedEvaluator(inner)
    cfg = two_param_space.first_configuration()
    results = [cached_evaluate(cache, cfg, bench) for _ in range(5)]
    assert len(set(results)) == 1
    assert len(inner.calls) == 1
    c = cache.counter(bench)
    assert (c.total_calls, c.unique_configs) == (5, 1)


def test_cache_key_includes_benchmark(two_param_space):
    inner = TableEvaluator(lambda c: (1.0, 1.0))
    cache = CachedEvaluator(inner)
    cfg = two_param_space.first_configuration()
    cache.evaluate(cfg, BenchmarkId("a"))
    cache.evaluate(cfg, BenchmarkId("b"))
    assert len(inner.calls) == 2


def test_cache_reports_hits(two_param_space, bench):
    cache = CachedEvaluator(TableEvaluator(lambda c: (1.0, 1.0)))
    cfg = two_param_space.first_configuration()
    assert cache.request(cfg, bench)[1] is False
    assert cache.request(cfg, bench)[1] is True


def test_cache_does_not_store_failures(two_param_space, bench):
    state = {"fail": True}

    def fn(c):
        if state["fail"]:
            raise EvaluationFailed("boom")
        return 1.0, 2.0

    inner = TableEvaluator(fn)
    cache = CachedEvaluator(inner)
    cfg = two_param_space.first_configuration()
    with pytest.raises(EvaluationFailed):
        cache.evaluate(cfg, bench)
    state["fail"] = False
    assert cache.evaluate(cfg, bench) == RawMetrics(1.0, 2.0)
    assert len(inner.calls) == 2
    assert cache.counter(bench).unique_configs == 1


def test_concurrent_duplicates_evaluate_once(two_param_space, bench):
    gate = threading.Event()

    def slow(c):
        gate.wait(5)
        time.sleep(0.01)
        return 3.0, 4.0

    inner = TableEvaluator(slow)
    cache = CachedEvaluator(inner)
    cfg = two_param_space.first_configuration()
    out = []
    threads = [threading.Thread(target=lambda: out.append(cache.evaluate(cfg, bench))) for _ in range(16)]
    for t in threads:
        t.start()
    gate.set()
    for t in threads:
        t.join()
    assert len(inner.calls) == 1
    assert out == [RawMetrics(3.0, 4.0)] * 16
    c = cache.counter(bench)
    assert (c.total_calls, c.unique_configs) == (16, 1)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(0, 1151), min_size=1, max_size=40), st.integers(0, 2**16))
def test_cache_is_transparent(indices, seed):
    space = presets.design_space(presets.LOW_POWER)
    configs = list(space.enumerate())
    plain = CostModelEvaluator(seed=seed)
    cache = CachedEvaluator(CostModelEvaluator(seed=seed))
    b = BenchmarkId("w", "graphics")
    for i in indices:
        assert cache.evaluate(configs[i], b) == plain.evaluate(configs[i], b)
    assert cache.counter(b).unique_configs == len(set(indices))
