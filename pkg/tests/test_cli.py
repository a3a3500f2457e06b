import csv
import json
import subprocess
import sys

import pytest

from archex import presets
from archex.cli import main
from archex.config import SEED_ENV, demo_config, parse_run_config, serialize_run_config
from archex.report import compare_reports, load_report, run, safe_name


def write_config(path, **overrides):
    doc = {
        "design_space": [{"name": n, "settings": s} for n, s in presets.raw_space(presets.LOW_POWER)],
        "weights": {"power": 0.9, "time": 0.1},
        "threshold": 150,
        "benchmarks": [
            {"name": "cholesky", "category": "data-sensing-aggregation"},
            {"name": "radix", "category": "data-sensing-aggregation"},
        ],
        "seed": 7,
    }
    doc.update(overrides)
    path.write_text(json.dumps(doc))
    return path


def strip_timestamp(doc):
    doc = json.loads(json.dumps(doc))
    doc["metadata"].pop("generated_at")
    return doc


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@pytest.fixture
def lp_config(tmp_path):
    return write_config(tmp_path / "run.json")


def test_explore_writes_artifacts(tmp_path, lp_config):
    out = tmp_path / "out"
    assert main(["explore", "--config", str(lp_config), "--out", str(out), "--oracle"]) == 0
    for name in ("report.json", "evaluations.csv", "oracle_evaluations.csv", "summary.txt",
                 "pareto_cholesky.csv", "pareto_radix.csv",
                 "figures/significance_cholesky.png", "figures/pareto_radix.png"):
        assert (out / name).exists(), name
    report = load_report(out / "report.json")
    assert report["metadata"]["seed"] == 7
    summary = (out / "summary.txt").read_text()
    for col in ("gap_power_%", "gap_time_%", "gap_obj_%", "explored_%", "speedup"):
        assert col in summary
    entry = report["benchmarks"][0]
    assert entry["configuration"]["Cores"] == 1 and entry["configuration"]["Frequency"] == 75
    assert entry["explored_fraction"] == round(entry["evaluations"]["unique"] / 1152, 6)
    assert entry["evaluations"]["unique"] <= entry["evaluations"]["bound"]
    assert entry["comparison"]["objective_gap_pct"] >= 0


def test_log_csv_contract(tmp_path, lp_config):
    out = tmp_path / "out"
    assert main(["explore", "--config", str(lp_config), "--out", str(out), "--no-plots"]) == 0
    raw = (out / "evaluations.csv").read_bytes()
    assert b"\r" not in raw
    rows = read_csv(out / "evaluations.csv")
    names = [n for n, _ in presets.raw_space(presets.LOW_POWER)]
    assert list(rows[0]) == ["benchmark", "phase", *names, "power_watts", "exec_time_ms", "v_power", "v_time",
                             "objective", "cache_hit"]
    report = load_report(out / "report.json")
    for entry in report["benchmarks"]:
        mine = [r for r in rows if r["benchmark"] == entry["name"]]
        assert len(mine) == entry["evaluations"]["total_calls"]
        fresh = [tuple(r[n] for n in names) for r in mine if r["cache_hit"] == "false"]
        assert len(fresh) == len(set(fresh)) == entry["evaluations"]["unique"]
        assert len({tuple(r[n] for n in names) for r in mine}) == entry["evaluations"]["unique"]
        by_phase = {}
        for r in mine:
            by_phase[r["phase"]] = by_phase.get(r["phase"], 0) + 1
        assert by_phase == {k: v["requested"] for k, v in entry["evaluations"]["by_phase"].items()}
    assert all(len(r["power_watts"].split(".")[1]) == 3 for r in rows)


def test_pareto_csv(tmp_path, lp_config):
    out = tmp_path / "out"
    main(["explore", "--config", str(lp_config), "--out", str(out), "--oracle", "--no-plots"])
    rows = read_csv(out / "pareto_cholesky.csv")
    assert list(rows[0]) == ["v_power", "v_time", "on_front", "is_solution"]
    assert len(rows) == 1152
    sol = [r for r in rows if r["is_solution"] == "true"]
    assert len(sol) == 1
    assert sum(r["on_front"] == "true" for r in rows) >= 1


def test_reports_are_deterministic(tmp_path, lp_config):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["explore", "--config", str(lp_config), "--out", str(a), "--oracle", "--jobs", "2"]) == 0
    assert main(["explore", "--config", str(lp_config), "--out", str(b), "--oracle"]) == 0
    ra, rb = load_report(a / "report.json"), load_report(b / "report.json")
    assert strip_timestamp(ra) == strip_timestamp(rb)
    for name in ("evaluations.csv", "oracle_evaluations.csv", "summary.txt", "pareto_radix.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes(), name
    text_a = (a / "report.json").read_text().replace(ra["metadata"]["generated_at"], "")
    text_b = (b / "report.json").read_text().replace(rb["metadata"]["generated_at"], "")
    assert text_a == text_b


def test_missing_binary_fails_run(tmp_path):
    cfg = write_config(
        tmp_path / "run.json",
        evaluator={"kind": "external", "command": "/no/such/simulator --cores {param:Cores}",
                   "result_file": str(tmp_path / "{benchmark}.txt")},
    )
    out = tmp_path / "out"
    assert main(["explore", "--config", str(cfg), "--out", str(out), "--no-plots"]) == 1
    report = load_report(out / "report.json")
    for entry in report["benchmarks"]:
        assert entry["status"] == "failed"
        assert entry["error"]["type"] == "SpawnFailed"
        assert entry["error"]["command"] == "/no/such/simulator --cores 1"
    assert "FAILED" in (out / "summary.txt").read_text()


def test_external_adapter_end_to_end(tmp_path):
    sim = tmp_path / "sim.py"
    sim.write_text(
        "import sys\n"
        "cores, freq, out = float(sys.argv[1]), float(sys.argv[2]), sys.argv[3]\n"
        "open(out, 'w').write(f'power_watts={cores * freq / 100}\\nexec_time_ms={1e4 / (cores * freq)}\\n')\n"
    )
    cfg = write_config(
        tmp_path / "run.json",
        design_space=[{"name": "Cores", "settings": [1, 2, 4]}, {"name": "Frequency", "settings": [75, 150]}],
        benchmarks=[{"name": "toy"}],
        evaluator={"kind": "external",
                   "command": f"{sys.executable} {sim} {{param:Cores}} {{param:Frequency}} {{benchmark}}.txt",
                   "result_file": "{benchmark}.txt", "workdir": str(tmp_path)},
    )
    out = tmp_path / "out"
    assert main(["explore", "--config", str(cfg), "--out", str(out), "--oracle", "--no-plots"]) == 0
    entry = load_report(out / "report.json")["benchmarks"][0]
    assert entry["status"] == "ok"
    assert entry["comparison"]["objective_gap_pct"] == 0.0


def test_bad_config_exit_code(tmp_path, caplog):
    cfg = write_config(tmp_path / "run.json", weights={"power": 0.6, "time": 0.6})
    assert main(["explore", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert "$.weights" in caplog.text
    (tmp_path / "broken.json").write_text("{")
    assert main(["explore", "--config", str(tmp_path / "broken.json")]) == 2
    assert main(["explore", "--config", str(tmp_path / "missing.json")]) == 2


def test_oracle_and_compare_commands(tmp_path, lp_config, capsys):
    m, o = tmp_path / "m", tmp_path / "o"
    assert main(["explore", "--config", str(lp_config), "--out", str(m), "--oracle", "--no-plots"]) == 0
    assert main(["oracle", "--config", str(lp_config), "--out", str(o)]) == 0
    oracle_report = load_report(o / "report.json")
    assert oracle_report["benchmarks"][0]["evaluations"]["unique"] == 1152
    capsys.readouterr()
    assert main(["compare", "--method", str(m / "report.json"), "--oracle", str(o / "report.json")]) == 0
    table = capsys.readouterr().out
    assert "cholesky" in table and "speedup" in table
    # report files carry 3-decimal metrics, so gaps are recomputed from those
    method_report = load_report(m / "report.json")
    pairs = dict(compare_reports(method_report, oracle_report))
    for entry in method_report["benchmarks"]:
        other = next(b for b in oracle_report["benchmarks"] if b["name"] == entry["name"])
        assert other["configuration"] == entry["oracle"]["configuration"]
        stats = pairs[entry["name"]]
        expected = (entry["power_watts"] - other["power_watts"]) / other["power_watts"] * 100
        assert stats.quality_gap_power == pytest.approx(expected)
        assert stats.objective_gap == pytest.approx(entry["comparison"]["objective_gap_pct"], abs=1e-3)
        assert round(stats.speedup, 4) == entry["comparison"]["speedup"]


def test_compare_rejects_different_spaces(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    run(demo_config(presets.LOW_POWER, oracle=False), a, plots=False)
    cfg = write_config(tmp_path / "hp.json",
                       design_space=[{"name": n, "settings": s} for n, s in presets.raw_space(presets.HIGH_PERFORMANCE)])
    main(["oracle", "--config", str(cfg), "--out", str(b)])
    assert main(["compare", "--method", str(a / "report.json"), "--oracle", str(b / "report.json")]) == 2


def test_seed_flag_and_env(tmp_path, lp_config, monkeypatch):
    monkeypatch.setenv(SEED_ENV, "99")
    main(["explore", "--config", str(lp_config), "--out", str(tmp_path / "env"), "--no-plots"])
    assert load_report(tmp_path / "env" / "report.json")["metadata"]["seed"] == 99
    main(["explore", "--config", str(lp_config), "--out", str(tmp_path / "cli"), "--seed", "5", "--no-plots"])
    assert load_report(tmp_path / "cli" / "report.json")["metadata"]["seed"] == 5


def test_demo_command(tmp_path, capsys):
    out = tmp_path / "demo"
    assert main(["demo", "--space", "high-performance", "--out", str(out), "--jobs", "3"]) == 0
    text = capsys.readouterr().out
    assert "cardinality 2700" in text
    report = load_report(out / "report.json")
    assert len(report["benchmarks"]) == 6
    for entry in report["benchmarks"]:
        assert entry["configuration"]["Frequency"] == 3200
        assert entry["explored_fraction"] <= 0.10


def test_module_entry_point(tmp_path):
    cfg = demo_config(presets.LOW_POWER, oracle=False, output_dir=str(tmp_path / "o"))
    path = tmp_path / "c.json"
    path.write_text(serialize_run_config(cfg))
    assert parse_run_config(path.read_text()) == cfg
    proc = subprocess.run([sys.executable, "-m", "archex", "explore", "--config", str(path), "--no-plots"],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "o" / "report.json").exists()


def test_safe_name():
    assert safe_name("a/b c") == "a_b_c"
    assert safe_name("x264") == "x264"
