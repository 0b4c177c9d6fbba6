import csv
import json

import pytest
from click.testing import CliRunner

from app.cli import main
from app.models.schemas import LatencyBreakdown
from app.services import latency_service
from app.services.matrix_io import read_tensor_dump


@pytest.fixture
def runner():
    return CliRunner()


def _report(path):
    return json.loads(path.read_text())


def test_simulate_running_example(runner, running_example_file, tmp_path):
    out = tmp_path / "report.json"
    result = runner.invoke(main, ["simulate", "--input", str(running_example_file), "--output", str(out)])
    assert result.exit_code == 0, result.output
    report = _report(out)
    assert report["schema_version"] == 1
    assert report["results"]["serial"]["cycles"] == 10
    assert report["results"]["parallel"]["cycles"] == 6
    assert report["results"]["serial"]["y"] == [[8, -1], [2, 1]]
    assert report["latency_breakdown"]["per_step"] == [6, 4]
    assert report["max_abs_output"] == 8
    assert report["results"]["serial"]["hardware"]["index_counters"] == 1
    assert report["results"]["serial"]["hardware"]["vector_counters"] == 0
    assert report["results"]["parallel"]["hardware"]["vector_counters"] == 2
    assert report["results"]["parallel"]["hardware"]["output_cell_kind"] == "adder"


def test_simulate_seed_is_reproducible(runner, tmp_path):
    args = ["simulate", "--seed", "7", "--m", "3", "--n", "4", "--p", "2", "--w", "8"]
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    assert runner.invoke(main, args + ["--output", str(first)]).exit_code == 0
    assert runner.invoke(main, args + ["--output", str(second)]).exit_code == 0
    assert first.read_text() == second.read_text()


def test_simulate_seed_from_environment(runner, tmp_path, monkeypatch):
    monkeypatch.setenv("TUGEMM_SEED", "5")
    out = tmp_path / "report.json"
    args = ["simulate", "--variant", "serial", "--m", "2", "--n", "2", "--p", "2", "--w", "4", "--output", str(out)]
    result = runner.invoke(main, args)
    assert result.exit_code == 0, result.output
    report = _report(out)
    assert report["config"]["seed"] == 5
    assert list(report["results"]) == ["serial"]


def test_simulate_requires_a_source(runner):
    result = runner.invoke(main, ["simulate", "--m", "2", "--n", "2", "--p", "2", "--w", "4"])
    assert result.exit_code == 2


def test_simulate_parse_error(runner, tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("1 1 1 4\n2\nx\n0\n")
    result = runner.invoke(main, ["simulate", "--input", str(bad)])
    assert result.exit_code == 3
    assert "строка 3" in result.output


def test_simulate_validation_error(runner, tmp_path):
    bad = tmp_path / "range.txt"
    bad.write_text("1 1 1 4\n8\n1\n0\n")
    result = runner.invoke(main, ["simulate", "--input", str(bad)])
    assert result.exit_code == 4


def test_simulate_overflow(runner, running_example_file):
    result = runner.invoke(main, ["simulate", "--input", str(running_example_file), "--output-bits", "4"])
    assert result.exit_code == 5


def test_simulate_trace(runner, running_example_file, tmp_path):
    trace = tmp_path / "trace.csv"
    args = ["simulate", "--input", str(running_example_file), "--trace", str(trace), "--output", str(tmp_path / "r.json")]
    assert runner.invoke(main, args).exit_code == 0

    with (tmp_path / "trace.serial.csv").open() as f:
        serial_rows = list(csv.DictReader(f))
    assert len(serial_rows) == 10
    assert serial_rows[0]["col_counters"] == "3 1"
    assert serial_rows[0]["row_counters"] == "2 1"

    with (tmp_path / "trace.parallel.csv").open() as f:
        parallel_rows = list(csv.DictReader(f))
    assert len(parallel_rows) == 6
    assert [row["col_done_1"] for row in parallel_rows] == ["0", "0", "0", "1", "1", "1"]


def test_latency_worst_case(runner):
    result = runner.invoke(main, ["latency", "--n", "16", "--w", "8", "--json"])
    assert result.exit_code == 0, result.output
    report = json.loads(result.output)
    assert report["schema_version"] == 1
    assert report["config"]["n"] == 16
    assert report["config"]["w"] == [8]
    assert report["rows"] == [{"n": 16, "w": 8, "serial": 262144, "parallel": 16384, "speedup": 16}]
    assert report["latency_breakdown"] is None


def test_latency_needs_width(runner):
    assert runner.invoke(main, ["latency", "--n", "16"]).exit_code == 2


def test_latency_for_problem(runner, running_example_file):
    result = runner.invoke(main, ["latency", "--input", str(running_example_file), "--json"])
    assert result.exit_code == 0, result.output
    report = json.loads(result.output)
    assert report["schema_version"] == 1
    assert report["config"]["input_path"] == str(running_example_file)
    assert report["latency_breakdown"] == {"per_step": [6, 4], "serial_total": 10, "parallel_total": 6}


def test_latency_for_problem_exits_on_model_mismatch(runner, running_example_file, monkeypatch):
    monkeypatch.setattr(latency_service, "analytic_latency", lambda problem: LatencyBreakdown.from_steps([1, 1]))
    result = runner.invoke(main, ["latency", "--input", str(running_example_file)])
    assert result.exit_code == 1
    assert "serial total:   10" in result.output


def test_verify_command(runner, tmp_path):
    out = tmp_path / "verify.json"
    args = ["verify", "--trials", "25", "--large-trials", "1", "--max-dim", "4", "--seed", "3", "--output", str(out)]
    result = runner.invoke(main, args)
    assert result.exit_code == 0, result.output
    assert _report(out)["failed"] == 0


def test_verify_with_injected_fault(runner, tmp_path):
    repro = tmp_path / "repro"
    args = [
        "verify", "--trials", "20", "--large-trials", "0", "--max-dim", "3", "--seed", "1",
        "--inject-fault", "--reproducer-dir", str(repro), "--output", str(tmp_path / "v.json"),
    ]
    result = runner.invoke(main, args)
    assert result.exit_code == 1
    assert len(list(repro.iterdir())) == 1


def test_corpus_then_profile(runner, tmp_path):
    corpus_dir = tmp_path / "corpus"
    result = runner.invoke(main, ["corpus", "--out", str(corpus_dir), "--max", "0:2", "--max", "41:2", "--shape", "4x4"])
    assert result.exit_code == 0, result.output
    assert len(list(corpus_dir.glob("*.tugw"))) == 4
    assert int(abs(read_tensor_dump(corpus_dir / "tensor_00003.tugw")).max()) == 41

    out = tmp_path / "profile.json"
    hist = tmp_path / "hist.csv"
    result = runner.invoke(main, ["profile", str(corpus_dir), "--csv", str(hist), "--output", str(out)])
    assert result.exit_code == 0, result.output
    profile = _report(out)
    assert profile["schema_version"] == 1
    assert profile["config"]["w"] == 8
    assert profile["config"]["paths"] == [str(corpus_dir)]
    assert profile["stats"]["cdf"][0] == 50.0
    assert profile["stats"]["mean_max"] == 20.5
    assert hist.exists()


def test_profile_rejects_out_of_range(runner, tmp_path):
    corpus_dir = tmp_path / "corpus"
    runner.invoke(main, ["corpus", "--out", str(corpus_dir), "--max", "100", "--w", "8"])
    result = runner.invoke(main, ["profile", str(corpus_dir), "--w", "4"])
    assert result.exit_code == 6


def test_corpus_profile_matches_measured_distribution(runner, tmp_path):
    corpus_dir = tmp_path / "corpus"
    spec = ["--max", "0:8", "--max", "16:14", "--max", "17:28", "--max", "60:40", "--max", "100:10"]
    result = runner.invoke(main, ["corpus", "--out", str(corpus_dir), *spec, "--shape", "4x4"])
    assert result.exit_code == 0, result.output

    out = tmp_path / "profile.json"
    result = runner.invoke(main, ["profile", str(corpus_dir), "--output", str(out)])
    assert result.exit_code == 0, result.output
    profile = _report(out)
    cdf = profile["stats"]["cdf"]
    assert profile["stats"]["n_operations"] == 100
    assert cdf[0] == 8.0
    assert cdf[49] == 50.0
    assert cdf[79] == 90.0
    assert profile["stats"]["mean_max"] == 41.0
    assert 9.5 <= profile["summary"]["worst_case_ratio"] <= 10
