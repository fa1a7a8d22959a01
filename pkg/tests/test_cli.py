import json
from pathlib import Path

import pytest

from mm.core.app_core import AppCore
from mm.core.ingest import load_facts
from mm.handlers.bench_action_handler import default_csv_path
from mm.ui import report_writer
from mm.ui.cli import build_parser, launch_app

GEN_ARGS = ["--classes", "6", "--methods", "60", "--attributes", "30",
            "--kmax-calls", "3", "--kmax-accesses", "3", "--seed", "7"]


@pytest.fixture(autouse=True)
def _isolated_cwd(tmp_path, monkeypatch):
    # keeps a developer's .modmetrics.json out of the tests
    monkeypatch.chdir(tmp_path)


@pytest.fixture
def facts_file(tmp_path):
    path = tmp_path / "facts.json"
    assert launch_app(["generate", *GEN_ARGS, "--out", str(path)]) == 0
    return path


def test_generate_to_stdout_matches_file(facts_file, capsys):
    assert launch_app(["generate", *GEN_ARGS]) == 0
    assert capsys.readouterr().out == facts_file.read_text(encoding="utf-8")


def test_generate_then_validate(facts_file, capsys):
    assert launch_app(["validate", "--facts", str(facts_file)]) == 0
    assert json.loads(capsys.readouterr().out) == {"valid": True, "violations": []}


def test_generate_preset_uses_reference_size(tmp_path):
    out = tmp_path / "junit.json"
    assert launch_app(["generate", "--preset", "JUnit", "--kmax-calls", "1", "--kmax-accesses", "1",
                       "--out", str(out)]) == 0
    model, _ = load_facts(out)
    assert (model.n_classes, model.n_methods) == (231, 1200)


def test_analyze_json_body(facts_file, tmp_path):
    out = tmp_path / "report.json"
    assert launch_app(["analyze", "--facts", str(facts_file), "--engine", "sequential", "--out", str(out)]) == 0
    body = json.loads(out.read_text(encoding="utf-8"))
    assert len(body["methods"]) == 60
    assert len(body["classes"]) == 6
    assert body["workload"]["n_total"] == 2 * 60 + 60 * 59 // 2 + 2 * 6 * 61
    assert all(i < j for i, j, _ in body["similarity"])


def test_analyze_is_byte_identical_across_engines(facts_file, tmp_path):
    sequential, parallel = tmp_path / "seq.json", tmp_path / "par.json"
    assert launch_app(["analyze", "--facts", str(facts_file), "--engine", "sequential", "--out", str(sequential)]) == 0
    assert launch_app(["analyze", "--facts", str(facts_file), "--engine", "parallel", "--workers", "3",
                       "--executor", "thread", "--checked", "--out", str(parallel)]) == 0
    assert sequential.read_bytes() == parallel.read_bytes()


def test_analyze_is_deterministic(facts_file, tmp_path):
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    for out in (first, second):
        assert launch_app(["analyze", "--facts", str(facts_file), "--engine", "sequential", "--out", str(out)]) == 0
    assert first.read_bytes() == second.read_bytes()
    assert b"\r\n" not in first.read_bytes()


def test_analyze_text_format(facts_file, capsys):
    assert launch_app(["analyze", "--facts", str(facts_file), "--engine", "sequential", "--format", "text"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("Workload")
    assert "Similarity (" in out


def test_suggest_matches_library(facts_file, tmp_path):
    out = tmp_path / "suggest.json"
    assert launch_app(["suggest", "--facts", str(facts_file), "--engine", "sequential", "--out", str(out)]) == 0
    body = json.loads(out.read_text(encoding="utf-8"))

    core = AppCore({"engine": "sequential"})
    model, deps = load_facts(facts_file)
    _, thresholds, suggestions = core.suggest(model, deps)
    expected = report_writer.suggest_document(model, suggestions, thresholds,
                                              ["similarity", "cohesion", "coupling"], "union")
    assert body == json.loads(report_writer.dumps_canonical(expected))
    moves = [(s["origin"], s["method"], s["destination"]) for s in body["suggestions"]]
    assert moves == sorted(moves)


def test_suggest_identical_across_engines(facts_file, tmp_path):
    sequential, parallel = tmp_path / "seq.json", tmp_path / "par.json"
    assert launch_app(["suggest", "--facts", str(facts_file), "--engine", "sequential", "--out", str(sequential)]) == 0
    assert launch_app(["suggest", "--facts", str(facts_file), "--workers", "4", "--executor", "thread",
                       "--out", str(parallel)]) == 0
    assert sequential.read_bytes() == parallel.read_bytes()


def test_suggest_explicit_thresholds(facts_file, capsys):
    assert launch_app(["suggest", "--facts", str(facts_file), "--engine", "sequential",
                       "--threshold-mode", "explicit", "--threshold-lcom", "0.25", "--criteria", "cohesion",
                       "--verbose-candidates"]) == 0
    body = json.loads(capsys.readouterr().out)
    assert body["thresholds"]["mode"] == "explicit"
    assert body["thresholds"]["lcom"] == 0.25
    assert body["thresholds"]["similarity"] == 0.0
    assert body["criteria"] == ["cohesion"]
    assert all(s["criteria"] == ["cohesion"] and "alternatives" in s for s in body["suggestions"])


def test_config_file_is_read(facts_file, tmp_path, capsys):
    (tmp_path / ".modmetrics.json").write_text(json.dumps({"engine": "sequential", "format": "text"}))
    assert launch_app(["validate", "--facts", str(facts_file)]) == 0
    assert capsys.readouterr().out == "valid\n"


# --- exit codes ---

def test_parse_error_exit_code(tmp_path):
    broken = tmp_path / "broken.json"
    broken.write_text("{not json", encoding="utf-8")
    assert launch_app(["analyze", "--facts", str(broken), "--engine", "sequential"]) == 2


def test_invalid_utf8_exit_code(tmp_path):
    broken = tmp_path / "latin1.json"
    broken.write_bytes(b'{"schema_version": "1", "classes": [{"name": "\xe9"}]}')
    assert launch_app(["validate", "--facts", str(broken)]) == 2


def test_validation_error_exit_code(tmp_path, capsys):
    facts = tmp_path / "dangling.json"
    facts.write_text(json.dumps({"schema_version": "1", "classes": [
        {"id": 0, "name": "A", "attributes": [], "methods": [{"id": 0, "name": "f", "calls": [9], "accesses": []}]},
    ]}), encoding="utf-8")
    assert launch_app(["analyze", "--facts", str(facts), "--engine", "sequential"]) == 3
    assert launch_app(["validate", "--facts", str(facts)]) == 3
    body = json.loads(capsys.readouterr().out)
    assert body["valid"] is False
    assert body["violations"][0]["kind"] == "dangling_id"


def test_missing_facts_exit_code(tmp_path):
    assert launch_app(["analyze", "--facts", str(tmp_path / "absent.json")]) == 4


def test_unwritable_output_exit_code(facts_file, tmp_path):
    out = tmp_path / "no" / "such" / "dir" / "report.json"
    assert launch_app(["analyze", "--facts", str(facts_file), "--engine", "sequential", "--out", str(out)]) == 4


@pytest.mark.parametrize("argv", [
    [],
    ["frobnicate"],
    ["analyze"],
    ["analyze", "--facts", "x.json", "--workers", "-1"],
    ["suggest", "--facts", "x.json", "--criteria", "size"],
    ["generate", "--intra-bias", "1.5"],
    ["bench", "--workers", "0"],
])
def test_usage_errors_exit_64(argv):
    assert launch_app(argv) == 64


def test_unknown_preset_is_a_usage_error():
    assert launch_app(["generate", "--preset", "NoSuchSystem"]) == 64


def test_missing_config_file_is_a_usage_error(facts_file, tmp_path):
    assert launch_app(["validate", "--facts", str(facts_file), "--config", str(tmp_path / "none.json")]) == 64


def test_version_flag(capsys):
    assert launch_app(["--version"]) == 0
    assert "modmetrics" in capsys.readouterr().out


# --- bench ---

def test_bench_writes_report_and_csv(tmp_path):
    out = tmp_path / "bench.json"
    assert launch_app(["bench", "--methods", "100", "--workers", "1", "2", "--executor", "thread",
                       "--out", str(out)]) == 0
    body = json.loads(out.read_text(encoding="utf-8"))
    assert [(r["engine"], r["workers"]) for r in body["rows"]] == [("sequential", 1), ("parallel", 1), ("parallel", 2)]
    assert body["rows"][0]["speedup"] == 1.0
    assert len({r["n_suggestions"] for r in body["rows"]}) == 1

    lines = (tmp_path / "bench.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "m,c,n_total,engine,workers,wall_seconds,speedup"
    assert len(lines) == 4
    assert lines[1].startswith("100,10,")


def test_bench_size_lists_must_line_up(tmp_path):
    assert launch_app(["bench", "--methods", "100", "200", "--classes", "1", "2", "3",
                       "--out", str(tmp_path / "b.json")]) == 64


def test_bench_csv_report_keeps_its_own_csv(tmp_path):
    out = tmp_path / "bench.csv"
    assert launch_app(["bench", "--methods", "100", "--workers", "1", "--executor", "thread",
                       "--out", str(out)]) == 0
    assert json.loads(out.read_text(encoding="utf-8"))["rows"]
    lines = (tmp_path / "bench.bench.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "m,c,n_total,engine,workers,wall_seconds,speedup"


def test_bench_csv_cannot_overwrite_report(tmp_path):
    out = tmp_path / "bench.json"
    assert launch_app(["bench", "--methods", "100", "--workers", "1", "--executor", "thread",
                       "--out", str(out), "--csv", str(out)]) == 64
    assert not out.exists()


@pytest.mark.parametrize("out, expected", [
    (None, "bench.csv"),
    ("runs/bench.json", "runs/bench.csv"),
    ("runs/bench.csv", "runs/bench.bench.csv"),
    ("runs/Bench.CSV", "runs/Bench.bench.csv"),
])
def test_default_csv_path(out, expected):
    assert default_csv_path(None if out is None else Path(out)) == Path(expected)


def test_parser_defaults_leave_config_untouched():
    args = build_parser().parse_args(["suggest", "--facts", "f.json"])
    assert args.engine is None and args.workers is None and args.checked is None
    assert args.criteria is None and args.threshold_mode is None
