from __future__ import annotations

import json
from pathlib import Path

import pytest
from click.testing import CliRunner

import motbench.llm_client as llm_client_mod
from motbench.benchmark import DatasetId
from motbench.cli_report import (
    MissingSummary,
    aggregate_entries,
    build_report_rows,
    main,
    read_log,
    render_report_csv,
    render_report_table,
)
from motbench.llm_client import Pricing
from motbench.strategies import StrategyId

REPO = Path(__file__).resolve().parent.parent
FIXTURES = REPO / "fixtures"
CONFIG = FIXTURES / "run_config.json"
BUNDLE_FLAGS = [
    "--config",
    str(CONFIG),
    "--data",
    str(FIXTURES / "sample" / "problems.jsonl"),
    "--fixtures",
    str(FIXTURES / "llm"),
    "--exec-fixtures",
    str(FIXTURES / "exec_reports.json"),
]


def run_cli(args: list[str]):
    return CliRunner().invoke(main, args, catch_exceptions=False)


def replay_run(tmp_path: Path, extra: list[str] | None = None, name: str = "out"):
    out = tmp_path / name
    result = run_cli(["run", *BUNDLE_FLAGS, "--out", str(out), *(extra or [])])
    return result, out


class TestCmdRun:
    def test_two_strategies_ten_entries_two_blocks(self, tmp_path):
        result, out = replay_run(tmp_path, ["--strategy", "mot,zero_shot"])
        assert result.exit_code == 0, result.output
        entries = read_log(out / "run_log.jsonl")
        assert len(entries) == 10
        summary = json.loads((out / "summary.json").read_text())
        assert set(summary["strategies"]) == {"mot", "zero_shot"}

    def test_full_bundle_counts(self, tmp_path):
        result, out = replay_run(tmp_path)
        assert result.exit_code == 0, result.output
        manifest = json.loads((FIXTURES / "manifest.json").read_text())
        assert len(read_log(out / "run_log.jsonl")) == manifest["log_entries"]

    def test_problem_filter_single_id(self, tmp_path):
        result, out = replay_run(tmp_path, ["--only", "sample/0"])
        assert result.exit_code == 0, result.output
        entries = read_log(out / "run_log.jsonl")
        assert len(entries) == 5  # one per strategy
        assert {e["task_id"] for e in entries} == {"sample/0"}

    def test_rerun_summary_identical_excluding_timings(self, tmp_path):
        _, out1 = replay_run(tmp_path, name="a")
        _, out2 = replay_run(tmp_path, name="b")
        assert _normalized(out1 / "summary.json") == _normalized(out2 / "summary.json")

    def test_resume_skips_completed_pairs(self, tmp_path):
        _, out = replay_run(tmp_path, ["--strategy", "zero_shot"])
        before = read_log(out / "run_log.jsonl")
        result = run_cli(
            ["run", *BUNDLE_FLAGS, "--strategy", "mot,zero_shot", "--out", str(out), "--resume"]
        )
        assert result.exit_code == 0, result.output
        after = read_log(out / "run_log.jsonl")
        assert len(after) == len(before) + 5  # only mot pairs added
        zero_shot_entries = [e for e in after if e["strategy"] == "zero_shot"]
        assert len(zero_shot_entries) == 5

    def test_infra_failure_exit_code_2(self, tmp_path):
        broken = tmp_path / "exec_reports.json"
        reports = json.loads((FIXTURES / "exec_reports.json").read_text())
        del reports["zero_shot:sample/0"]
        broken.write_text(json.dumps(reports))
        out = tmp_path / "out"
        result = run_cli(
            [
                "run",
                *BUNDLE_FLAGS[:6],
                "--exec-fixtures",
                str(broken),
                "--strategy",
                "zero_shot",
                "--out",
                str(out),
            ]
        )
        assert result.exit_code == 2
        failures = json.loads((out / "failures.json").read_text())
        assert failures[0]["task_id"] == "sample/0"
        summary = json.loads((out / "summary.json").read_text())
        block = summary["strategies"]["zero_shot"]
        assert block["infra_failures"] == ["sample/0"]
        assert block["problems_evaluated"] == 4  # excluded from denominators

    def test_metrics_recomputable_from_log_alone(self, tmp_path):
        _, out = replay_run(tmp_path)
        summary = json.loads((out / "summary.json").read_text())
        entries = read_log(out / "run_log.jsonl")
        pricing = Pricing(1e-6, 2e-6)
        recomputed = aggregate_entries(entries, DatasetId.HUMANEVAL, pricing)
        for sid, block in summary["strategies"].items():
            for key in ("pass_at_1_pct", "apr_pct", "avg_cost_usd", "avg_in_tokens", "avg_out_tokens"):
                assert recomputed[sid][key] == pytest.approx(block[key], abs=1e-12)

    def test_replay_mode_zero_network(self, tmp_path, monkeypatch):
        import requests

        def explode(*a, **k):
            raise AssertionError("network touched in replay mode")

        monkeypatch.setattr(requests, "post", explode)
        monkeypatch.setattr(requests, "request", explode, raising=False)
        result, _ = replay_run(tmp_path)
        assert result.exit_code == 0

    def test_missing_config_values_rejected(self, tmp_path):
        result = run_cli(["run", "--dataset", "humaneval", "--out", str(tmp_path)])
        assert result.exit_code != 0

    def test_repeats_write_per_repeat_blocks(self, tmp_path):
        result, out = replay_run(tmp_path, ["--strategy", "zero_shot", "--repeats", "2"])
        assert result.exit_code == 0, result.output
        entries = read_log(out / "run_log.jsonl")
        assert len(entries) == 10  # 5 problems x 2 repeats
        summary = json.loads((out / "summary.json").read_text())
        assert set(summary["repeats"]) == {"1", "2"}
        for block in summary["repeats"].values():
            assert block["zero_shot"]["pass_at_1_pct"] == 60.0
        assert summary["strategies"]["zero_shot"]["problems_evaluated"] == 10

    def test_replay_requires_existing_fixture_store(self, tmp_path):
        result = run_cli(
            [
                "run",
                "--dataset",
                "humaneval",
                "--data",
                str(FIXTURES / "sample" / "problems.jsonl"),
                "--strategy",
                "zero_shot",
                "--mode",
                "replay",
                "--fixtures",
                str(tmp_path / "missing-store"),
                "--exec-fixtures",
                str(FIXTURES / "exec_reports.json"),
                "--out",
                str(tmp_path / "o"),
            ]
        )
        assert result.exit_code != 0
        assert "fixture store" in result.output

    def test_replay_requires_fixture_dir(self, tmp_path):
        result = run_cli(
            [
                "run",
                "--dataset",
                "humaneval",
                "--data",
                str(FIXTURES / "sample" / "problems.jsonl"),
                "--strategy",
                "zero_shot",
                "--mode",
                "replay",
                "--out",
                str(tmp_path / "o"),
            ]
        )
        assert result.exit_code != 0


class TestRecordReplay:
    def test_record_then_replay_identical_extracted_code(self, tmp_path, monkeypatch):
        monkeypatch.setenv("MOTBENCH_API_KEY", "test-key")
        reply = "Sure.\n```python\ndef add_two(a, b):\n    return a + b\n```\n"

        def fake_transport(url, headers, payload, timeout):
            return 200, {
                "choices": [{"message": {"content": reply}}],
                "usage": {"prompt_tokens": 42, "completion_tokens": 17},
            }

        monkeypatch.setattr(llm_client_mod, "_requests_transport", fake_transport)
        store = tmp_path / "store"
        common = [
            "--data",
            str(FIXTURES / "sample" / "problems.jsonl"),
            "--strategy",
            "zero_shot",
            "--dataset",
            "humaneval",
            "--only",
            "sample/0",
            "--exec-fixtures",
            str(FIXTURES / "exec_reports.json"),
            "--fixtures",
            str(store),
        ]
        recorded = run_cli(
            ["run", *common, "--config", str(CONFIG), "--mode", "record", "--out", str(tmp_path / "rec")]
        )
        assert recorded.exit_code == 0, recorded.output
        replayed = run_cli(
            ["run", *common, "--config", str(CONFIG), "--mode", "replay", "--out", str(tmp_path / "rep")]
        )
        assert replayed.exit_code == 0, replayed.output
        code_rec = read_log(tmp_path / "rec" / "run_log.jsonl")[0]["extracted_code"]
        code_rep = read_log(tmp_path / "rep" / "run_log.jsonl")[0]["extracted_code"]
        assert code_rec == code_rep == "def add_two(a, b):\n    return a + b\n"


def _summary(strategies: dict, dataset: str = "humaneval") -> dict:
    return {"dataset": dataset, "data_path": "x", "mode": "replay", "strategies": strategies}


def _block(pass_at_1: float | None, apr: float | None) -> dict:
    return {
        "pass_at_1_pct": pass_at_1,
        "apr_pct": apr,
        "avg_cost_usd": 0.0044,
        "avg_in_tokens": 501.3,
        "avg_out_tokens": 282.4,
        "avg_wall_time_s": 1.0,
        "problems_evaluated": 164,
        "infra_failures": [],
    }


class TestCmdReport:
    def test_delta_cell_against_baseline(self, tmp_path):
        run_dir = tmp_path / "r1"
        run_dir.mkdir()
        (run_dir / "summary.json").write_text(
            json.dumps(_summary({"mot": _block(92.1, 96.9), "zero_shot": _block(88.4, 86.2)}))
        )
        rows = build_report_rows([run_dir], baseline=StrategyId.MOT)
        by_sid = {r["strategy"]: r for r in rows}
        assert by_sid["zero_shot"]["pass_at_1_delta"] == "(−4.02%)"
        table = render_report_table(rows)
        assert "(−4.02%)" in table

    def test_mbpp_plus_apr_unavailable(self, tmp_path):
        run_dir = tmp_path / "r1"
        run_dir.mkdir()
        (run_dir / "summary.json").write_text(
            json.dumps(_summary({"mot": _block(58.1, None)}, dataset="mbpp_plus"))
        )
        result = run_cli(["report", "--runs", str(run_dir), "--baseline", "mot"])
        assert result.exit_code == 0, result.output
        row = [l for l in result.output.splitlines() if "mot" in l][0]
        assert "n/a" in row

    def test_single_strategy_baseline_itself(self, tmp_path):
        run_dir = tmp_path / "r1"
        run_dir.mkdir()
        (run_dir / "summary.json").write_text(json.dumps(_summary({"mot": _block(92.1, 96.9)})))
        result = run_cli(["report", "--runs", str(run_dir), "--baseline", "mot"])
        assert result.exit_code == 0
        assert "(+0.00%)" in result.output

    def test_missing_summary(self, tmp_path):
        with pytest.raises(MissingSummary):
            build_report_rows([tmp_path], baseline=StrategyId.MOT)

    def test_csv_machine_form(self, tmp_path):
        run_dir = tmp_path / "r1"
        run_dir.mkdir()
        (run_dir / "summary.json").write_text(
            json.dumps(_summary({"mot": _block(92.1, 96.9), "cot": _block(87.8, 79.2)}))
        )
        result = run_cli(["report", "--runs", str(run_dir), "--baseline", "mot"])
        assert result.exit_code == 0
        csv_text = (run_dir / "report.csv").read_text()
        header = csv_text.splitlines()[0].split(",")
        assert header[:3] == ["run", "dataset", "strategy"]
        assert "avg_cost_usd" in header

    def test_cost_columns_in_table_order(self, tmp_path):
        run_dir = tmp_path / "r1"
        run_dir.mkdir()
        (run_dir / "summary.json").write_text(json.dumps(_summary({"mot": _block(92.1, 96.9)})))
        result = run_cli(["report", "--runs", str(run_dir), "--baseline", "mot"])
        header = result.output.splitlines()[0]
        assert header.index("Cost ($)") < header.index("In-token") < header.index("Out-Token")


class TestAggregationOrderIndependence:
    def test_shuffled_entries_same_blocks(self, tmp_path):
        _, out = replay_run(tmp_path)
        entries = read_log(out / "run_log.jsonl")
        import random

        shuffled = entries[:]
        random.Random(9).shuffle(shuffled)
        pricing = Pricing(1e-6, 2e-6)
        assert aggregate_entries(entries, DatasetId.HUMANEVAL, pricing) == aggregate_entries(
            shuffled, DatasetId.HUMANEVAL, pricing
        )


class TestCmdGraph:
    def test_prints_stats_for_replay_fixture(self):
        result = run_cli(
            [
                "graph",
                "--config",
                str(CONFIG),
                "--data",
                str(FIXTURES / "sample" / "problems.jsonl"),
                "--fixtures",
                str(FIXTURES / "llm"),
                "--task",
                "sample/0",
            ]
        )
        assert result.exit_code == 0, result.output
        assert "stats (high, intermediate, detailed, edges): (3, 3, 2, 5)" in result.output
        assert "validation: ok" in result.output

    def test_graph_output_file_is_schema_valid(self, tmp_path):
        out_file = tmp_path / "graph.json"
        result = run_cli(
            [
                "graph",
                "--config",
                str(CONFIG),
                "--data",
                str(FIXTURES / "sample" / "problems.jsonl"),
                "--fixtures",
                str(FIXTURES / "llm"),
                "--task",
                "sample/1",
                "--out",
                str(out_file),
            ]
        )
        assert result.exit_code == 0, result.output
        from motbench.mlr_graph import parse_graph, validate_graph

        graph, _ = parse_graph(out_file.read_text())
        assert validate_graph(graph).ok

    def test_malformed_graph_retries_exhausted_nonzero_exit(self, tmp_path):
        # Record three junk phase-1 responses (initial + two feedback
        # retries) into a throwaway store, then replay them through the CLI.
        from motbench.benchmark import DatasetId as DID
        from motbench.benchmark import load_dataset
        from motbench.llm_client import ChatRequest, ChatResponse, FixtureStore, Usage, record_fixture
        from motbench.strategies import GenerationRecord, run_graph_phase

        class Recorder:
            def __init__(self, store):
                self.store = store
                self.queue = ["junk one", "junk two", "junk three"]

            def chat(self, messages, max_output_tokens=None):
                response = ChatResponse(self.queue.pop(0), Usage(1, 1))
                record_fixture(
                    self.store, ChatRequest("fixture-model-v1", tuple(messages)), response, overwrite=True
                )
                return response

        store_dir = tmp_path / "store"
        store_dir.mkdir()
        problems = load_dataset(DID.HUMANEVAL, FIXTURES / "sample" / "problems.jsonl")
        problem = next(p for p in problems if p.task_id == "sample/0")
        recorder = Recorder(FixtureStore(store_dir))
        record = GenerationRecord(task_id=problem.task_id, strategy=StrategyId.MOT)
        assert run_graph_phase(problem, recorder, record) is None

        result = run_cli(
            [
                "graph",
                "--config",
                str(CONFIG),
                "--data",
                str(FIXTURES / "sample" / "problems.jsonl"),
                "--fixtures",
                str(store_dir),
                "--task",
                "sample/0",
            ]
        )
        assert result.exit_code == 1
        assert "could not be validated" in result.output

    def test_unknown_task_fails(self):
        result = run_cli(
            [
                "graph",
                "--config",
                str(CONFIG),
                "--data",
                str(FIXTURES / "sample" / "problems.jsonl"),
                "--fixtures",
                str(FIXTURES / "llm"),
                "--task",
                "sample/404",
            ]
        )
        assert result.exit_code != 0


def _normalized(path: Path) -> str:
    data = json.loads(Path(path).read_text())

    def strip(obj):
        if isinstance(obj, dict):
            return {k: strip(v) for k, v in obj.items() if k not in ("avg_wall_time_s",)}
        if isinstance(obj, list):
            return [strip(v) for v in obj]
        return obj

    return json.dumps(strip(data), sort_keys=True)
