"""Command-line entry points, run logging, and report generation.

A run walks every (problem, strategy) pair with bounded parallelism,
appends one line-delimited log record per pair as results arrive (a single
writer owns the log file), and finally aggregates a summary per strategy.
The log is a complete record: the summary can always be recomputed from it
offline. Infrastructure failures are kept out of the metric denominators
and reported separately; they flip the exit code to 2.
"""

from __future__ import annotations

import json
import sys
import threading
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path
from statistics import fmean

import click

from . import metrics as metrics_mod
from .benchmark import DatasetId, MissingEntryPoint, Problem, assemble_case_program, load_dataset
from .executor import (
    Backend,
    BackendUnavailable,
    CaseResult,
    CaseStatus,
    ExecReport,
    ExecRequest,
    RecordedBackend,
    SubprocessWireBackend,
    evaluate_candidate,
)
from .llm_client import (
    Client,
    FixtureStore,
    LiveClient,
    Pricing,
    ProviderConfig,
    ProviderError,
    RecordingClient,
    ReplayClient,
    Usage,
)
from .mlr_graph import graph_stats, serialize_for_prompt, validate_graph
from .strategies import (
    EmptyCandidate,
    ExecutorRequired,
    GenerationRecord,
    GraphUnrecoverable,
    StrategyId,
    generate,
    run_graph_phase,
)

LOG_FILENAME = "run_log.jsonl"
SUMMARY_FILENAME = "summary.json"
FAILURES_FILENAME = "failures.json"


class ConfigError(Exception):
    pass


class MissingSummary(Exception):
    pass


@dataclass
class RunConfig:
    dataset: DatasetId
    data_path: Path
    strategies: list[StrategyId]
    mode: str = "replay"  # live | replay | record
    provider: ProviderConfig = field(default_factory=ProviderConfig)
    fixtures_dir: Path | None = None
    exec_fixtures: Path | None = None
    worker_cmd: list[str] | None = None
    parallelism: int = 4
    timeout_ms: int = 10_000
    output_dir: Path = Path("runs/out")
    problem_filter: list[str] | None = None
    resume: bool = False
    per_node_phase2: bool = False
    repeats: int = 1
    overwrite_fixtures: bool = False

    def __post_init__(self):
        if self.parallelism < 1:
            raise ConfigError("parallelism must be >= 1")
        if self.mode not in ("live", "replay", "record"):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.repeats < 1:
            raise ConfigError("repeats must be >= 1")
        if self.mode in ("replay", "record") and self.fixtures_dir is None:
            raise ConfigError(f"mode {self.mode} requires a fixtures directory")


def provider_from_dict(raw: dict) -> ProviderConfig:
    pricing_raw = raw.get("pricing") or {}
    return ProviderConfig(
        base_url=raw.get("base_url", "https://api.openai.com/v1"),
        api_key_env_name=raw.get("api_key_env_name", "OPENAI_API_KEY"),
        model=raw.get("model", "gpt-4o-mini"),
        request_timeout_s=float(raw.get("request_timeout_s", 120.0)),
        max_retries=int(raw.get("max_retries", 3)),
        pricing=Pricing(
            usd_per_input_token=float(pricing_raw.get("usd_per_input_token", 0.0)),
            usd_per_output_token=float(pricing_raw.get("usd_per_output_token", 0.0)),
        ),
    )


def load_config_file(path: Path) -> dict:
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config file must hold a single object")
    return raw


def build_client(config: RunConfig) -> Client:
    if config.mode == "replay":
        if not Path(config.fixtures_dir).is_dir():
            raise ConfigError(f"replay mode requires an existing fixture store: {config.fixtures_dir}")
        return ReplayClient(FixtureStore(config.fixtures_dir), config.provider.model)
    live = LiveClient(config.provider)
    if config.mode == "record":
        return RecordingClient(live, FixtureStore(config.fixtures_dir), overwrite=config.overwrite_fixtures)
    return live


def build_exec_backend(config: RunConfig) -> Backend:
    if config.exec_fixtures is not None:
        return RecordedBackend.from_json_file(config.exec_fixtures)
    if config.worker_cmd:
        return SubprocessWireBackend(config.worker_cmd)
    raise ConfigError("no execution backend: provide --exec-fixtures or --worker-cmd")


# ---------------------------------------------------------------------------
# Run log entries


def _now_iso() -> str:
    return datetime.now(timezone.utc).isoformat()


def record_to_entry(record: GenerationRecord) -> dict:
    entry: dict = {
        "task_id": record.task_id,
        "strategy": record.strategy.value,
        "calls": [
            {
                "prompt": [[m.role, m.content] for m in call.prompt.messages],
                "response": call.response,
                "in_tokens": call.usage.in_tokens,
                "out_tokens": call.usage.out_tokens,
                "latency_s": call.latency_s,
            }
            for call in record.calls
        ],
        "graph": None,
        "extracted_code": record.extracted_code,
        "fallback_used": record.fallback_used,
        "wall_time_s": record.wall_time_s,
    }
    if record.parsed_graph is not None and record.task_elements is not None:
        entry["graph"] = record.parsed_graph.to_schema_dict(record.task_elements)
    return entry


def run_pair(
    problem: Problem,
    strategy: StrategyId,
    client: Client,
    backend: Backend,
    backend_lock: threading.Lock | None,
    config: RunConfig,
    repeat: int,
) -> dict:
    """Generate + evaluate one pair; every outcome shape becomes one log entry."""
    started = _now_iso()
    entry: dict
    try:
        record = generate(
            strategy,
            problem,
            client,
            executor=backend,
            per_node_phase2=config.per_node_phase2,
            exec_timeout_ms=config.timeout_ms,
        )
    except ProviderError as exc:
        entry = _failure_entry(problem, strategy, infra_error=f"provider: {exc}")
    except (BackendUnavailable, ExecutorRequired) as exc:
        entry = _failure_entry(problem, strategy, infra_error=f"executor: {exc}")
    except (EmptyCandidate, GraphUnrecoverable) as exc:
        entry = _failure_entry(problem, strategy, generation_error=str(exc))
        entry["outcome"] = {
            "solved": False,
            "cases_passed": 0,
            "cases_total": len(problem.suite.cases),
        }
    else:
        entry = record_to_entry(record)
        report = _evaluate(problem, strategy, record.extracted_code, backend, backend_lock, config)
        if isinstance(report, str):
            entry["exec"] = None
            entry["infra_error"] = report
            entry["outcome"] = None
        else:
            entry["exec"] = {
                "results": [{"status": r.status.value, "detail": r.detail} for r in report.results],
                "duration_ms": report.duration_ms,
            }
            entry["infra_error"] = None
            entry["outcome"] = {
                "solved": report.solved,
                "cases_passed": report.cases_passed,
                "cases_total": report.cases_total,
            }
    entry["repeat"] = repeat
    entry["started_at"] = started
    entry["finished_at"] = _now_iso()
    return entry


def _failure_entry(
    problem: Problem,
    strategy: StrategyId,
    *,
    infra_error: str | None = None,
    generation_error: str | None = None,
) -> dict:
    return {
        "task_id": problem.task_id,
        "strategy": strategy.value,
        "calls": [],
        "graph": None,
        "extracted_code": "",
        "fallback_used": False,
        "wall_time_s": 0.0,
        "exec": None,
        "infra_error": infra_error,
        "generation_error": generation_error,
        "outcome": None,
    }


def _evaluate(
    problem: Problem,
    strategy: StrategyId,
    code: str,
    backend: Backend,
    backend_lock: threading.Lock | None,
    config: RunConfig,
) -> ExecReport | str:
    """Returns a report, or an infra-error string."""
    try:
        assemble_case_program(problem, code, 0)
    except MissingEntryPoint as exc:
        results = tuple(CaseResult(CaseStatus.ERROR, str(exc)) for _ in problem.suite.cases)
        return ExecReport(id=f"{strategy.value}:{problem.task_id}", results=results, duration_ms=0)
    request = ExecRequest(
        id=f"{strategy.value}:{problem.task_id}",
        source=code,
        setup=problem.suite.setup,
        cases=problem.suite.cases,
        timeout_ms=config.timeout_ms,
    )
    try:
        if backend_lock is not None:
            with backend_lock:
                return evaluate_candidate(backend, request)
        return evaluate_candidate(backend, request)
    except BackendUnavailable as exc:
        return f"executor: {exc}"


# ---------------------------------------------------------------------------
# Aggregation


def entry_outcome(entry: dict) -> metrics_mod.ProblemOutcome | None:
    outcome = entry.get("outcome")
    if outcome is None:
        return None
    return metrics_mod.ProblemOutcome(
        task_id=entry["task_id"],
        samples_total=1,
        samples_correct=1 if outcome["solved"] else 0,
        cases_total=outcome["cases_total"],
        cases_passed=outcome["cases_passed"],
    )


def aggregate_entries(entries: list[dict], dataset: DatasetId, pricing: Pricing) -> dict:
    """Per-strategy metric blocks from run-log entries (infra failures excluded)."""
    by_strategy: dict[str, list[dict]] = {}
    for entry in entries:
        by_strategy.setdefault(entry["strategy"], []).append(entry)

    blocks: dict[str, dict] = {}
    for sid, strategy_entries in sorted(by_strategy.items()):
        strategy_entries = sorted(strategy_entries, key=lambda e: (e["task_id"], e.get("repeat", 1)))
        infra = sorted(e["task_id"] for e in strategy_entries if e.get("infra_error"))
        usable = [e for e in strategy_entries if not e.get("infra_error")]
        outcomes = [o for o in (entry_outcome(e) for e in usable) if o is not None]
        if not outcomes:
            blocks[sid] = {
                "problems_evaluated": 0,
                "infra_failures": infra,
                "pass_at_1_pct": None,
                "apr_pct": None,
                "avg_cost_usd": None,
                "avg_in_tokens": None,
                "avg_out_tokens": None,
                "avg_wall_time_s": None,
            }
            continue
        usage_lists = [
            [Usage(c["in_tokens"], c["out_tokens"]) for c in e["calls"]] for e in usable
        ]
        cost = metrics_mod.cost_summary(usage_lists, pricing)
        apr = (
            metrics_mod.avg_pass_ratio(outcomes, dataset) if dataset.apr_supported else None
        )
        blocks[sid] = {
            "problems_evaluated": len(outcomes),
            "infra_failures": infra,
            "pass_at_1_pct": metrics_mod.pass_at_1(outcomes),
            "apr_pct": apr,
            "avg_cost_usd": cost.avg_cost_usd,
            "avg_in_tokens": cost.avg_in_tokens,
            "avg_out_tokens": cost.avg_out_tokens,
            "avg_wall_time_s": fmean(e.get("wall_time_s", 0.0) for e in usable),
        }
    return blocks


def read_log(path: Path) -> list[dict]:
    entries = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                entries.append(json.loads(line))
    return entries


def summarize_entries(entries: list[dict], config: RunConfig) -> dict:
    summary: dict = {
        "dataset": config.dataset.value,
        "data_path": str(config.data_path),
        "mode": config.mode,
        "strategies": aggregate_entries(entries, config.dataset, config.provider.pricing),
    }
    repeats = sorted({e.get("repeat", 1) for e in entries})
    if len(repeats) > 1:
        summary["repeats"] = {
            str(r): aggregate_entries(
                [e for e in entries if e.get("repeat", 1) == r], config.dataset, config.provider.pricing
            )
            for r in repeats
        }
    return summary


# ---------------------------------------------------------------------------
# Commands


def execute_run(config: RunConfig) -> int:
    problems = load_dataset(config.dataset, config.data_path)
    if config.problem_filter:
        wanted = set(config.problem_filter)
        missing = wanted - {p.task_id for p in problems}
        if missing:
            raise ConfigError(f"unknown task ids in filter: {sorted(missing)}")
        problems = [p for p in problems if p.task_id in wanted]
    if not problems:
        raise ConfigError("no problems selected")

    client = build_client(config)
    backend = build_exec_backend(config)
    backend_lock = None if backend.concurrency_safe else threading.Lock()

    config.output_dir.mkdir(parents=True, exist_ok=True)
    log_path = config.output_dir / LOG_FILENAME

    done: set[tuple[str, str, int]] = set()
    entries: list[dict] = []
    if config.resume and log_path.exists():
        entries = read_log(log_path)
        done = {(e["task_id"], e["strategy"], e.get("repeat", 1)) for e in entries}
    elif log_path.exists():
        log_path.unlink()

    pairs = [
        (problem, strategy, repeat)
        for repeat in range(1, config.repeats + 1)
        for problem in problems
        for strategy in config.strategies
        if (problem.task_id, strategy.value, repeat) not in done
    ]

    # Single-writer discipline: workers compute, only this thread appends.
    with open(log_path, "a", encoding="utf-8") as log_fh:
        with ThreadPoolExecutor(max_workers=config.parallelism) as pool:
            futures = [
                pool.submit(run_pair, problem, strategy, client, backend, backend_lock, config, repeat)
                for problem, strategy, repeat in pairs
            ]
            for future in as_completed(futures):
                entry = future.result()
                log_fh.write(json.dumps(entry, ensure_ascii=False) + "\n")
                log_fh.flush()
                entries.append(entry)

    if isinstance(backend, SubprocessWireBackend):
        backend.close()

    summary = summarize_entries(entries, config)
    (config.output_dir / SUMMARY_FILENAME).write_text(
        json.dumps(summary, indent=2, sort_keys=True, ensure_ascii=False) + "\n", encoding="utf-8"
    )

    failures = [
        {"task_id": e["task_id"], "strategy": e["strategy"], "error": e["infra_error"]}
        for e in entries
        if e.get("infra_error")
    ]
    if failures:
        (config.output_dir / FAILURES_FILENAME).write_text(
            json.dumps(sorted(failures, key=lambda f: (f["task_id"], f["strategy"])), indent=2) + "\n",
            encoding="utf-8",
        )
        click.echo(f"{len(failures)} infrastructure failure(s); see {FAILURES_FILENAME}", err=True)
        return 2
    return 0


def _delta_cell(value: float | None, reference: float | None) -> str:
    if value is None or reference is None:
        return ""
    try:
        return f"({metrics_mod.relative_delta(value, reference)})"
    except metrics_mod.ZeroReference:
        return ""


def build_report_rows(run_dirs: list[Path], baseline: StrategyId) -> list[dict]:
    rows: list[dict] = []
    for run_dir in run_dirs:
        summary_path = run_dir / SUMMARY_FILENAME
        if not summary_path.is_file():
            raise MissingSummary(f"{run_dir} has no {SUMMARY_FILENAME}")
        summary = json.loads(summary_path.read_text(encoding="utf-8"))
        strategies = summary.get("strategies", {})
        base_block = strategies.get(baseline.value)
        if base_block is None:
            raise MissingSummary(f"{run_dir} has no baseline strategy {baseline.value!r}")
        for sid, block in sorted(strategies.items()):
            rows.append(
                {
                    "run": run_dir.name,
                    "dataset": summary.get("dataset", ""),
                    "strategy": sid,
                    "pass_at_1": block.get("pass_at_1_pct"),
                    "pass_at_1_delta": _delta_cell(block.get("pass_at_1_pct"), base_block.get("pass_at_1_pct")),
                    "apr": block.get("apr_pct"),
                    "apr_delta": _delta_cell(block.get("apr_pct"), base_block.get("apr_pct")),
                    "avg_cost_usd": block.get("avg_cost_usd"),
                    "avg_in_tokens": block.get("avg_in_tokens"),
                    "avg_out_tokens": block.get("avg_out_tokens"),
                }
            )
    return rows


def render_report_table(rows: list[dict]) -> str:
    headers = ["Run", "Dataset", "Strategy", "Pass@1", "APR", "Cost ($)", "In-token", "Out-Token"]
    table = [headers]
    for row in rows:
        pass_cell = (
            f"{metrics_mod.format_percent(row['pass_at_1'])} {row['pass_at_1_delta']}".strip()
            if row["pass_at_1"] is not None
            else "-"
        )
        apr_cell = (
            f"{metrics_mod.format_percent(row['apr'])} {row['apr_delta']}".strip()
            if row["apr"] is not None
            else "n/a"
        )
        table.append(
            [
                row["run"],
                row["dataset"],
                row["strategy"],
                pass_cell,
                apr_cell,
                metrics_mod.format_cost(row["avg_cost_usd"]) if row["avg_cost_usd"] is not None else "-",
                metrics_mod.format_tokens(row["avg_in_tokens"]) if row["avg_in_tokens"] is not None else "-",
                metrics_mod.format_tokens(row["avg_out_tokens"]) if row["avg_out_tokens"] is not None else "-",
            ]
        )
    widths = [max(len(r[i]) for r in table) for i in range(len(headers))]
    lines = []
    for i, r in enumerate(table):
        lines.append("  ".join(cell.ljust(widths[j]) for j, cell in enumerate(r)).rstrip())
        if i == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)


def render_report_csv(rows: list[dict]) -> str:
    import csv
    import io

    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(
        [
            "run",
            "dataset",
            "strategy",
            "pass_at_1",
            "pass_at_1_delta",
            "apr",
            "apr_delta",
            "avg_cost_usd",
            "avg_in_tokens",
            "avg_out_tokens",
        ]
    )
    for row in rows:
        writer.writerow(
            [
                row["run"],
                row["dataset"],
                row["strategy"],
                "" if row["pass_at_1"] is None else metrics_mod.format_percent(row["pass_at_1"]),
                row["pass_at_1_delta"],
                "" if row["apr"] is None else metrics_mod.format_percent(row["apr"]),
                row["apr_delta"],
                "" if row["avg_cost_usd"] is None else repr(row["avg_cost_usd"]),
                "" if row["avg_in_tokens"] is None else metrics_mod.format_tokens(row["avg_in_tokens"]),
                "" if row["avg_out_tokens"] is None else metrics_mod.format_tokens(row["avg_out_tokens"]),
            ]
        )
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Click wiring


def _merge_config(config_file: Path | None, **flags) -> RunConfig:
    raw = load_config_file(config_file) if config_file else {}

    def pick(flag_name: str, file_key: str, default=None):
        value = flags.get(flag_name)
        if value is not None and value != ():
            return value
        if file_key in raw:
            return raw[file_key]
        return default

    dataset_raw = pick("dataset", "dataset")
    data_raw = pick("data", "data")
    strategies_raw = pick("strategy", "strategies")
    if not dataset_raw or not data_raw or not strategies_raw:
        raise ConfigError("dataset, data path, and at least one strategy are required")
    if isinstance(strategies_raw, str):
        strategies_raw = [s for s in strategies_raw.split(",") if s]
    try:
        dataset = DatasetId(dataset_raw)
        strategies = [StrategyId(s) for s in strategies_raw]
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    worker_cmd = pick("worker_cmd", "worker_cmd")
    if isinstance(worker_cmd, str):
        worker_cmd = worker_cmd.split()

    only = pick("only", "only")
    if isinstance(only, str):
        only = [s for s in only.split(",") if s]

    provider = provider_from_dict(raw.get("provider", {}))
    model = flags.get("model")
    if model:
        provider = replace(provider, model=model)

    fixtures = pick("fixtures", "fixtures")
    exec_fixtures = pick("exec_fixtures", "exec_fixtures")
    return RunConfig(
        dataset=dataset,
        data_path=Path(data_raw),
        strategies=strategies,
        mode=pick("mode", "mode", "replay"),
        provider=provider,
        fixtures_dir=Path(fixtures) if fixtures else None,
        exec_fixtures=Path(exec_fixtures) if exec_fixtures else None,
        worker_cmd=list(worker_cmd) if worker_cmd else None,
        parallelism=int(pick("parallelism", "parallelism", 4)),
        timeout_ms=int(pick("timeout_ms", "timeout_ms", 10_000)),
        output_dir=Path(pick("out", "out", "runs/out")),
        problem_filter=list(only) if only else None,
        resume=bool(pick("resume", "resume", False)),
        per_node_phase2=bool(pick("per_node_phase2", "per_node_phase2", False)),
        repeats=int(pick("repeats", "repeats", 1)),
        overwrite_fixtures=bool(pick("overwrite_fixtures", "overwrite_fixtures", False)),
    )


@click.group()
def main():
    """Benchmark harness for graph-guided modular code generation."""


@main.command("run")
@click.option("--config", "config_file", type=click.Path(exists=True, path_type=Path), default=None)
@click.option("--dataset", type=str, default=None)
@click.option("--data", type=str, default=None)
@click.option("--strategy", type=str, default=None, help="comma separated strategy ids")
@click.option("--mode", type=click.Choice(["live", "replay", "record"]), default=None)
@click.option("--fixtures", type=str, default=None)
@click.option("--exec-fixtures", "exec_fixtures", type=str, default=None)
@click.option("--worker-cmd", "worker_cmd", type=str, default=None)
@click.option("--parallelism", type=int, default=None)
@click.option("--timeout-ms", "timeout_ms", type=int, default=None)
@click.option("--out", type=str, default=None)
@click.option("--only", type=str, default=None, help="comma separated task ids")
@click.option("--resume", is_flag=True, default=None)
@click.option("--per-node-phase2", "per_node_phase2", is_flag=True, default=None)
@click.option("--repeats", type=int, default=None)
@click.option("--overwrite-fixtures", "overwrite_fixtures", is_flag=True, default=None)
@click.option("--model", type=str, default=None)
def cmd_run(config_file, **flags):
    """Generate and evaluate every (problem, strategy) pair."""
    try:
        config = _merge_config(config_file, **flags)
        code = execute_run(config)
    except ConfigError as exc:
        raise click.ClickException(str(exc)) from exc
    if code:
        sys.exit(code)


@main.command("report")
@click.option("--runs", required=True, type=str, help="comma separated run directories")
@click.option("--baseline", required=True, type=str)
@click.option("--csv", "csv_path", type=str, default=None, help="where to write the machine-readable table")
def cmd_report(runs, baseline, csv_path):
    """Comparison table with relative deltas against a baseline strategy."""
    try:
        baseline_id = StrategyId(baseline)
    except ValueError as exc:
        raise click.ClickException(str(exc)) from exc
    run_dirs = [Path(p) for p in runs.split(",") if p]
    try:
        rows = build_report_rows(run_dirs, baseline_id)
    except MissingSummary as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(render_report_table(rows))
    csv_text = render_report_csv(rows)
    target = Path(csv_path) if csv_path else run_dirs[0] / "report.csv"
    target.write_text(csv_text, encoding="utf-8")
    click.echo(f"csv written to {target}", err=True)


@main.command("graph")
@click.option("--config", "config_file", type=click.Path(exists=True, path_type=Path), default=None)
@click.option("--dataset", type=str, default=None)
@click.option("--data", type=str, default=None)
@click.option("--task", required=True, type=str)
@click.option("--mode", type=click.Choice(["live", "replay", "record"]), default=None)
@click.option("--fixtures", type=str, default=None)
@click.option("--out", "out_path", type=str, default=None, help="write the parsed graph as JSON")
@click.option("--model", type=str, default=None)
def cmd_graph(config_file, task, out_path, **flags):
    """Run only the graph phase for one problem and print the result."""
    flags = {**flags, "strategy": "mot", "out": "unused"}
    try:
        config = _merge_config(config_file, **flags)
        problems = load_dataset(config.dataset, config.data_path)
    except ConfigError as exc:
        raise click.ClickException(str(exc)) from exc
    matching = [p for p in problems if p.task_id == task]
    if not matching:
        raise click.ClickException(f"task {task!r} not found in dataset")
    problem = matching[0]
    client = build_client(config)

    record = GenerationRecord(task_id=problem.task_id, strategy=StrategyId.MOT)
    try:
        outcome = run_graph_phase(problem, client, record)
    except ProviderError as exc:
        raise click.ClickException(f"provider: {exc}") from exc
    if outcome is None:
        click.echo("graph phase failed; last response could not be validated", err=True)
        for i, call in enumerate(record.calls, 1):
            click.echo(f"--- attempt {i} response ---\n{call.response}", err=True)
        sys.exit(1)
    graph, elements = outcome
    click.echo(serialize_for_prompt(graph, elements))
    click.echo(f"validation: {validate_graph(graph).describe()}")
    click.echo(f"stats (high, intermediate, detailed, edges): {graph_stats(graph)}")
    if out_path:
        Path(out_path).write_text(
            json.dumps(graph.to_schema_dict(elements), indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
        )
        click.echo(f"graph written to {out_path}", err=True)


if __name__ == "__main__":
    main()
