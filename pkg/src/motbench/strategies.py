"""Prompt construction, strategy dispatch, and candidate-code extraction.

Nine strategies share one entry point, generate():

  mot                    two-phase: reasoning-graph call, then graph-guided code call
  zero_shot              one call, problem description only
  few_shot               one call with two fixed exemplar (problem, solution) pairs
  cot                    one call asking for step-by-step reasoning then code
  self_planning          plan call, then code call conditioned on the plan
  scot                   structured-reasoning call (sequence/branch/loop), then code call
  codecot                code + self-written tests, executed, repaired on failure
  mot_no_graph           modular decomposition reasoning without the level hierarchy
  mot_no_modularization  graph phase as in mot, but monolithic single-function code

Strategies are stateless; every per-problem run produces a GenerationRecord
tracing each provider call with its usage. With a replay client the whole
record (minus wall time) is deterministic.
"""

from __future__ import annotations

import enum
import json
import re
import time
from dataclasses import dataclass, field
from importlib import resources

from .benchmark import Problem
from .executor import Backend, ExecRequest, evaluate_candidate
from .llm_client import ChatResponse, Client, Message, Usage
from .mlr_graph import (
    DEFAULT_MAX_NODES,
    MLRGraph,
    ParseError,
    TaskElements,
    parse_graph,
    serialize_for_prompt,
    validate_graph,
)

GRAPH_RETRY_BUDGET = 2
CODECOT_REPAIR_BUDGET = 3

SYSTEM_TEXT = "You are an expert Python programmer. Follow the requested output format exactly."


class StrategyId(str, enum.Enum):
    MOT = "mot"
    ZERO_SHOT = "zero_shot"
    FEW_SHOT = "few_shot"
    COT = "cot"
    SELF_PLANNING = "self_planning"
    SCOT = "scot"
    CODECOT = "codecot"
    MOT_NO_GRAPH = "mot_no_graph"
    MOT_NO_MODULARIZATION = "mot_no_modularization"


@dataclass(frozen=True)
class Prompt:
    messages: tuple[Message, ...]

    def __post_init__(self):
        if not self.messages:
            raise ValueError("prompt must have at least one message")
        if self.messages[0].role not in ("system", "user"):
            raise ValueError("first message must be system or user")


@dataclass(frozen=True)
class CallRecord:
    prompt: Prompt
    response: str
    usage: Usage
    latency_s: float = 0.0


@dataclass
class GenerationRecord:
    task_id: str
    strategy: StrategyId
    calls: list[CallRecord] = field(default_factory=list)
    parsed_graph: MLRGraph | None = None
    task_elements: TaskElements | None = None
    extracted_code: str = ""
    fallback_used: bool = False
    wall_time_s: float = 0.0

    def usages(self) -> list[Usage]:
        return [c.usage for c in self.calls]

    def total_usage(self) -> Usage:
        total = Usage()
        for call in self.calls:
            total = total + call.usage
        return total


class EmptyCandidate(Exception):
    """The selected response text was all whitespace."""


class GraphUnrecoverable(Exception):
    """Graph phase failed and the degraded fallback produced no code either."""


class ExecutorRequired(Exception):
    """codecot needs an execution backend for its self-tests."""


# ---------------------------------------------------------------------------
# Templates


def _load_template(name: str) -> str:
    return resources.files("motbench").joinpath("templates", f"{name}.txt").read_text(encoding="utf-8")


_TEMPLATE_CACHE: dict[str, str] = {}


def render_template(name: str, **values: str) -> str:
    if name not in _TEMPLATE_CACHE:
        _TEMPLATE_CACHE[name] = _load_template(name)
    text = _TEMPLATE_CACHE[name]

    def substitute(match: re.Match) -> str:
        key = match.group(1)
        if key not in values:
            raise KeyError(f"template {name!r} placeholder {key!r} not provided")
        return values[key]

    return re.sub(r"\{\{(\w+)\}\}", substitute, text)


def load_exemplars() -> list[dict]:
    raw = resources.files("motbench").joinpath("assets", "few_shot_exemplars.json").read_text(encoding="utf-8")
    return json.loads(raw)


def _entry_clause(problem: Problem) -> str:
    if problem.entry_point:
        return f"The solution must define a function named `{problem.entry_point}`. "
    return ""


def _entry_clause_lower(problem: Problem) -> str:
    clause = _entry_clause(problem)
    return clause[:1].lower() + clause[1:] if clause else ""


def _user_prompt(text: str) -> Prompt:
    return Prompt(messages=(Message("system", SYSTEM_TEXT), Message("user", text)))


# ---------------------------------------------------------------------------
# Prompt builders


def build_graph_prompt(problem: Problem) -> Prompt:
    """Phase-1 prompt: analyse the task and emit the structured reasoning graph."""
    if not problem.description.strip():
        raise ValueError("problem description must be non-empty")
    text = render_template("graph_phase", description=problem.description)
    return _user_prompt(text)


def build_code_prompt(
    problem: Problem,
    graph: MLRGraph,
    elements: TaskElements,
    *,
    monolithic: bool = False,
) -> Prompt:
    """Phase-2 prompt embedding the serialized graph. Requires a valid graph."""
    serialized = serialize_for_prompt(graph, elements)
    template = "code_phase_monolithic" if monolithic else "code_phase"
    text = render_template(
        template,
        description=problem.description,
        graph=serialized,
        entry_point_clause=_entry_clause(problem),
    )
    return _user_prompt(text)


def _build_node_code_prompt(problem: Problem, graph: MLRGraph, elements: TaskElements, node_id: str, code_so_far: str) -> Prompt:
    node = graph.nodes[node_id]
    text = render_template(
        "code_phase_node",
        description=problem.description,
        graph=serialize_for_prompt(graph, elements),
        code_so_far=code_so_far or "# (nothing yet)",
        node_id=node.id,
        node_title=node.title,
        entry_point_clause=_entry_clause(problem),
    )
    return _user_prompt(text)


def _format_exemplars(exemplars: list[dict]) -> str:
    blocks = []
    for ex in exemplars:
        blocks.append(f"Programming problem:\n{ex['description']}\n\nSolution:\n```python\n{ex['solution']}```")
    return "\n\n".join(blocks)


def _single_call_prompt(strategy: StrategyId, problem: Problem) -> Prompt:
    if strategy == StrategyId.ZERO_SHOT:
        text = render_template(
            "zero_shot", description=problem.description, entry_point_clause=_entry_clause(problem)
        )
    elif strategy == StrategyId.FEW_SHOT:
        text = render_template(
            "few_shot",
            description=problem.description,
            entry_point_clause=_entry_clause(problem),
            exemplars=_format_exemplars(load_exemplars()[:2]),
        )
    elif strategy == StrategyId.COT:
        text = render_template(
            "cot", description=problem.description, entry_point_clause_lower=_entry_clause_lower(problem)
        )
    elif strategy == StrategyId.MOT_NO_GRAPH:
        text = render_template(
            "mot_no_graph",
            description=problem.description,
            entry_point_clause_lower=_entry_clause_lower(problem),
        )
    else:
        raise ValueError(f"{strategy} is not a single-call strategy")
    return _user_prompt(text)


# ---------------------------------------------------------------------------
# Code extraction

_FENCED_BLOCK_RE = re.compile(r"```[^\n`]*\n(.*?)```", re.DOTALL)


def _defines(block: str, entry_point: str) -> bool:
    return re.search(rf"(?:^|\n)\s*def\s+{re.escape(entry_point)}\s*\(", block) is not None


def extract_code(response: str, entry_point: str | None = None) -> str:
    """Pick the candidate source out of a model response.

    Selection order: last fenced block defining the entry point, then the
    last fenced block, then the whole response with any stray fence-marker
    lines dropped. Block contents are preserved byte for byte.
    """
    blocks = [m.group(1) for m in _FENCED_BLOCK_RE.finditer(response)]
    selected: str | None = None
    if entry_point:
        defining = [b for b in blocks if _defines(b, entry_point)]
        if defining:
            selected = defining[-1]
    if selected is None and blocks:
        selected = blocks[-1]
    if selected is None:
        selected = "\n".join(line for line in response.splitlines() if not line.lstrip().startswith("```"))
    if not selected.strip():
        raise EmptyCandidate("selected candidate text is empty")
    return selected


def _extract_self_tests(response: str, candidate: str) -> str | None:
    """The last fenced block of plain asserts that is not the candidate itself."""
    blocks = [m.group(1) for m in _FENCED_BLOCK_RE.finditer(response)]
    for block in reversed(blocks):
        if block == candidate:
            continue
        if re.search(r"(?:^|\n)\s*assert\s", block):
            return block
    return None


# ---------------------------------------------------------------------------
# Generation


def generate(
    strategy: StrategyId,
    problem: Problem,
    client: Client,
    executor: Backend | None = None,
    *,
    per_node_phase2: bool = False,
    graph_retries: int = GRAPH_RETRY_BUDGET,
    codecot_repairs: int = CODECOT_REPAIR_BUDGET,
    max_nodes: int = DEFAULT_MAX_NODES,
    exec_timeout_ms: int = 10_000,
) -> GenerationRecord:
    """Run one strategy on one problem and return its full trace."""
    started = time.monotonic()
    record = GenerationRecord(task_id=problem.task_id, strategy=strategy)

    if strategy in (StrategyId.ZERO_SHOT, StrategyId.FEW_SHOT, StrategyId.COT, StrategyId.MOT_NO_GRAPH):
        response = _call(client, _single_call_prompt(strategy, problem), record)
        record.extracted_code = extract_code(response.content, problem.entry_point)
    elif strategy == StrategyId.SELF_PLANNING:
        plan = _call(
            client,
            _user_prompt(render_template("self_planning_plan", description=problem.description)),
            record,
        )
        code_prompt = _user_prompt(
            render_template(
                "self_planning_code",
                description=problem.description,
                plan=plan.content,
                entry_point_clause=_entry_clause(problem),
            )
        )
        record.extracted_code = extract_code(_call(client, code_prompt, record).content, problem.entry_point)
    elif strategy == StrategyId.SCOT:
        structure = _call(
            client,
            _user_prompt(render_template("scot_structure", description=problem.description)),
            record,
        )
        code_prompt = _user_prompt(
            render_template(
                "scot_code",
                description=problem.description,
                structure=structure.content,
                entry_point_clause=_entry_clause(problem),
            )
        )
        record.extracted_code = extract_code(_call(client, code_prompt, record).content, problem.entry_point)
    elif strategy == StrategyId.CODECOT:
        if executor is None:
            raise ExecutorRequired("codecot requires an execution backend for its self-tests")
        _generate_codecot(problem, client, executor, record, codecot_repairs, exec_timeout_ms)
    elif strategy in (StrategyId.MOT, StrategyId.MOT_NO_MODULARIZATION):
        _generate_mot(
            problem,
            client,
            record,
            monolithic=strategy == StrategyId.MOT_NO_MODULARIZATION,
            per_node_phase2=per_node_phase2,
            graph_retries=graph_retries,
            max_nodes=max_nodes,
        )
    else:  # pragma: no cover - enum is closed
        raise ValueError(f"unknown strategy {strategy}")

    record.wall_time_s = time.monotonic() - started
    return record


def _call(client: Client, prompt: Prompt, record: GenerationRecord) -> ChatResponse:
    response = client.chat(prompt.messages)
    record.calls.append(
        CallRecord(prompt=prompt, response=response.content, usage=response.usage, latency_s=response.latency_s)
    )
    return response


def run_graph_phase(
    problem: Problem,
    client: Client,
    record: GenerationRecord,
    *,
    graph_retries: int = GRAPH_RETRY_BUDGET,
    max_nodes: int = DEFAULT_MAX_NODES,
) -> tuple[MLRGraph, TaskElements] | None:
    """Phase 1 with validation feedback: up to graph_retries re-prompts.

    Returns None when every attempt produced an unusable graph; the caller
    decides how to degrade.
    """
    base = build_graph_prompt(problem)
    messages = list(base.messages)
    for _ in range(graph_retries + 1):
        response = _call(client, Prompt(tuple(messages)), record)
        issues: str
        try:
            graph, elements = parse_graph(response.content)
        except ParseError as exc:
            issues = f"the reply could not be parsed ({exc.kind}: {exc})"
        else:
            report = validate_graph(graph, max_nodes=max_nodes)
            if report.ok:
                return graph, elements
            issues = report.describe()
        messages = messages + [
            Message("assistant", response.content),
            Message("user", render_template("graph_retry", issues=issues)),
        ]
    return None


def _generate_mot(
    problem: Problem,
    client: Client,
    record: GenerationRecord,
    *,
    monolithic: bool,
    per_node_phase2: bool,
    graph_retries: int,
    max_nodes: int,
) -> None:
    outcome = run_graph_phase(problem, client, record, graph_retries=graph_retries, max_nodes=max_nodes)
    if outcome is None:
        # Degrade to the graph-free modular prompt; the run still must
        # produce code.
        record.fallback_used = True
        response = _call(client, _single_call_prompt(StrategyId.MOT_NO_GRAPH, problem), record)
        try:
            record.extracted_code = extract_code(response.content, problem.entry_point)
        except EmptyCandidate as exc:
            raise GraphUnrecoverable(
                f"graph phase failed after {graph_retries + 1} attempts and fallback produced no code"
            ) from exc
        return

    graph, elements = outcome
    record.parsed_graph = graph
    record.task_elements = elements

    if per_node_phase2 and not monolithic:
        code = ""
        for level_nodes in (graph.nodes_at(lvl) for lvl in sorted({n.level for n in graph.nodes.values()})):
            for node in level_nodes:
                prompt = _build_node_code_prompt(problem, graph, elements, node.id, code)
                response = _call(client, prompt, record)
                code = extract_code(response.content, problem.entry_point)
        record.extracted_code = code
        if not code.strip():
            raise EmptyCandidate("per-node generation produced no code")
        return

    prompt = build_code_prompt(problem, graph, elements, monolithic=monolithic)
    response = _call(client, prompt, record)
    record.extracted_code = extract_code(response.content, problem.entry_point)


def _generate_codecot(
    problem: Problem,
    client: Client,
    executor: Backend,
    record: GenerationRecord,
    repair_budget: int,
    exec_timeout_ms: int,
) -> None:
    initial_prompt = _user_prompt(
        render_template(
            "codecot_initial", description=problem.description, entry_point_clause=_entry_clause(problem)
        )
    )
    response = _call(client, initial_prompt, record)
    code = extract_code(response.content, problem.entry_point)
    tests = _extract_self_tests(response.content, code)

    repairs = 0
    while tests is not None:
        request = ExecRequest(
            id=f"{problem.task_id}:codecot:selftest{repairs}",
            source=code,
            setup="",
            cases=(tests,),
            timeout_ms=exec_timeout_ms,
        )
        report = evaluate_candidate(executor, request)
        if report.solved or repairs >= repair_budget:
            break
        detail = "; ".join(r.detail for r in report.results if r.detail) or "self-tests failed"
        repair_prompt = _user_prompt(
            render_template("codecot_repair", error=detail, entry_point_clause=_entry_clause(problem))
        )
        repair_response = _call(client, repair_prompt, record)
        code = extract_code(repair_response.content, problem.entry_point)
        repairs += 1

    record.extracted_code = code


def max_provider_calls(strategy: StrategyId, *, graph_retries: int = GRAPH_RETRY_BUDGET, codecot_repairs: int = CODECOT_REPAIR_BUDGET) -> int:
    """Documented per-strategy call ceiling (default phase-2 mode)."""
    if strategy in (StrategyId.MOT, StrategyId.MOT_NO_MODULARIZATION):
        return graph_retries + 1 + 1
    if strategy == StrategyId.CODECOT:
        return 1 + codecot_repairs
    if strategy in (StrategyId.SELF_PLANNING, StrategyId.SCOT):
        return 2
    return 1
