"""Shared test doubles and fixture builders."""

from __future__ import annotations

import json
from typing import Sequence

from motbench.benchmark import DatasetId, Problem, TestSuite
from motbench.executor import CaseResult, CaseStatus, ExecReport
from motbench.llm_client import ChatResponse, Message, Usage
from motbench.mlr_graph import Level, MLRGraph, MLRNode, ReasoningBlock, TaskElements


class ScriptedClient:
    """Serves queued responses in order; records every request it saw."""

    def __init__(self, responses: Sequence[str | ChatResponse], usage: Usage = Usage(10, 5)):
        self._queue = [
            r if isinstance(r, ChatResponse) else ChatResponse(content=r, usage=usage) for r in responses
        ]
        self.requests: list[tuple[Message, ...]] = []

    def chat(self, messages, max_output_tokens=None) -> ChatResponse:
        self.requests.append(tuple(messages))
        if not self._queue:
            raise AssertionError("scripted client ran out of responses")
        return self._queue.pop(0)

    def complete(self, request) -> ChatResponse:
        return self.chat(request.messages, request.max_output_tokens)


class ScriptedBackend:
    """Serves queued ExecReports in request order, echoing the request id."""

    concurrency_safe = True

    def __init__(self, reports: Sequence[ExecReport]):
        self._queue = list(reports)
        self.requests = []

    def run(self, request) -> ExecReport:
        self.requests.append(request)
        report = self._queue.pop(0)
        return ExecReport(id=request.id, results=report.results, duration_ms=report.duration_ms)


def report_of(statuses: Sequence[str], rid: str = "r") -> ExecReport:
    return ExecReport(
        id=rid,
        results=tuple(
            CaseResult(CaseStatus(s), "" if s == "pass" else f"case {s}") for s in statuses
        ),
        duration_ms=10,
    )


def make_problem(
    task_id: str = "t1",
    description: str = "Write a function add_two(a, b) returning a + b.",
    entry_point: str | None = "add_two",
    cases: Sequence[str] = ("assert add_two(1, 2) == 3",),
    setup: str = "",
    dataset: DatasetId = DatasetId.HUMANEVAL,
) -> Problem:
    return Problem(
        task_id=task_id,
        description=description,
        entry_point=entry_point,
        suite=TestSuite(setup=setup, cases=tuple(cases)),
        dataset=dataset,
    )


def node(
    node_id: str,
    level: Level,
    title: str = "do the thing",
    children: Sequence[str] = (),
    reasoning: ReasoningBlock | None = None,
) -> MLRNode:
    return MLRNode(id=node_id, level=level, title=title, reasoning=reasoning, children=tuple(children))


def minimal_graph() -> MLRGraph:
    return MLRGraph.from_nodes(
        [
            node("H1", Level.HIGH, "validate the input", children=["M1"]),
            node("M1", Level.INTERMEDIATE, "check the argument types", children=["D1"]),
            node("D1", Level.DETAILED, "reject non-integer input"),
        ]
    )


ELEMENTS = TaskElements(goal="compute a value", io_spec="ints in, int out", constraints="none")


# Transcription of the published example reasoning graph for the
# "largest sum among sublists divided by K" problem: 3 high-level,
# 5 intermediate-level, 5 detailed-level nodes.
LARGEST_SUM_NODES = [
    node("H1", Level.HIGH, "Validate the input values", children=["M1", "M2"]),
    node(
        "H2",
        Level.HIGH,
        "Compute the sum of each sublist",
        children=["M3", "M4"],
        reasoning=ReasoningBlock(
            purpose="obtain the total of every sublist so they can be compared",
            rationale="the built-in sum() keeps the computation short and efficient",
            strategy="walk the list of sublists and apply sum() to each one",
        ),
    ),
    node("H3", Level.HIGH, "Divide the largest sum by K and return it", children=["M5"]),
    node("M1", Level.INTERMEDIATE, "Check that K is a positive number", children=["D1"]),
    node("M2", Level.INTERMEDIATE, "Check that the list of sublists is not empty", children=["D2"]),
    node("M3", Level.INTERMEDIATE, "Iterate through each sublist", children=["D3", "D4"]),
    node("M4", Level.INTERMEDIATE, "Track the largest sublist sum seen so far", children=["D5"]),
    node("M5", Level.INTERMEDIATE, "Perform the final division and return the result"),
    node("D1", Level.DETAILED, "Raise an error when K is zero or negative"),
    node("D2", Level.DETAILED, "Raise an error when the input list is empty"),
    node("D3", Level.DETAILED, "Use a for loop to iterate over sublist"),
    node("D4", Level.DETAILED, "Call sum() on the current sublist"),
    node("D5", Level.DETAILED, "Compare each sublist sum with the current maximum"),
]


def largest_sum_graph() -> MLRGraph:
    return MLRGraph.from_nodes(list(LARGEST_SUM_NODES))


LARGEST_SUM_ELEMENTS = TaskElements(
    goal="find the largest sum among the sublists and divide it by K",
    io_spec="a list of integer sublists and an integer K in; a number out",
    constraints="K must not be zero",
)


def graph_response_json(graph: MLRGraph, elements: TaskElements) -> str:
    """A model reply embedding the graph as the structured JSON block."""
    return (
        "Here is the design.\n\n```json\n"
        + json.dumps(graph.to_schema_dict(elements), ensure_ascii=False)
        + "\n```\n"
    )
