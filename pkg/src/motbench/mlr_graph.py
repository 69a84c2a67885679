"""Multi-Level Reasoning graphs.

An MLR graph is a hierarchical decomposition of a programming task into
design nodes on three levels (high, intermediate, detailed). Edges point
from a node to the nodes that refine it on the next level down, and each
node may carry a reasoning triple (task purpose, decision rationale,
execution strategy).

This module owns the typed representation plus the three operations the
pipeline needs: parsing a graph out of free-form model output, validating
its structural invariants, and rendering it back into deterministic prompt
text. Parsing and validation are deliberately separate steps so that a
malformed or rule-breaking graph can be reported back to the model for a
retry instead of aborting the run.
"""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass, field

DEFAULT_MAX_NODES = 64

REASONING_LABELS = ("Task Purpose", "Decision Rationale", "Execution Strategy")


class Level(enum.IntEnum):
    """Node level; ordered from coarse to fine."""

    HIGH = 0
    INTERMEDIATE = 1
    DETAILED = 2

    @property
    def wire_name(self) -> str:
        return self.name.lower()

    @property
    def heading(self) -> str:
        return f"{self.name.capitalize()}-Level Tasks"

    @property
    def id_prefix(self) -> str:
        return {"high": "H", "intermediate": "M", "detailed": "D"}[self.wire_name]

    @classmethod
    def from_wire(cls, text: str) -> "Level":
        key = text.strip().lower()
        for lvl in cls:
            if key == lvl.wire_name:
                return lvl
        raise ValueError(f"unknown level {text!r}")


def _clean(text: object) -> str:
    """Collapse all whitespace runs to single spaces and strip."""
    if text is None:
        return ""
    return " ".join(str(text).split())


@dataclass(frozen=True)
class ReasoningBlock:
    """Per-node embedded rationale; every field optional."""

    purpose: str | None = None
    rationale: str | None = None
    strategy: str | None = None

    def is_empty(self) -> bool:
        return self.purpose is None and self.rationale is None and self.strategy is None

    @classmethod
    def build(cls, purpose: object = None, rationale: object = None, strategy: object = None) -> "ReasoningBlock | None":
        vals = [_clean(v) or None for v in (purpose, rationale, strategy)]
        if all(v is None for v in vals):
            return None
        return cls(*vals)


@dataclass(frozen=True)
class MLRNode:
    id: str
    level: Level
    title: str
    reasoning: ReasoningBlock | None = None
    children: tuple[str, ...] = ()


@dataclass(frozen=True)
class TaskElements:
    """Goal / IO / constraints extracted from the task description."""

    goal: str
    io_spec: str = ""
    constraints: str = ""


@dataclass(frozen=True)
class MLRGraph:
    """Id-keyed node collection; roots are the high-level nodes in stored order.

    Treated as immutable after construction; safe to share across threads.
    Equality is structural (same nodes by id, same roots order).
    """

    nodes: dict[str, MLRNode]
    roots: tuple[str, ...]

    @classmethod
    def from_nodes(cls, nodes: list[MLRNode]) -> "MLRGraph":
        by_id = {n.id: n for n in nodes}
        roots = tuple(n.id for n in nodes if n.level == Level.HIGH)
        return cls(nodes=by_id, roots=roots)

    def nodes_at(self, level: Level) -> list[MLRNode]:
        return [n for n in self.nodes.values() if n.level == level]

    def edges(self) -> list[tuple[str, str]]:
        return [(n.id, c) for n in self.nodes.values() for c in n.children]

    def to_schema_dict(self, elements: TaskElements) -> dict:
        """Render as the structured-object wire schema accepted by parse_graph."""
        return {
            "task_analysis": {
                "goal": elements.goal,
                "io_spec": elements.io_spec,
                "constraints": elements.constraints,
            },
            "nodes": [
                {
                    "id": n.id,
                    "level": n.level.wire_name,
                    "title": n.title,
                    **(
                        {
                            "reasoning": {
                                "purpose": n.reasoning.purpose or "",
                                "rationale": n.reasoning.rationale or "",
                                "strategy": n.reasoning.strategy or "",
                            }
                        }
                        if n.reasoning is not None
                        else {}
                    ),
                    "children": list(n.children),
                }
                for n in self.nodes.values()
            ],
        }


class ParseError(Exception):
    """Raised when model output cannot be turned into a graph at all.

    Kinds: no_structured_block, malformed_object, duplicate_node_id,
    dangling_child.
    """

    def __init__(self, kind: str, message: str, *, position: int | None = None, node_id: str | None = None):
        super().__init__(message)
        self.kind = kind
        self.position = position
        self.node_id = node_id


class InvalidGraph(Exception):
    """Raised when an operation requires a validated graph and got a broken one."""


@dataclass(frozen=True)
class Violation:
    rule: str
    node_id: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple[Violation, ...] = ()

    def describe(self) -> str:
        if self.ok:
            return "ok"
        return "; ".join(f"{v.rule}[{v.node_id or '-'}]: {v.message}" for v in self.violations)


# ---------------------------------------------------------------------------
# Parsing


def parse_graph(raw: str) -> tuple[MLRGraph, TaskElements]:
    """Extract a graph and task elements from arbitrary model output.

    Primary path: a single embedded JSON object following the structured
    schema (``task_analysis`` + ``nodes``). Fallback path: the labelled
    heading layout produced by serialize_for_prompt. The result is not
    validated; run validate_graph separately.
    """
    obj, err = _find_structured_object(raw)
    if obj is not None:
        return _graph_from_schema(obj)
    if err is not None:
        raise err
    parsed = _parse_heading_layout(raw)
    if parsed is not None:
        return parsed
    raise ParseError("no_structured_block", "no structured graph object or recognizable heading layout found")


_FENCE_RE = re.compile(r"```[^\n`]*\n(.*?)```", re.DOTALL)

# Cap on how many brace positions we probe when scanning free text for an
# embedded JSON object; keeps worst-case fuzz inputs cheap.
_MAX_JSON_PROBES = 512


def _find_structured_object(raw: str) -> tuple[dict | None, ParseError | None]:
    decoder = json.JSONDecoder()
    fenced_error: ParseError | None = None
    for m in _FENCE_RE.finditer(raw):
        body = m.group(1).strip()
        if not body.startswith("{"):
            continue
        try:
            obj = json.loads(body)
        except json.JSONDecodeError as exc:
            fenced_error = ParseError(
                "malformed_object",
                f"fenced block is not valid JSON: {exc.msg}",
                position=m.start(1) + exc.pos,
            )
            continue
        if isinstance(obj, dict) and "nodes" in obj:
            return obj, None
    probes = 0
    idx = raw.find("{")
    while idx != -1 and probes < _MAX_JSON_PROBES:
        probes += 1
        try:
            obj, _ = decoder.raw_decode(raw, idx)
        except json.JSONDecodeError:
            obj = None
        if isinstance(obj, dict) and "nodes" in obj:
            return obj, None
        idx = raw.find("{", idx + 1)
    return None, fenced_error


def _as_id(value: object) -> str:
    if isinstance(value, (int, float)):
        value = str(value)
    return _clean(value)


def _graph_from_schema(obj: dict) -> tuple[MLRGraph, TaskElements]:
    analysis = obj.get("task_analysis") or {}
    if not isinstance(analysis, dict):
        analysis = {}
    elements = TaskElements(
        goal=_clean(analysis.get("goal")),
        io_spec=_clean(analysis.get("io_spec")),
        constraints=_clean(analysis.get("constraints")),
    )

    raw_nodes = obj.get("nodes")
    if not isinstance(raw_nodes, list):
        raise ParseError("malformed_object", "'nodes' must be a list")

    staged: list[tuple[str | None, Level, str, ReasoningBlock | None, tuple[str, ...]]] = []
    for i, entry in enumerate(raw_nodes):
        if not isinstance(entry, dict):
            raise ParseError("malformed_object", f"node #{i} is not an object", position=i)
        try:
            level = Level.from_wire(str(entry.get("level", "")))
        except ValueError as exc:
            raise ParseError("malformed_object", f"node #{i}: {exc}", position=i) from None
        node_id = _as_id(entry.get("id")) or None
        title = _clean(entry.get("title"))
        reasoning_raw = entry.get("reasoning")
        reasoning = None
        if isinstance(reasoning_raw, dict):
            reasoning = ReasoningBlock.build(
                reasoning_raw.get("purpose"),
                reasoning_raw.get("rationale"),
                reasoning_raw.get("strategy"),
            )
        children_raw = entry.get("children", [])
        if children_raw is None:
            children_raw = []
        if not isinstance(children_raw, list):
            raise ParseError("malformed_object", f"node #{i}: 'children' must be a list", position=i)
        children = tuple(_as_id(c) for c in children_raw if _as_id(c))
        staged.append((node_id, level, title, reasoning, children))

    return _finish_graph(staged), elements


def _finish_graph(
    staged: list[tuple[str | None, Level, str, ReasoningBlock | None, tuple[str, ...]]],
) -> MLRGraph:
    """Assign missing ids and assemble, rejecting duplicates and dangling children."""
    taken = {node_id for node_id, *_ in staged if node_id}
    counters = {lvl: 0 for lvl in Level}
    nodes: list[MLRNode] = []
    seen: set[str] = set()
    for node_id, level, title, reasoning, children in staged:
        if node_id is None:
            while True:
                counters[level] += 1
                candidate = f"{level.id_prefix}{counters[level]}"
                if candidate not in taken:
                    break
            node_id = candidate
            taken.add(node_id)
        if node_id in seen:
            raise ParseError("duplicate_node_id", f"node id {node_id!r} appears more than once", node_id=node_id)
        seen.add(node_id)
        nodes.append(MLRNode(id=node_id, level=level, title=title, reasoning=reasoning, children=children))

    ids = {n.id for n in nodes}
    for n in nodes:
        for child in n.children:
            if child not in ids:
                raise ParseError("dangling_child", f"node {n.id!r} lists unknown child {child!r}", node_id=child)
    return MLRGraph.from_nodes(nodes)


_SECTION_RE = re.compile(r"^\s*#{0,6}\s*(High|Intermediate|Detailed)[\s-]?Level\b", re.IGNORECASE)
_NODE_RE = re.compile(r"^\s*(?:[-*•]|\d+[.)])\s+(?:\[([^\]]+)\]\s*)?(.+?)\s*$")
_LABEL_RE = re.compile(
    r"^\s*(Task Purpose|Decision Rationale|Execution Strategy|Children|Depends on)\s*:\s*(.*?)\s*$",
    re.IGNORECASE,
)
_ELEMENT_RE = re.compile(r"^\s*(Goal|Input/Output|IO|Input-Output|Constraints?)\s*:\s*(.*?)\s*$", re.IGNORECASE)

_LABEL_FIELD = {
    "task purpose": "purpose",
    "decision rationale": "rationale",
    "execution strategy": "strategy",
}


class _PendingNode:
    __slots__ = ("id", "level", "title", "fields", "children")

    def __init__(self, node_id: str | None, level: Level, title: str):
        self.id = node_id
        self.level = level
        self.title = title
        self.fields: dict[str, str] = {}
        self.children: list[str] = []


def _parse_heading_layout(raw: str) -> tuple[MLRGraph, TaskElements] | None:
    level: Level | None = None
    current: _PendingNode | None = None
    active_field: str | None = None
    pending: list[_PendingNode] = []
    elements = {"goal": "", "io_spec": "", "constraints": ""}
    in_section = False

    for line in raw.splitlines():
        if not line.strip():
            active_field = None
            continue
        sec = _SECTION_RE.match(line)
        if sec:
            level = Level.from_wire(sec.group(1).lower())
            current = None
            active_field = None
            in_section = True
            continue
        label = _LABEL_RE.match(line)
        if label and current is not None:
            name = label.group(1).lower()
            value = label.group(2)
            if name in ("children", "depends on"):
                current.children.extend(c for c in re.split(r"[,\s]+", value) if c)
                active_field = None
            else:
                key = _LABEL_FIELD[name]
                current.fields[key] = _clean(value)
                active_field = key
            continue
        if not in_section:
            elem = _ELEMENT_RE.match(line)
            if elem:
                name = elem.group(1).lower()
                if name == "goal":
                    elements["goal"] = _clean(elem.group(2))
                elif name.startswith("constraint"):
                    elements["constraints"] = _clean(elem.group(2))
                else:
                    elements["io_spec"] = _clean(elem.group(2))
                continue
        if level is not None:
            node = _NODE_RE.match(line)
            if node:
                current = _PendingNode(_clean(node.group(1)) or None, level, _clean(node.group(2)))
                pending.append(current)
                active_field = None
                continue
        if current is not None and active_field is not None and line[:1].isspace():
            extra = _clean(line)
            if extra:
                current.fields[active_field] = f"{current.fields[active_field]} {extra}".strip()
            continue
        active_field = None

    if not pending:
        return None

    staged = [
        (
            n.id,
            n.level,
            n.title,
            ReasoningBlock.build(n.fields.get("purpose"), n.fields.get("rationale"), n.fields.get("strategy")),
            tuple(n.children),
        )
        for n in pending
    ]
    graph = _finish_graph(staged)
    return graph, TaskElements(goal=elements["goal"], io_spec=elements["io_spec"], constraints=elements["constraints"])


# ---------------------------------------------------------------------------
# Validation


def validate_graph(graph: MLRGraph, *, max_nodes: int = DEFAULT_MAX_NODES) -> ValidationReport:
    """Check every structural invariant; violations are data, not errors.

    Rules: NoNodes, TooManyNodes, EmptyTitle, DanglingChild, LevelSkip,
    Cycle, MissingHighNode, OrphanIntermediate, OrphanDetailed, RootMismatch.
    Violations are ordered by (node id, rule name) so reports are stable.
    """
    violations: list[Violation] = []

    if not graph.nodes:
        violations.append(Violation("NoNodes", "", "graph has no nodes"))
        return ValidationReport(ok=False, violations=tuple(violations))

    if len(graph.nodes) > max_nodes:
        violations.append(
            Violation("TooManyNodes", "", f"graph has {len(graph.nodes)} nodes; cap is {max_nodes}")
        )

    high_ids = [n.id for n in graph.nodes.values() if n.level == Level.HIGH]
    if not high_ids:
        violations.append(Violation("MissingHighNode", "", "graph has no high-level node"))
    if set(graph.roots) != set(high_ids):
        violations.append(
            Violation(
                "RootMismatch",
                "",
                f"roots {sorted(graph.roots)} do not match high-level nodes {sorted(high_ids)}",
            )
        )

    parents: dict[str, list[str]] = {nid: [] for nid in graph.nodes}
    for node in graph.nodes.values():
        if not node.title:
            violations.append(Violation("EmptyTitle", node.id, "node title is empty"))
        for child_id in node.children:
            child = graph.nodes.get(child_id)
            if child is None:
                violations.append(
                    Violation("DanglingChild", node.id, f"child {child_id!r} does not exist")
                )
                continue
            parents[child_id].append(node.id)
            if child.level != node.level + 1:
                violations.append(
                    Violation(
                        "LevelSkip",
                        node.id,
                        f"edge {node.id}->{child_id} goes {node.level.wire_name}->{child.level.wire_name}; "
                        "edges must descend exactly one level",
                    )
                )

    for node in graph.nodes.values():
        if node.level == Level.INTERMEDIATE:
            if not any(graph.nodes[p].level == Level.HIGH for p in parents[node.id]):
                violations.append(
                    Violation("OrphanIntermediate", node.id, "intermediate node has no high-level parent")
                )
        elif node.level == Level.DETAILED:
            if not any(graph.nodes[p].level == Level.INTERMEDIATE for p in parents[node.id]):
                violations.append(
                    Violation("OrphanDetailed", node.id, "detailed node has no intermediate-level parent")
                )

    for cycle in _cycles(graph):
        violations.append(
            Violation("Cycle", min(cycle), "cycle through " + ", ".join(sorted(cycle)))
        )

    violations.sort(key=lambda v: (v.node_id, v.rule))
    return ValidationReport(ok=not violations, violations=tuple(violations))


def _cycles(graph: MLRGraph) -> list[set[str]]:
    """Strongly connected components of size > 1, plus self-loops."""
    adjacency = {
        nid: [c for c in node.children if c in graph.nodes] for nid, node in graph.nodes.items()
    }
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    counter = [0]
    out: list[set[str]] = []

    def strongconnect(start: str) -> None:
        work = [(start, iter(adjacency[start]))]
        index[start] = low[start] = counter[0]
        counter[0] += 1
        stack.append(start)
        on_stack.add(start)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter[0]
                    counter[0] += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(adjacency[w])))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                comp: set[str] = set()
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.add(w)
                    if w == v:
                        break
                if len(comp) > 1 or v in adjacency[v]:
                    out.append(comp)

    for nid in sorted(graph.nodes):
        if nid not in index:
            strongconnect(nid)
    out.sort(key=min)
    return out


# ---------------------------------------------------------------------------
# Prompt serialization


def serialize_for_prompt(graph: MLRGraph, elements: TaskElements) -> str:
    """Render a validated graph as deterministic outline text.

    Task elements first, then the nodes grouped high -> intermediate ->
    detailed in stored order. Byte-identical output for equal inputs, and
    parse_graph's heading fallback reads it back into an equal graph.
    """
    report = validate_graph(graph)
    if not report.ok:
        raise InvalidGraph(f"cannot serialize invalid graph: {report.describe()}")

    lines = [
        f"Goal: {elements.goal}",
        f"Input/Output: {elements.io_spec}",
        f"Constraints: {elements.constraints}",
        "",
    ]
    for level in Level:
        lines.append(f"{level.heading}:")
        for node in graph.nodes_at(level):
            lines.append(f"- [{node.id}] {node.title}")
            if node.reasoning is not None:
                r = node.reasoning
                for label, value in zip(REASONING_LABELS, (r.purpose, r.rationale, r.strategy)):
                    if value:
                        lines.append(f"    {label}: {value}")
            if node.children:
                lines.append(f"    Children: {', '.join(node.children)}")
    return "\n".join(lines) + "\n"


def graph_stats(graph: MLRGraph) -> tuple[int, int, int, int]:
    """(high count, intermediate count, detailed count, edge count)."""
    counts = {lvl: 0 for lvl in Level}
    edges = 0
    for node in graph.nodes.values():
        counts[node.level] += 1
        edges += len(node.children)
    return counts[Level.HIGH], counts[Level.INTERMEDIATE], counts[Level.DETAILED], edges
