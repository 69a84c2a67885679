"""Benchmark dataset ingestion.

Loads HumanEval-family and MBPP-family line-delimited record files into a
uniform Problem model. Each problem carries a TestSuite whose cases are
independently runnable given the candidate, which is what per-case pass
ratios need.

Input schemas (one JSON object per line):
  HumanEval family: task_id, prompt, entry_point, test, canonical_solution
  MBPP family:      task_id, text, code, test_list, test_setup_code
"""

from __future__ import annotations

import ast
import enum
import json
import re
from dataclasses import dataclass, field
from pathlib import Path


class DatasetId(str, enum.Enum):
    HUMANEVAL = "humaneval"
    HUMANEVAL_PLUS = "humaneval_plus"
    HUMANEVAL_ET = "humaneval_et"
    MBPP = "mbpp"
    MBPP_PLUS = "mbpp_plus"
    MBPP_ET = "mbpp_et"

    @property
    def family(self) -> str:
        return "humaneval" if self.value.startswith("humaneval") else "mbpp"

    @property
    def apr_supported(self) -> bool:
        # MBPP+ ships without a complete per-problem case set, so average
        # pass ratios are not meaningful there.
        return self is not DatasetId.MBPP_PLUS


class SchemaError(Exception):
    def __init__(self, message: str, *, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class SplitError(Exception):
    """Test payload could not be parsed into cases at all."""


class MissingEntryPoint(Exception):
    def __init__(self, entry_point: str):
        super().__init__(f"candidate does not define entry point {entry_point!r}")
        self.entry_point = entry_point


@dataclass(frozen=True)
class TestSuite:
    """Per-problem tests: shared setup plus independent case programs.

    monolithic is set when splitting had to collapse the whole payload into
    a single case (control flow around the assertions, or an unparseable
    payload).
    """

    setup: str
    cases: tuple[str, ...]
    monolithic: bool = False

    def __post_init__(self):
        if not self.cases:
            raise ValueError("a test suite needs at least one case")


@dataclass(frozen=True)
class Problem:
    task_id: str
    description: str
    entry_point: str | None
    suite: TestSuite
    dataset: DatasetId
    canonical_solution: str | None = None


def load_dataset(dataset: DatasetId, path: str | Path) -> list[Problem]:
    """Load one Problem per record, preserving file order."""
    problems: list[Problem] = []
    seen_ids: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"invalid JSON: {exc.msg}", line=line_no) from exc
            if not isinstance(record, dict):
                raise SchemaError("record is not an object", line=line_no)
            if dataset.family == "humaneval":
                problem = _load_humaneval_record(dataset, record, line_no)
            else:
                problem = _load_mbpp_record(dataset, record, line_no)
            if problem.task_id in seen_ids:
                raise SchemaError(f"duplicate task_id {problem.task_id!r}", line=line_no)
            seen_ids.add(problem.task_id)
            problems.append(problem)
    return problems


def _require(record: dict, name: str, line_no: int) -> object:
    if name not in record:
        raise SchemaError(f"missing field {name!r}", line=line_no)
    return record[name]


def _load_humaneval_record(dataset: DatasetId, record: dict, line_no: int) -> Problem:
    task_id = str(_require(record, "task_id", line_no))
    prompt = str(_require(record, "prompt", line_no))
    entry_point = str(_require(record, "entry_point", line_no))
    test = str(_require(record, "test", line_no))
    canonical = record.get("canonical_solution")
    suite = split_cases(dataset, test, entry_point=entry_point)
    return Problem(
        task_id=task_id,
        description=prompt,
        entry_point=entry_point,
        suite=suite,
        dataset=dataset,
        canonical_solution=prompt + canonical if isinstance(canonical, str) else None,
    )


_DEF_RE = re.compile(r"(?:^|\n)\s*def\s+([A-Za-z_]\w*)\s*\(")


def entry_point_from_code(code: str) -> str | None:
    """Name of the first function defined at the top level of reference code."""
    try:
        tree = ast.parse(code)
    except SyntaxError:
        m = _DEF_RE.search(code)
        return m.group(1) if m else None
    for node in tree.body:
        if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)):
            return node.name
    m = _DEF_RE.search(code)
    return m.group(1) if m else None


def _load_mbpp_record(dataset: DatasetId, record: dict, line_no: int) -> Problem:
    task_id = str(_require(record, "task_id", line_no))
    text = str(_require(record, "text", line_no))
    code = str(_require(record, "code", line_no))
    test_list = _require(record, "test_list", line_no)
    if not isinstance(test_list, list) or not test_list:
        raise SchemaError("'test_list' must be a non-empty list", line=line_no)
    setup = record.get("test_setup_code") or ""
    suite = split_cases(dataset, {"test_list": test_list, "test_setup_code": setup})
    return Problem(
        task_id=task_id,
        description=text,
        entry_point=entry_point_from_code(code),
        suite=suite,
        dataset=dataset,
        canonical_solution=code,
    )


_CONTROL_FLOW = (ast.For, ast.AsyncFor, ast.While, ast.If, ast.With, ast.AsyncWith, ast.Try, ast.Match)


def split_cases(dataset: DatasetId, raw_tests: object, *, entry_point: str | None = None) -> TestSuite:
    """Turn a dataset's native test payload into per-case programs.

    MBPP family: every element of test_list is already one case.

    HumanEval family: the check-function body is split at its top-level
    assert statements. Non-assert statements accumulate as a prelude that
    is replayed into every later case, so each case stays self-contained
    and order-independent. A statement with control flow around assertions
    (loop, branch, try, with) cannot be split and becomes one case of its
    own. If the payload cannot be parsed at all the suite degrades to a
    single monolithic case and is flagged.
    """
    if dataset.family == "mbpp":
        assert isinstance(raw_tests, dict)
        cases = tuple(str(c) for c in raw_tests["test_list"])
        return TestSuite(setup=str(raw_tests.get("test_setup_code") or ""), cases=cases)

    source = str(raw_tests)
    try:
        tree = ast.parse(source)
    except SyntaxError:
        case = source
        if entry_point and "def check" in source:
            case = source + f"\n\ncheck({entry_point})"
        return TestSuite(setup="", cases=(case,), monolithic=True)

    check_fn: ast.FunctionDef | None = None
    module_stmts: list[ast.stmt] = []
    for node in tree.body:
        if check_fn is None and isinstance(node, ast.FunctionDef) and node.name == "check":
            check_fn = node
        else:
            module_stmts.append(node)
    if check_fn is None:
        for node in list(module_stmts):
            if isinstance(node, ast.FunctionDef):
                check_fn = node
                module_stmts.remove(node)
                break

    setup_parts = [ast.unparse(s) for s in module_stmts]
    if check_fn is not None:
        body = check_fn.body
        if entry_point and check_fn.args.args:
            setup_parts.append(f"{check_fn.args.args[0].arg} = {entry_point}")
    else:
        body = tree.body
        setup_parts = []
        if entry_point and re.search(r"\bcandidate\b", source):
            setup_parts.append(f"candidate = {entry_point}")

    prelude: list[str] = []
    cases: list[str] = []
    collapsed = False
    for stmt in body:
        if isinstance(stmt, ast.Assert):
            cases.append("\n".join(prelude + [ast.unparse(stmt)]))
        elif isinstance(stmt, _CONTROL_FLOW) and any(isinstance(n, ast.Assert) for n in ast.walk(stmt)):
            cases.append("\n".join(prelude + [ast.unparse(stmt)]))
            collapsed = True
        else:
            prelude.append(ast.unparse(stmt))

    if not cases:
        text = "\n".join(prelude) if prelude else "pass"
        return TestSuite(setup="\n".join(setup_parts), cases=(text,), monolithic=True)

    monolithic = collapsed and len(cases) == 1
    return TestSuite(setup="\n".join(setup_parts), cases=tuple(cases), monolithic=monolithic)


def _top_level_bindings(source: str) -> set[str] | None:
    """Names bound at module level of the candidate, or None if unparseable."""
    try:
        tree = ast.parse(source)
    except SyntaxError:
        return None
    names: set[str] = set()
    for node in tree.body:
        if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef)):
            names.add(node.name)
        elif isinstance(node, ast.Assign):
            for target in node.targets:
                for name_node in ast.walk(target):
                    if isinstance(name_node, ast.Name):
                        names.add(name_node.id)
        elif isinstance(node, ast.AnnAssign) and isinstance(node.target, ast.Name):
            names.add(node.target.id)
        elif isinstance(node, (ast.Import, ast.ImportFrom)):
            for alias in node.names:
                names.add(alias.asname or alias.name.split(".")[0])
    return names


def assemble_case_program(problem: Problem, candidate: str, case_index: int) -> str:
    """Candidate, then suite setup, then one case, as a runnable program.

    Raises MissingEntryPoint when the candidate parses but does not bind
    the required entry point; callers turn that into a per-case error
    verdict rather than a crash.
    """
    case = problem.suite.cases[case_index]
    parts = [candidate]
    if problem.entry_point:
        bound = _top_level_bindings(candidate)
        if bound is not None and problem.entry_point not in bound:
            raise MissingEntryPoint(problem.entry_point)
        parts.append(
            f'if "{problem.entry_point}" not in dir():\n'
            f'    raise NameError("candidate does not define entry point \'{problem.entry_point}\'")'
        )
    if problem.suite.setup:
        parts.append(problem.suite.setup)
    parts.append(case)
    return "\n\n".join(parts) + "\n"
