#!/usr/bin/env python3
"""Regenerate the committed fixture bundle under fixtures/.

Produces:
  fixtures/sample/problems.jsonl       ten small sample problems (HumanEval-style schema)
  fixtures/sample/mbpp_problems.jsonl  three MBPP-style records for loader demos
  fixtures/sample/exec_cases.json      wire-ready per-problem cases for the sandbox runner tests
  fixtures/llm/                        recorded chat fixtures for the replay bundle
  fixtures/exec_reports.json           canned execution reports keyed by "<strategy>:<task_id>"
  fixtures/run_config.json             the replay run configuration
  fixtures/manifest.json               expected metrics, computed here with plain arithmetic

The chat fixtures are recorded by running the real strategy flows against a
scripted responder, so the fixture keys always match what a replay run will
ask for. The expected metrics in the manifest are derived with Fraction
arithmetic directly from the verdict plan below, independently of the
package's metrics code.
"""

from __future__ import annotations

import json
import sys
from fractions import Fraction
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from motbench.benchmark import DatasetId, load_dataset  # noqa: E402
from motbench.llm_client import ChatRequest, ChatResponse, FixtureStore, Usage, record_fixture  # noqa: E402
from motbench.mlr_graph import Level, MLRGraph, MLRNode, ReasoningBlock, TaskElements  # noqa: E402
from motbench.strategies import StrategyId, generate  # noqa: E402

FIXTURES = REPO / "fixtures"
SAMPLE = FIXTURES / "sample"

MODEL = "fixture-model-v1"
GRAPH_USAGE = Usage(120, 80)
CODE_USAGE = Usage(100, 50)
PRICE_IN = 1e-6
PRICE_OUT = 2e-6

BUNDLE_STRATEGIES = [
    StrategyId.MOT,
    StrategyId.ZERO_SHOT,
    StrategyId.COT,
    StrategyId.MOT_NO_GRAPH,
    StrategyId.MOT_NO_MODULARIZATION,
]

# (task_id suffix, entry point, prompt, canonical body, mutated body, check)
SAMPLE_PROBLEMS = [
    (
        "sample/0",
        "add_two",
        'def add_two(a, b):\n    """Return the sum of a and b."""\n',
        "    return a + b\n",
        "    return a + b + 1\n",
        "def check(candidate):\n"
        "    assert candidate(1, 2) == 3\n"
        "    assert candidate(0, 0) == 0\n"
        "    assert candidate(-5, 5) == 0\n",
    ),
    (
        "sample/1",
        "is_even",
        'def is_even(n):\n    """Return True when n is an even integer."""\n',
        "    return n % 2 == 0\n",
        "    return n % 2 == 1\n",
        "def check(candidate):\n"
        "    assert candidate(4) is True\n"
        "    assert candidate(7) is False\n"
        "    assert candidate(0) is True\n",
    ),
    (
        "sample/2",
        "list_max",
        'def list_max(xs):\n    """Return the largest element of the non-empty list xs."""\n',
        "    best = xs[0]\n    for x in xs[1:]:\n        if x > best:\n            best = x\n    return best\n",
        "    best = xs[0]\n    for x in xs[1:]:\n        if x < best:\n            best = x\n    return best\n",
        "def check(candidate):\n"
        "    assert candidate([1, 3, 2]) == 3\n"
        "    assert candidate([-4, -2, -9]) == -2\n"
        "    assert candidate([5]) == 5\n",
    ),
    (
        "sample/3",
        "reverse_text",
        'def reverse_text(s):\n    """Return s with its characters in reverse order."""\n',
        "    return s[::-1]\n",
        "    return s\n",
        "def check(candidate):\n"
        "    assert candidate('abc') == 'cba'\n"
        "    assert candidate('') == ''\n"
        "    assert candidate('ab') == 'ba'\n",
    ),
    (
        "sample/4",
        "count_vowels",
        'def count_vowels(s):\n    """Return how many characters of s are lowercase vowels."""\n',
        "    return sum(1 for ch in s if ch in 'aeiou')\n",
        "    return sum(1 for ch in s if ch in 'aeio')\n",
        "def check(candidate):\n"
        "    assert candidate('abc') == 1\n"
        "    assert candidate('queue') == 4\n"
        "    assert candidate('xyz') == 0\n",
    ),
    (
        "sample/5",
        "clamp",
        'def clamp(x, lo, hi):\n    """Return x limited to the inclusive range [lo, hi]."""\n',
        "    return max(lo, min(hi, x))\n",
        "    return min(lo, max(hi, x))\n",
        "def check(candidate):\n"
        "    assert candidate(5, 0, 10) == 5\n"
        "    assert candidate(-3, 0, 10) == 0\n"
        "    assert candidate(42, 0, 10) == 10\n",
    ),
    (
        "sample/6",
        "factorial",
        'def factorial(n):\n    """Return n! for a non-negative integer n."""\n',
        "    result = 1\n    for i in range(2, n + 1):\n        result *= i\n    return result\n",
        "    result = 1\n    for i in range(2, n):\n        result *= i\n    return result\n",
        "def check(candidate):\n"
        "    assert candidate(0) == 1\n"
        "    assert candidate(1) == 1\n"
        "    assert candidate(5) == 120\n",
    ),
    (
        "sample/7",
        "unique_sorted",
        'def unique_sorted(xs):\n    """Return the distinct elements of xs in ascending order."""\n',
        "    return sorted(set(xs))\n",
        "    return sorted(xs)\n",
        "def check(candidate):\n"
        "    assert candidate([3, 1, 2, 1]) == [1, 2, 3]\n"
        "    assert candidate([]) == []\n"
        "    assert candidate([5, 5, 5]) == [5]\n",
    ),
    (
        "sample/8",
        "word_lengths",
        'def word_lengths(words):\n    """Return a list with the length of each word."""\n',
        "    return [len(w) for w in words]\n",
        "    return [len(w) + 1 for w in words]\n",
        "def check(candidate):\n"
        "    assert candidate(['a', 'bb']) == [1, 2]\n"
        "    assert candidate([]) == []\n"
        "    assert candidate(['hello']) == [5]\n",
    ),
    (
        "sample/9",
        "running_total",
        'def running_total(xs):\n    """Return the list of cumulative sums of xs."""\n',
        "    total = 0\n    out = []\n    for x in xs:\n        total += x\n        out.append(total)\n    return out\n",
        "    total = 0\n    out = []\n    for x in xs:\n        out.append(total)\n        total += x\n    return out\n",
        # the loop region collapses into one case; two flat asserts around it
        "def check(candidate):\n"
        "    assert candidate([]) == []\n"
        "    for xs, want in [([1, 2], [1, 3]), ([5], [5])]:\n"
        "        assert candidate(xs) == want\n"
        "    assert candidate([0, 0, 1]) == [0, 0, 1]\n",
    ),
]

BUNDLE_IDS = [p[0] for p in SAMPLE_PROBLEMS[:5]]

MBPP_PROBLEMS = [
    {
        "task_id": 901,
        "text": "Write a function to find the shared elements from the given two lists.",
        "code": "def similar_elements(a, b):\n    return sorted(set(a) & set(b))\n",
        "test_list": [
            "assert similar_elements([3, 4, 5, 6], [5, 7, 4, 10]) == [4, 5]",
            "assert similar_elements([1, 2, 3, 4], [5, 4, 3, 7]) == [3, 4]",
            "assert similar_elements([11, 12, 14, 13], [17, 15, 14, 13]) == [13, 14]",
        ],
        "test_setup_code": "",
    },
    {
        "task_id": 902,
        "text": "Write a function to count how many items of a tuple are strings.",
        "code": "def count_strings(t):\n    return sum(1 for x in t if isinstance(x, str))\n",
        "test_list": [
            "assert count_strings(('a', 1, 'b')) == 2",
            "assert count_strings((1, 2, 3)) == 0",
            "assert count_strings(('x',)) == 1",
        ],
        "test_setup_code": "",
    },
    {
        "task_id": 903,
        "text": "Write a function to square every number in a list.",
        "code": "def square_nums(nums):\n    return [n * n for n in nums]\n",
        "test_list": [
            "assert square_nums([1, 2, 3]) == [1, 4, 9]",
            "assert square_nums([]) == []",
            "assert square_nums([-2]) == [4]",
        ],
        "test_setup_code": "",
    },
]

# Verdict plan for the replay bundle: statuses per (strategy, task suffix).
VERDICTS: dict[str, dict[str, list[str]]] = {
    "mot": {tid: ["pass", "pass", "pass"] for tid in BUNDLE_IDS},
    "zero_shot": {
        "sample/0": ["pass", "pass", "pass"],
        "sample/1": ["pass", "pass", "pass"],
        "sample/2": ["pass", "pass", "pass"],
        "sample/3": ["pass", "fail", "fail"],
        "sample/4": ["fail", "error", "timeout"],
    },
    "cot": {
        "sample/0": ["pass", "pass", "pass"],
        "sample/1": ["pass", "pass", "pass"],
        "sample/2": ["pass", "pass", "pass"],
        "sample/3": ["pass", "pass", "pass"],
        "sample/4": ["pass", "pass", "fail"],
    },
    "mot_no_graph": {
        "sample/0": ["pass", "pass", "pass"],
        "sample/1": ["pass", "pass", "pass"],
        "sample/2": ["pass", "pass", "pass"],
        "sample/3": ["pass", "pass", "fail"],
        "sample/4": ["pass", "fail", "error"],
    },
    "mot_no_modularization": {
        "sample/0": ["pass", "pass", "pass"],
        "sample/1": ["pass", "pass", "pass"],
        "sample/2": ["pass", "pass", "pass"],
        "sample/3": ["pass", "pass", "pass"],
        "sample/4": ["fail", "fail", "fail"],
    },
}


def design_graph(entry_point: str) -> tuple[MLRGraph, TaskElements]:
    nodes = [
        MLRNode("H1", Level.HIGH, "Validate the input values", children=("M1",)),
        MLRNode(
            "H2",
            Level.HIGH,
            "Compute the required result",
            reasoning=ReasoningBlock(
                purpose="produce the value the caller asked for",
                rationale="a direct computation keeps the function easy to verify",
                strategy="apply the core operation to the validated input",
            ),
            children=("M2",),
        ),
        MLRNode("H3", Level.HIGH, "Return the final value", children=("M3",)),
        MLRNode("M1", Level.INTERMEDIATE, "Check the argument types and ranges", children=("D1",)),
        MLRNode("M2", Level.INTERMEDIATE, "Apply the core operation step by step", children=("D2",)),
        MLRNode("M3", Level.INTERMEDIATE, "Package and return the outcome"),
        MLRNode("D1", Level.DETAILED, "Reject values outside the supported domain"),
        MLRNode("D2", Level.DETAILED, "Carry out the arithmetic on the inputs"),
    ]
    elements = TaskElements(
        goal=f"implement {entry_point} as described",
        io_spec="arguments in, a single value out",
        constraints="behave sensibly on boundary inputs",
    )
    return MLRGraph.from_nodes(nodes), elements


class ScriptedRecorder:
    """Serves planned responses while recording each request as a fixture."""

    def __init__(self, store: FixtureStore, responses: list[tuple[str, Usage]]):
        self.store = store
        self.queue = list(responses)

    def chat(self, messages, max_output_tokens=None) -> ChatResponse:
        content, usage = self.queue.pop(0)
        response = ChatResponse(content=content, usage=usage)
        request = ChatRequest(MODEL, tuple(messages), max_output_tokens)
        record_fixture(self.store, request, response, overwrite=True)
        return response

    def complete(self, request):
        return self.chat(request.messages, request.max_output_tokens)


def code_reply(prose: str, candidate: str) -> str:
    return f"{prose}\n```python\n{candidate}```\n"


def graph_reply(graph: MLRGraph, elements: TaskElements) -> str:
    body = json.dumps(graph.to_schema_dict(elements), ensure_ascii=False)
    return f"The design for this task:\n```json\n{body}\n```\n"


def write_sample_files() -> None:
    SAMPLE.mkdir(parents=True, exist_ok=True)
    records = []
    for task_id, entry, prompt, canonical, _mutated, check in SAMPLE_PROBLEMS:
        records.append(
            {
                "task_id": task_id,
                "prompt": prompt,
                "entry_point": entry,
                "test": check,
                "canonical_solution": canonical,
            }
        )
    (SAMPLE / "problems.jsonl").write_text(
        "\n".join(json.dumps(r, ensure_ascii=False) for r in records) + "\n", encoding="utf-8"
    )
    (SAMPLE / "mbpp_problems.jsonl").write_text(
        "\n".join(json.dumps(r, ensure_ascii=False) for r in MBPP_PROBLEMS) + "\n", encoding="utf-8"
    )


def write_exec_cases() -> None:
    problems = load_dataset(DatasetId.HUMANEVAL, SAMPLE / "problems.jsonl")
    mutated_by_id = {p[0]: p[1:] for p in SAMPLE_PROBLEMS}
    entries = []
    for problem in problems:
        entry, prompt, _canonical, mutated, _check = mutated_by_id[problem.task_id]
        entries.append(
            {
                "id": problem.task_id,
                "entry_point": entry,
                "setup": problem.suite.setup,
                "cases": list(problem.suite.cases),
                "canonical": problem.canonical_solution,
                "mutated": prompt + mutated,
            }
        )
    (SAMPLE / "exec_cases.json").write_text(json.dumps(entries, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def record_llm_fixtures() -> None:
    store_dir = FIXTURES / "llm"
    if store_dir.exists():
        for f in store_dir.iterdir():
            f.unlink()
    store = FixtureStore(store_dir)
    problems = {
        p.task_id: p
        for p in load_dataset(DatasetId.HUMANEVAL, SAMPLE / "problems.jsonl")
        if p.task_id in BUNDLE_IDS
    }
    for task_id, problem in problems.items():
        canonical = problem.canonical_solution
        graph, elements = design_graph(problem.entry_point)
        scripts: dict[StrategyId, list[tuple[str, Usage]]] = {
            StrategyId.ZERO_SHOT: [(code_reply("Here is the solution.", canonical), CODE_USAGE)],
            StrategyId.COT: [
                (
                    code_reply(
                        "Step 1: read the requirement. Step 2: handle the boundaries. Step 3: implement it.",
                        canonical,
                    ),
                    CODE_USAGE,
                )
            ],
            StrategyId.MOT_NO_GRAPH: [
                (
                    code_reply(
                        "Subtask 1 validates input, subtask 2 computes the result, subtask 3 returns it.",
                        canonical,
                    ),
                    CODE_USAGE,
                )
            ],
            StrategyId.MOT: [
                (graph_reply(graph, elements), GRAPH_USAGE),
                (code_reply("Implementing each design node:", canonical), CODE_USAGE),
            ],
            StrategyId.MOT_NO_MODULARIZATION: [
                (graph_reply(graph, elements), GRAPH_USAGE),
                (code_reply("One monolithic function:", canonical), CODE_USAGE),
            ],
        }
        for strategy, responses in scripts.items():
            client = ScriptedRecorder(store, responses)
            record = generate(strategy, problem, client)
            assert record.extracted_code.strip(), f"{strategy} on {task_id} produced no code"
            assert not client.queue, f"{strategy} on {task_id} left unused responses"


def write_exec_reports() -> None:
    reports = {}
    for strategy, by_task in VERDICTS.items():
        for task_id, statuses in by_task.items():
            reports[f"{strategy}:{task_id}"] = {
                "results": [
                    {"status": s, "detail": "" if s == "pass" else f"case ended with {s}"} for s in statuses
                ],
                "duration_ms": 50,
            }
    (FIXTURES / "exec_reports.json").write_text(json.dumps(reports, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def write_run_config() -> None:
    config = {
        "dataset": "humaneval",
        "data": "fixtures/sample/problems.jsonl",
        "strategies": [s.value for s in BUNDLE_STRATEGIES],
        "mode": "replay",
        "fixtures": "fixtures/llm",
        "exec_fixtures": "fixtures/exec_reports.json",
        "parallelism": 3,
        "timeout_ms": 2000,
        "out": "runs/replay-bundle",
        "only": BUNDLE_IDS,
        "provider": {
            "model": MODEL,
            "api_key_env_name": "MOTBENCH_API_KEY",
            "pricing": {"usd_per_input_token": PRICE_IN, "usd_per_output_token": PRICE_OUT},
        },
    }
    (FIXTURES / "run_config.json").write_text(json.dumps(config, indent=2) + "\n", encoding="utf-8")


def write_manifest() -> None:
    """Expected metrics from the verdict plan, with plain Fraction arithmetic."""
    expected: dict[str, dict] = {}
    for strategy in (s.value for s in BUNDLE_STRATEGIES):
        by_task = VERDICTS[strategy]
        solved = sum(1 for statuses in by_task.values() if all(s == "pass" for s in statuses))
        ratio_sum = Fraction(0)
        for statuses in by_task.values():
            ratio_sum += Fraction(sum(1 for s in statuses if s == "pass"), len(statuses))
        n = len(by_task)
        calls = 2 if strategy in ("mot", "mot_no_modularization") else 1
        in_tokens = GRAPH_USAGE.in_tokens + CODE_USAGE.in_tokens if calls == 2 else CODE_USAGE.in_tokens
        out_tokens = GRAPH_USAGE.out_tokens + CODE_USAGE.out_tokens if calls == 2 else CODE_USAGE.out_tokens
        expected[strategy] = {
            "pass_at_1_pct": float(Fraction(100 * solved, n)),
            "apr_pct": float(100 * ratio_sum / n),
            "avg_cost_usd": in_tokens * PRICE_IN + out_tokens * PRICE_OUT,
            "avg_in_tokens": float(in_tokens),
            "avg_out_tokens": float(out_tokens),
            "calls_per_problem": calls,
        }
    manifest = {
        "problems": BUNDLE_IDS,
        "strategies": expected,
        "log_entries": len(BUNDLE_IDS) * len(BUNDLE_STRATEGIES),
    }
    (FIXTURES / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def main() -> None:
    write_sample_files()
    write_exec_cases()
    record_llm_fixtures()
    write_exec_reports()
    write_run_config()
    write_manifest()
    fixture_count = len(list((FIXTURES / "llm").iterdir()))
    print(f"fixtures written: {fixture_count} chat fixtures, {len(SAMPLE_PROBLEMS)} sample problems")


if __name__ == "__main__":
    main()
