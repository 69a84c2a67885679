"""Run metrics: pass@1, average pass ratio, cost summaries, relative deltas.

All aggregation keeps full float precision internally; rounding only
happens in the display helpers (one decimal for percentages, two decimals
for deltas, four significant figures for dollar costs).
"""

from __future__ import annotations

from dataclasses import dataclass
from statistics import fmean
from typing import Iterable, Sequence

from .benchmark import DatasetId
from .llm_client import Pricing, Usage

MINUS = "−"  # typographic minus used in delta strings


class EmptyRun(Exception):
    """No outcomes / records to aggregate."""


class AprUnsupported(Exception):
    """The dataset does not carry a complete per-problem case set."""


class ZeroReference(ValueError):
    """relative_delta needs a strictly positive reference."""


@dataclass(frozen=True)
class ProblemOutcome:
    task_id: str
    samples_total: int
    samples_correct: int
    cases_total: int
    cases_passed: int

    def __post_init__(self):
        if not 0 <= self.samples_correct <= self.samples_total:
            raise ValueError("samples_correct out of range")
        if not 0 <= self.cases_passed <= self.cases_total:
            raise ValueError("cases_passed out of range")
        if self.samples_total == 1 and (self.samples_correct == 1) != (
            self.cases_total > 0 and self.cases_passed == self.cases_total
        ):
            raise ValueError("single-sample outcome must mark correct iff all cases passed")


@dataclass(frozen=True)
class RunMetrics:
    pass_at_1_pct: float
    apr_pct: float | None
    avg_cost_usd: float
    avg_in_tokens: float
    avg_out_tokens: float
    avg_wall_time_s: float


@dataclass(frozen=True)
class CostSummary:
    avg_cost_usd: float
    avg_in_tokens: float
    avg_out_tokens: float


def pass_at_1(outcomes: Sequence[ProblemOutcome]) -> float:
    """Mean over problems of 1 - (n - c) / n, as a percentage (full precision)."""
    if not outcomes:
        raise EmptyRun("no outcomes")
    return 100.0 * fmean(1.0 - (o.samples_total - o.samples_correct) / o.samples_total for o in outcomes)


def avg_pass_ratio(outcomes: Sequence[ProblemOutcome], dataset: DatasetId | None = None) -> float:
    """Mean over problems of passed/total cases, as a percentage (full precision)."""
    if dataset is not None and not dataset.apr_supported:
        raise AprUnsupported(f"average pass ratio is not computed for {dataset.value}")
    if not outcomes:
        raise EmptyRun("no outcomes")
    for o in outcomes:
        if o.cases_total < 1:
            raise ValueError(f"outcome {o.task_id} has no cases")
    return 100.0 * fmean(o.cases_passed / o.cases_total for o in outcomes)


def cost_summary(records: Iterable[Sequence[Usage]], pricing: Pricing) -> CostSummary:
    """Per-record cost is the priced sum over its calls; averages over records."""
    costs: list[float] = []
    ins: list[float] = []
    outs: list[float] = []
    for usages in records:
        in_total = sum(u.in_tokens for u in usages)
        out_total = sum(u.out_tokens for u in usages)
        costs.append(in_total * pricing.usd_per_input_token + out_total * pricing.usd_per_output_token)
        ins.append(float(in_total))
        outs.append(float(out_total))
    if not costs:
        raise EmptyRun("no records")
    return CostSummary(avg_cost_usd=fmean(costs), avg_in_tokens=fmean(ins), avg_out_tokens=fmean(outs))


def relative_delta(value: float, reference: float) -> str:
    """Signed two-decimal percent change versus the reference, e.g. "−4.02%"."""
    if reference <= 0:
        raise ZeroReference("reference must be > 0")
    delta = 100.0 * (value - reference) / reference
    rounded = round(delta, 2)
    if rounded == 0:
        return "+0.00%"
    sign = "+" if rounded > 0 else MINUS
    return f"{sign}{abs(rounded):.2f}%"


def display_percent(value: float) -> float:
    """One-decimal display rounding used for pass@1 / pass-ratio tables."""
    return round(value, 1)


def format_percent(value: float) -> str:
    return f"{value:.1f}"


def format_cost(value: float) -> str:
    return f"{value:.4g}"


def format_tokens(value: float) -> str:
    return f"{value:.1f}"
