"""Candidate evaluation against an execution backend.

The harness never runs guest code in-process. It either replays recorded
execution reports (deterministic tests, zero guest runtime) or talks to a
worker subprocess over a newline-delimited JSON protocol:

  request  {"id", "source", "setup", "cases", "timeout_ms"}
  response {"id", "results": [{"status", "detail"}], "duration_ms"}

Statuses are pass | fail | error | timeout. A report is "solved" exactly
when every case passed; that predicate lives here and nowhere else.
"""

from __future__ import annotations

import enum
import json
import subprocess
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Protocol, Sequence


class CaseStatus(str, enum.Enum):
    PASS = "pass"
    FAIL = "fail"
    ERROR = "error"
    TIMEOUT = "timeout"


@dataclass(frozen=True)
class CaseResult:
    status: CaseStatus
    detail: str = ""

    def __post_init__(self):
        if self.status == CaseStatus.PASS and self.detail:
            object.__setattr__(self, "detail", "")


@dataclass(frozen=True)
class ExecRequest:
    id: str
    source: str
    setup: str
    cases: tuple[str, ...]
    timeout_ms: int = 10_000

    def __post_init__(self):
        if not self.cases:
            raise ValueError("request needs at least one case")
        if self.timeout_ms <= 0:
            raise ValueError("timeout_ms must be positive")


@dataclass(frozen=True)
class ExecReport:
    id: str
    results: tuple[CaseResult, ...]
    duration_ms: int = 0

    @property
    def cases_total(self) -> int:
        return len(self.results)

    @property
    def cases_passed(self) -> int:
        return sum(1 for r in self.results if r.status == CaseStatus.PASS)

    @property
    def solved(self) -> bool:
        # The one and only definition of the solved predicate.
        return self.cases_passed == self.cases_total


class BackendUnavailable(Exception):
    """Infrastructure failure, distinct from any per-case verdict."""


class Backend(Protocol):
    concurrency_safe: bool

    def run(self, request: ExecRequest) -> ExecReport: ...


def evaluate_candidate(backend: Backend, request: ExecRequest) -> ExecReport:
    """Dispatch one request; raises BackendUnavailable on infra failure."""
    return backend.run(request)


class RecordedBackend:
    """Canned reports keyed by request id; lets everything run with no guest runtime."""

    concurrency_safe = True

    def __init__(self, fixtures: Mapping[str, ExecReport]):
        self._fixtures = dict(fixtures)

    def run(self, request: ExecRequest) -> ExecReport:
        report = self._fixtures.get(request.id)
        if report is None:
            raise BackendUnavailable(f"no recorded execution report for id {request.id!r}")
        return report

    @classmethod
    def from_json_file(cls, path: str | Path) -> "RecordedBackend":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        fixtures = {
            key: ExecReport(
                id=key,
                results=tuple(
                    CaseResult(CaseStatus(r["status"]), r.get("detail", "")) for r in entry["results"]
                ),
                duration_ms=int(entry.get("duration_ms", 0)),
            )
            for key, entry in data.items()
        }
        return cls(fixtures)


class SubprocessWireBackend:
    """Client side of the wire protocol; drives one worker subprocess.

    The worker is launched lazily with no arguments and handles requests
    serially, so this backend declares itself serial and the orchestrator
    queues around it.
    """

    concurrency_safe = False

    def __init__(self, worker_cmd: Sequence[str]):
        if not worker_cmd:
            raise ValueError("worker_cmd must not be empty")
        self._cmd = list(worker_cmd)
        self._proc: subprocess.Popen | None = None

    def _ensure_worker(self) -> subprocess.Popen:
        if self._proc is None or self._proc.poll() is not None:
            try:
                self._proc = subprocess.Popen(
                    self._cmd,
                    stdin=subprocess.PIPE,
                    stdout=subprocess.PIPE,
                    text=True,
                    bufsize=1,
                )
            except OSError as exc:
                raise BackendUnavailable(f"cannot start worker {self._cmd!r}: {exc}") from exc
        return self._proc

    def run(self, request: ExecRequest) -> ExecReport:
        proc = self._ensure_worker()
        line = json.dumps(
            {
                "id": request.id,
                "source": request.source,
                "setup": request.setup,
                "cases": list(request.cases),
                "timeout_ms": request.timeout_ms,
            }
        )
        try:
            assert proc.stdin is not None and proc.stdout is not None
            proc.stdin.write(line + "\n")
            proc.stdin.flush()
            reply = proc.stdout.readline()
        except (OSError, ValueError) as exc:
            raise BackendUnavailable(f"worker pipe failure: {exc}") from exc
        if not reply:
            raise BackendUnavailable("worker closed its output stream")
        try:
            payload = json.loads(reply)
            results = tuple(
                CaseResult(CaseStatus(r["status"]), str(r.get("detail", ""))) for r in payload["results"]
            )
            return ExecReport(
                id=str(payload.get("id", "")), results=results, duration_ms=int(payload.get("duration_ms", 0))
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise BackendUnavailable(f"malformed worker response: {exc}") from exc

    def close(self) -> None:
        if self._proc is not None:
            if self._proc.stdin is not None:
                try:
                    self._proc.stdin.close()
                except OSError:
                    pass
            try:
                self._proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self._proc.kill()
            self._proc = None


def make_recorded_backend(fixtures: Mapping[str, ExecReport]) -> RecordedBackend:
    return RecordedBackend(fixtures)
