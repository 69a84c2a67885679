"""Chat-completion provider clients: live HTTP, replay, and recording.

The live client speaks the OpenAI-compatible ``/chat/completions`` shape.
Requests never set a temperature so the provider default applies. The
replay client serves recorded fixtures keyed by a content hash of the
request and performs no network activity at all, which is what makes the
benchmark runs deterministic and CI-safe.
"""

from __future__ import annotations

import hashlib
import json
import os
import random
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Protocol, Sequence

BACKOFF_INITIAL_S = 1.0
BACKOFF_CAP_S = 30.0


@dataclass(frozen=True)
class Message:
    role: str  # system | user | assistant
    content: str


@dataclass(frozen=True)
class Usage:
    in_tokens: int = 0
    out_tokens: int = 0

    def __post_init__(self):
        if self.in_tokens < 0 or self.out_tokens < 0:
            raise ValueError("token counts must be non-negative")

    def __add__(self, other: "Usage") -> "Usage":
        return Usage(self.in_tokens + other.in_tokens, self.out_tokens + other.out_tokens)


@dataclass(frozen=True)
class ChatRequest:
    model: str
    messages: tuple[Message, ...]
    max_output_tokens: int | None = None

    def __post_init__(self):
        if not self.messages:
            raise ValueError("messages must be non-empty")
        if self.max_output_tokens is not None and self.max_output_tokens <= 0:
            raise ValueError("max_output_tokens must be positive")


@dataclass(frozen=True)
class ChatResponse:
    content: str
    usage: Usage
    latency_s: float = 0.0


@dataclass(frozen=True)
class Pricing:
    usd_per_input_token: float = 0.0
    usd_per_output_token: float = 0.0

    def __post_init__(self):
        if self.usd_per_input_token < 0 or self.usd_per_output_token < 0:
            raise ValueError("pricing must be non-negative")


@dataclass(frozen=True)
class ProviderConfig:
    base_url: str = "https://api.openai.com/v1"
    api_key_env_name: str = "OPENAI_API_KEY"
    model: str = "gpt-4o-mini"
    request_timeout_s: float = 120.0
    max_retries: int = 3
    pricing: Pricing = field(default_factory=Pricing)

    def __post_init__(self):
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")


class ProviderError(Exception):
    """Provider-side failure. Kinds: auth, bad_request, transient_exhausted,
    malformed_response, missing_fixture."""

    def __init__(self, kind: str, message: str, *, attempts: int = 1):
        super().__init__(message)
        self.kind = kind
        self.attempts = attempts


class StoreError(Exception):
    """Fixture store failure. Kinds: conflict, io."""

    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind


class Client(Protocol):
    """Anything that can answer a chat request."""

    def complete(self, request: ChatRequest) -> ChatResponse: ...

    def chat(self, messages: Sequence[Message], max_output_tokens: int | None = None) -> ChatResponse: ...


def fixture_key(request: ChatRequest) -> str:
    """Stable content hash over (model, ordered messages).

    Deliberately insensitive to max_output_tokens so replay fixtures stay
    valid when output caps change.
    """
    payload = json.dumps(
        {"model": request.model, "messages": [[m.role, m.content] for m in request.messages]},
        ensure_ascii=False,
        separators=(",", ":"),
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


class FixtureStore:
    """One file per fixture key; body is {"content", "in_tokens", "out_tokens"}."""

    def __init__(self, root: str | Path):
        self.root = Path(root)

    def get(self, key: str) -> dict | None:
        path = self.root / key
        if not path.is_file():
            return None
        try:
            return json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise StoreError("io", f"cannot read fixture {key}: {exc}") from exc

    def put(self, key: str, entry: dict, *, overwrite: bool = False) -> None:
        path = self.root / key
        if path.exists() and not overwrite:
            raise StoreError("conflict", f"fixture {key} already exists")
        try:
            self.root.mkdir(parents=True, exist_ok=True)
            path.write_text(json.dumps(entry, ensure_ascii=False, indent=1) + "\n", encoding="utf-8")
        except OSError as exc:
            raise StoreError("io", f"cannot write fixture {key}: {exc}") from exc

    def __len__(self) -> int:
        return sum(1 for p in self.root.iterdir() if p.is_file()) if self.root.is_dir() else 0


def record_fixture(store: FixtureStore, request: ChatRequest, response: ChatResponse, *, overwrite: bool = False) -> str:
    key = fixture_key(request)
    store.put(
        key,
        {
            "content": response.content,
            "in_tokens": response.usage.in_tokens,
            "out_tokens": response.usage.out_tokens,
        },
        overwrite=overwrite,
    )
    return key


# A transport takes (url, headers, json_payload, timeout_s) and returns
# (status_code, decoded_body). Injected in tests; the default uses requests.
Transport = Callable[[str, dict, dict, float], tuple[int, dict]]


class TransportFailure(Exception):
    """Connection-level failure (timeout, refused, reset); always transient."""


def _requests_transport(url: str, headers: dict, payload: dict, timeout_s: float) -> tuple[int, dict]:
    import requests

    try:
        resp = requests.post(url, headers=headers, json=payload, timeout=timeout_s)
    except requests.RequestException as exc:
        raise TransportFailure(str(exc)) from exc
    try:
        body = resp.json()
    except ValueError:
        body = {"raw": resp.text}
    return resp.status_code, body


class LiveClient:
    """OpenAI-compatible HTTP client with exponential-backoff retries.

    Only transient failures (connection errors, timeouts, 429, 5xx) are
    retried; auth and other 4xx failures surface immediately. Usage comes
    from the provider's own accounting, never from local tokenization.
    """

    def __init__(
        self,
        config: ProviderConfig,
        *,
        transport: Transport | None = None,
        sleep: Callable[[float], None] = time.sleep,
        rng: random.Random | None = None,
    ):
        self.config = config
        self._transport = transport or _requests_transport
        self._sleep = sleep
        self._rng = rng or random.Random()

    def chat(self, messages: Sequence[Message], max_output_tokens: int | None = None) -> ChatResponse:
        return self.complete(ChatRequest(self.config.model, tuple(messages), max_output_tokens))

    def complete(self, request: ChatRequest) -> ChatResponse:
        api_key = os.environ.get(self.config.api_key_env_name)
        if not api_key:
            raise ProviderError("auth", f"environment variable {self.config.api_key_env_name} is not set")
        url = self.config.base_url.rstrip("/") + "/chat/completions"
        headers = {"Authorization": f"Bearer {api_key}", "Content-Type": "application/json"}
        payload: dict = {
            "model": request.model,
            "messages": [{"role": m.role, "content": m.content} for m in request.messages],
        }
        if request.max_output_tokens is not None:
            payload["max_tokens"] = request.max_output_tokens

        attempts = self.config.max_retries + 1
        last_failure = "no attempt made"
        for attempt in range(attempts):
            started = time.monotonic()
            try:
                status, body = self._transport(url, headers, payload, self.config.request_timeout_s)
            except TransportFailure as exc:
                last_failure = f"transport failure: {exc}"
                if attempt + 1 < attempts:
                    self._sleep(self._backoff(attempt))
                continue
            latency = time.monotonic() - started
            if status == 200:
                return self._parse_body(body, latency)
            if status in (401, 403):
                raise ProviderError("auth", f"provider rejected credentials (HTTP {status})", attempts=attempt + 1)
            if status == 429 or status >= 500:
                last_failure = f"HTTP {status}"
                if attempt + 1 < attempts:
                    self._sleep(self._backoff(attempt))
                continue
            raise ProviderError("bad_request", f"provider returned HTTP {status}: {body}", attempts=attempt + 1)
        raise ProviderError(
            "transient_exhausted",
            f"gave up after {attempts} attempts; last failure: {last_failure}",
            attempts=attempts,
        )

    def _backoff(self, attempt: int) -> float:
        base = min(BACKOFF_CAP_S, BACKOFF_INITIAL_S * (2**attempt))
        return base * self._rng.uniform(0.5, 1.0)

    @staticmethod
    def _parse_body(body: dict, latency: float) -> ChatResponse:
        try:
            content = body["choices"][0]["message"]["content"] or ""
        except (KeyError, IndexError, TypeError) as exc:
            raise ProviderError("malformed_response", f"unexpected response body: {exc}") from exc
        usage_raw = body.get("usage") or {}
        usage = Usage(int(usage_raw.get("prompt_tokens", 0)), int(usage_raw.get("completion_tokens", 0)))
        return ChatResponse(content=content, usage=usage, latency_s=latency)


class ReplayClient:
    """Serves recorded fixtures; zero network, fully deterministic."""

    def __init__(self, store: FixtureStore, model: str):
        self.store = store
        self.model = model

    def chat(self, messages: Sequence[Message], max_output_tokens: int | None = None) -> ChatResponse:
        return self.complete(ChatRequest(self.model, tuple(messages), max_output_tokens))

    def complete(self, request: ChatRequest) -> ChatResponse:
        key = fixture_key(request)
        entry = self.store.get(key)
        if entry is None:
            raise ProviderError("missing_fixture", f"no recorded fixture for key {key}")
        return ChatResponse(
            content=str(entry.get("content", "")),
            usage=Usage(int(entry.get("in_tokens", 0)), int(entry.get("out_tokens", 0))),
            latency_s=0.0,
        )


class RecordingClient:
    """Delegates to a live client and persists each response as a fixture."""

    def __init__(self, inner: LiveClient, store: FixtureStore, *, overwrite: bool = False):
        self.inner = inner
        self.store = store
        self.overwrite = overwrite

    def chat(self, messages: Sequence[Message], max_output_tokens: int | None = None) -> ChatResponse:
        return self.complete(ChatRequest(self.inner.config.model, tuple(messages), max_output_tokens))

    def complete(self, request: ChatRequest) -> ChatResponse:
        response = self.inner.complete(request)
        record_fixture(self.store, request, response, overwrite=self.overwrite)
        return response
