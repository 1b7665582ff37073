"""Uniform completion interface: HTTP endpoint, scripted mock, record/replay.

All providers expose ``complete(request) -> CompletionResponse`` and keep a
per-thread call counter so the trial loop can attribute calls to trials even
when tasks run concurrently. The wire format for the HTTP provider is the
common chat-completions request/response body; endpoint and model name are
configuration.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import httpx

API_KEY_ENV_VAR = "REFLEXION_API_KEY"


class ProviderError(Exception):
    """Base for completion failures."""


class NoMatchingScriptError(ProviderError):
    """The mock provider had no rule matching the prompt."""


class TransportFailureError(ProviderError):
    """Transport kept failing after the configured retries."""


class BadStatusError(ProviderError):
    """The endpoint answered with a non-2xx status."""


class MalformedResponseError(ProviderError):
    """The endpoint body did not carry a usable completion."""


class ReplayMissError(ProviderError):
    """Replay found no unconsumed cassette entry for the request digest."""


@dataclass(frozen=True)
class Message:
    role: str
    content: str

    def __post_init__(self) -> None:
        if self.role not in ("system", "user", "assistant"):
            raise ValueError(f"unknown message role {self.role!r}")


@dataclass(frozen=True)
class CompletionRequest:
    messages: tuple[Message, ...]
    temperature: float = 0.0
    max_tokens: int = 1024
    stop: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "messages", tuple(self.messages))
        object.__setattr__(self, "stop", tuple(self.stop))
        if not self.messages:
            raise ValueError("a request needs at least one message")
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError("temperature must lie in [0, 2]")
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be positive")

    def prompt_text(self) -> str:
        """All message contents joined; what mock patterns match against."""
        return "\n".join(m.content for m in self.messages)


@dataclass(frozen=True)
class CompletionResponse:
    content: str
    finish_reason: str = "stop"
    prompt_tokens: int = 0
    completion_tokens: int = 0

    def __post_init__(self) -> None:
        if self.finish_reason not in ("stop", "length", "error"):
            raise ValueError(f"unknown finish_reason {self.finish_reason!r}")


def request_to_dict(req: CompletionRequest) -> dict:
    return {
        "messages": [{"role": m.role, "content": m.content} for m in req.messages],
        "temperature": req.temperature,
        "max_tokens": req.max_tokens,
        "stop": list(req.stop),
    }


def request_from_dict(data: dict) -> CompletionRequest:
    return CompletionRequest(
        messages=tuple(Message(m["role"], m["content"]) for m in data["messages"]),
        temperature=data.get("temperature", 0.0),
        max_tokens=data.get("max_tokens", 1024),
        stop=tuple(data.get("stop", ())),
    )


def response_to_dict(resp: CompletionResponse) -> dict:
    return {
        "content": resp.content,
        "finish_reason": resp.finish_reason,
        "usage": {
            "prompt_tokens": resp.prompt_tokens,
            "completion_tokens": resp.completion_tokens,
        },
    }


def response_from_dict(data: dict) -> CompletionResponse:
    usage = data.get("usage", {})
    return CompletionResponse(
        content=data["content"],
        finish_reason=data.get("finish_reason", "stop"),
        prompt_tokens=usage.get("prompt_tokens", 0),
        completion_tokens=usage.get("completion_tokens", 0),
    )


def request_digest(req: CompletionRequest) -> str:
    """Stable hash of the normalized request; key-order independent."""
    canonical = json.dumps(request_to_dict(req), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class Provider:
    """Base provider: counting plus the complete() entry point."""

    def __init__(self) -> None:
        self._tls = threading.local()
        self._count_lock = threading.Lock()
        self._total_calls = 0

    def complete(self, request: CompletionRequest) -> CompletionResponse:
        self._bump()
        return self._complete(request)

    def _complete(self, request: CompletionRequest) -> CompletionResponse:
        raise NotImplementedError

    def _bump(self) -> None:
        self._tls.calls = getattr(self._tls, "calls", 0) + 1
        with self._count_lock:
            self._total_calls += 1

    @property
    def thread_calls(self) -> int:
        """Calls made from the current thread (per-trial attribution)."""
        return getattr(self._tls, "calls", 0)

    @property
    def total_calls(self) -> int:
        return self._total_calls


@dataclass
class ScriptRule:
    """One mock rule: a regex over the prompt text plus its response(s).

    A rule carrying several responses yields them in order on successive
    matches; the last one then sticks.
    """

    pattern: str
    responses: tuple[str, ...]
    _served: int = field(default=0, repr=False)

    def __post_init__(self) -> None:
        if isinstance(self.responses, str):
            self.responses = (self.responses,)
        self.responses = tuple(self.responses)
        if not self.responses:
            raise ValueError("a script rule needs at least one response")

    def next_response(self) -> str:
        idx = min(self._served, len(self.responses) - 1)
        self._served += 1
        return self.responses[idx]


class MockProvider(Provider):
    """Deterministic scripted provider.

    The first rule whose pattern matches the prompt text answers. Every
    request is kept in ``call_log`` so tests can assert on what was sent.
    """

    def __init__(self, rules: Sequence[ScriptRule]) -> None:
        super().__init__()
        self._rules = list(rules)
        self._lock = threading.Lock()
        self.call_log: list[CompletionRequest] = []

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple[str, str | Sequence[str]]]) -> "MockProvider":
        rules = []
        for pattern, responses in pairs:
            if isinstance(responses, str):
                responses = (responses,)
            rules.append(ScriptRule(pattern=pattern, responses=tuple(responses)))
        return cls(rules)

    @classmethod
    def from_script_file(cls, path: str | Path) -> "MockProvider":
        """Load rules from a YAML file: a list of {pattern, response} items."""
        import yaml

        data = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
        rules = []
        for item in data.get("rules", []):
            responses = item["response"]
            if isinstance(responses, str):
                responses = (responses,)
            rules.append(ScriptRule(pattern=item["pattern"], responses=tuple(responses)))
        return cls(rules)

    def prompts_seen(self) -> list[str]:
        with self._lock:
            return [req.prompt_text() for req in self.call_log]

    def _complete(self, request: CompletionRequest) -> CompletionResponse:
        prompt = request.prompt_text()
        with self._lock:
            self.call_log.append(request)
            for rule in self._rules:
                if re.search(rule.pattern, prompt, flags=re.DOTALL):
                    content = rule.next_response()
                    return CompletionResponse(
                        content=content,
                        finish_reason="stop",
                        prompt_tokens=len(prompt) // 4,
                        completion_tokens=len(content) // 4,
                    )
        raise NoMatchingScriptError(
            f"no script rule matched; prompt head: {prompt[:200]!r}"
        )


class HTTPProvider(Provider):
    """Chat-completions client over a configurable endpoint.

    Transient transport failures (connection errors, 429, 5xx) are retried
    up to ``retries`` times with exponential backoff. The bearer token is
    read from the REFLEXION_API_KEY environment variable unless given.
    """

    TRANSIENT_STATUSES = frozenset({429, 500, 502, 503, 504})

    def __init__(
        self,
        base_url: str,
        model: str,
        api_key: Optional[str] = None,
        retries: int = 2,
        backoff_s: float = 0.5,
        timeout_s: float = 60.0,
        transport: Optional[httpx.BaseTransport] = None,
    ) -> None:
        super().__init__()
        self.model = model
        key = api_key if api_key is not None else os.environ.get(API_KEY_ENV_VAR, "")
        headers = {"Authorization": f"Bearer {key}"} if key else {}
        self._retries = retries
        self._backoff_s = backoff_s
        self._client = httpx.Client(
            base_url=base_url, headers=headers, timeout=timeout_s, transport=transport
        )

    def _complete(self, request: CompletionRequest) -> CompletionResponse:
        body = dict(request_to_dict(request), model=self.model)
        if not body["stop"]:
            del body["stop"]
        last_exc: Exception | None = None
        for attempt in range(self._retries + 1):
            try:
                resp = self._client.post("/chat/completions", json=body)
            except httpx.TransportError as exc:
                last_exc = exc
                time.sleep(self._backoff_s * (2 ** attempt))
                continue
            if resp.status_code in self.TRANSIENT_STATUSES:
                last_exc = BadStatusError(f"status {resp.status_code}")
                time.sleep(self._backoff_s * (2 ** attempt))
                continue
            if resp.status_code // 100 != 2:
                raise BadStatusError(f"status {resp.status_code}: {resp.text[:300]}")
            return self._parse(resp)
        raise TransportFailureError(f"giving up after {self._retries + 1} attempts: {last_exc}")

    @staticmethod
    def _parse(resp: httpx.Response) -> CompletionResponse:
        try:
            data = resp.json()
            choice = data["choices"][0]
            usage = data.get("usage", {})
            return CompletionResponse(
                content=choice["message"]["content"],
                finish_reason=choice.get("finish_reason", "stop"),
                prompt_tokens=usage.get("prompt_tokens", 0),
                completion_tokens=usage.get("completion_tokens", 0),
            )
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            raise MalformedResponseError(f"cannot read completion body: {exc}") from exc

    def close(self) -> None:
        self._client.close()


@dataclass(frozen=True)
class CassetteEntry:
    digest: str
    request: dict
    response: CompletionResponse


def load_cassette(path: str | Path) -> list[CassetteEntry]:
    """Read a line-delimited cassette: one {digest, request, response} per line."""
    entries = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        data = json.loads(line)
        entries.append(
            CassetteEntry(
                digest=data["digest"],
                request=data["request"],
                response=response_from_dict(data["response"]),
            )
        )
    return entries


class RecordingProvider(Provider):
    """Pass-through provider that appends every exchange to a cassette file."""

    def __init__(self, inner: Provider, cassette_path: str | Path) -> None:
        super().__init__()
        self._inner = inner
        self._path = Path(cassette_path)
        self._lock = threading.Lock()
        self._path.parent.mkdir(parents=True, exist_ok=True)
        self._path.write_text("", encoding="utf-8")

    def _complete(self, request: CompletionRequest) -> CompletionResponse:
        response = self._inner.complete(request)
        line = json.dumps(
            {
                "digest": request_digest(request),
                "request": request_to_dict(request),
                "response": response_to_dict(response),
            },
            sort_keys=True,
        )
        with self._lock:
            with self._path.open("a", encoding="utf-8") as fh:
                fh.write(line + "\n")
        return response


class ReplayProvider(Provider):
    """Serves recorded responses by request digest; never touches the network.

    Entries are consumed in cassette order within a digest, so a run replayed
    against its own cassette reproduces every response and then errors on any
    extra call.
    """

    def __init__(self, cassette_path: str | Path) -> None:
        super().__init__()
        self._entries = load_cassette(cassette_path)
        self._consumed = [False] * len(self._entries)
        self._lock = threading.Lock()

    def _complete(self, request: CompletionRequest) -> CompletionResponse:
        digest = request_digest(request)
        with self._lock:
            for i, entry in enumerate(self._entries):
                if not self._consumed[i] and entry.digest == digest:
                    self._consumed[i] = True
                    return entry.response
        raise ReplayMissError(f"no unconsumed cassette entry for digest {digest[:12]}…")
