"""Client side of the test-execution sandbox protocol.

The wire protocol (documented in PROTOCOL.md at the repository root) is one
JSON object per line on the runner's standard streams:

  {"mode": "validate", "tests": [..]}          -> {"mode": "validate", "results": [true, ..]}
  {"mode": "execute", "source": "..",
   "tests": [..], "timeout_ms": 5000}          -> {"mode": "execute", "results": [{"status": "pass",
                                                    "message": "", "duration_ms": 3}, ..]}
  protocol failure                             -> {"mode": "error", "error": ".."}

Statuses are pass | fail | error | timeout, one per submitted test, in
order. ``SubprocessSandbox`` talks to an external runner executable;
``ScriptedSandbox`` implements the same request/response surface in-process
for tests and deterministic demo runs (validation is a real syntactic
parse, execution outcomes are scripted).
"""

from __future__ import annotations

import ast
import enum
import json
import re
import subprocess
import threading
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

DEFAULT_TEST_TIMEOUT_MS = 5_000
SUITE_TIMEOUT_S = 30.0


class SandboxError(Exception):
    pass


class SandboxProtocolError(SandboxError):
    """The runner broke the wire contract (crash, bad JSON, length mismatch)."""


class SandboxScriptError(SandboxError):
    """The scripted sandbox had no rule for the submitted source."""


class TestStatus(str, enum.Enum):
    __test__ = False  # not a pytest class, despite the name

    PASS = "pass"
    FAIL = "fail"
    ERROR = "error"
    TIMEOUT = "timeout"


@dataclass(frozen=True)
class TestOutcome:
    status: TestStatus
    message: str = ""
    duration_ms: int = 0


def all_passed(outcomes: Sequence[TestOutcome]) -> bool:
    return bool(outcomes) and all(o.status is TestStatus.PASS for o in outcomes)


def validate_statement(text: str) -> bool:
    """True iff the text parses standalone as at least one statement.

    Never executes anything: this is a parse, not an eval.
    """
    if not text.strip():
        return False
    try:
        module = ast.parse(text)
    except (SyntaxError, ValueError):
        return False
    return len(module.body) > 0


class ProtocolSandbox:
    """Shared request/response plumbing over ``handle(request) -> response``."""

    def handle(self, request: dict) -> dict:
        raise NotImplementedError

    def validate(self, tests: Sequence[str]) -> list[bool]:
        response = self.handle({"mode": "validate", "tests": list(tests)})
        results = self._results(response, "validate", len(tests))
        return [bool(r) for r in results]

    def execute(
        self,
        source: str,
        tests: Sequence[str],
        timeout_ms: int = DEFAULT_TEST_TIMEOUT_MS,
    ) -> list[TestOutcome]:
        if not tests:
            raise SandboxError("execute requires at least one test")
        response = self.handle(
            {
                "mode": "execute",
                "source": source,
                "tests": list(tests),
                "timeout_ms": timeout_ms,
            }
        )
        results = self._results(response, "execute", len(tests))
        return [
            TestOutcome(
                status=TestStatus(r["status"]),
                message=r.get("message", ""),
                duration_ms=int(r.get("duration_ms", 0)),
            )
            for r in results
        ]

    @staticmethod
    def _results(response: dict, mode: str, expected: int) -> list:
        if response.get("mode") == "error":
            raise SandboxProtocolError(response.get("error", "unknown sandbox error"))
        if response.get("mode") != mode:
            raise SandboxProtocolError(f"unexpected response mode {response.get('mode')!r}")
        results = response.get("results")
        if not isinstance(results, list) or len(results) != expected:
            raise SandboxProtocolError(
                f"response carried {len(results) if isinstance(results, list) else 'no'} "
                f"results for {expected} tests"
            )
        return results


class SubprocessSandbox(ProtocolSandbox):
    """Talks to a runner executable over its standard streams.

    One runner process serves requests serially; spawn several instances
    for parallelism. A response deadline of twice the suite budget guards
    against a hung runner; the child is killed and the request fails.
    """

    def __init__(self, command: Sequence[str], suite_timeout_s: float = SUITE_TIMEOUT_S) -> None:
        self._command = list(command)
        self._deadline_s = 2.0 * suite_timeout_s
        self._proc: Optional[subprocess.Popen] = None
        self._lock = threading.Lock()

    def _ensure_process(self) -> subprocess.Popen:
        if self._proc is None or self._proc.poll() is not None:
            self._proc = subprocess.Popen(
                self._command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
                text=True,
                encoding="utf-8",
            )
        return self._proc

    def handle(self, request: dict) -> dict:
        with self._lock:
            proc = self._ensure_process()
            line = json.dumps(request, ensure_ascii=False)
            reply: list[Optional[str]] = [None]

            def read_reply() -> None:
                assert proc.stdout is not None
                reply[0] = proc.stdout.readline()

            try:
                assert proc.stdin is not None
                proc.stdin.write(line + "\n")
                proc.stdin.flush()
            except (BrokenPipeError, OSError) as exc:
                self._kill()
                raise SandboxProtocolError(f"runner rejected request: {exc}") from exc

            reader = threading.Thread(target=read_reply, daemon=True)
            reader.start()
            reader.join(self._deadline_s)
            if reader.is_alive() or not reply[0]:
                self._kill()
                raise SandboxProtocolError("runner did not answer before the hard deadline")
            try:
                return json.loads(reply[0])
            except json.JSONDecodeError as exc:
                self._kill()
                raise SandboxProtocolError(f"runner sent malformed JSON: {exc}") from exc

    def _kill(self) -> None:
        if self._proc is not None and self._proc.poll() is None:
            self._proc.kill()
        self._proc = None

    def close(self) -> None:
        with self._lock:
            if self._proc is not None and self._proc.poll() is None:
                assert self._proc.stdin is not None
                self._proc.stdin.close()
                try:
                    self._proc.wait(timeout=2)
                except subprocess.TimeoutExpired:
                    self._proc.kill()
            self._proc = None


StatusScript = Union[str, Sequence[str], Callable[[str], str]]


@dataclass
class ExecRule:
    """Maps sources matching ``pattern`` to per-test statuses.

    ``statuses`` is a single status broadcast to every test, a list aligned
    with the submitted tests, a mapping from test substring to status (with
    optional "default"), or a callable from test text to status.
    """

    pattern: str
    statuses: Union[StatusScript, dict]

    def status_for(self, test: str, index: int, total: int) -> str:
        if callable(self.statuses):
            return self.statuses(test)
        if isinstance(self.statuses, str):
            return self.statuses
        if isinstance(self.statuses, dict):
            for needle, status in self.statuses.items():
                if needle != "default" and needle in test:
                    return status
            return self.statuses.get("default", "pass")
        seq = list(self.statuses)
        if len(seq) != total:
            raise SandboxScriptError(
                f"rule {self.pattern!r} scripts {len(seq)} statuses for {total} tests"
            )
        return seq[index]


class ScriptedSandbox(ProtocolSandbox):
    """Protocol-boundary fake: real syntactic validation, scripted execution.

    Keeps a log of handled requests so tests can assert on call counts and
    on what was executed.
    """

    def __init__(self, exec_rules: Sequence[ExecRule] = ()) -> None:
        self._rules = list(exec_rules)
        self.requests: list[dict] = []
        self._lock = threading.Lock()

    @property
    def execute_calls(self) -> int:
        return sum(1 for r in self.requests if r.get("mode") == "execute")

    @property
    def validate_calls(self) -> int:
        return sum(1 for r in self.requests if r.get("mode") == "validate")

    def handle(self, request: dict) -> dict:
        with self._lock:
            self.requests.append(request)
            mode = request.get("mode")
            if mode == "validate":
                return {
                    "mode": "validate",
                    "results": [validate_statement(t) for t in request.get("tests", [])],
                }
            if mode == "execute":
                return self._execute(request)
            return {"mode": "error", "error": f"unknown mode {mode!r}"}

    def _execute(self, request: dict) -> dict:
        source = request.get("source", "")
        tests = request.get("tests", [])
        rule = next((r for r in self._rules if re.search(r.pattern, source, re.DOTALL)), None)
        if rule is None:
            return {"mode": "error", "error": f"no exec rule matches source: {source[:80]!r}"}
        results = []
        total = len(tests)
        for index, test in enumerate(tests):
            status = rule.status_for(test, index, total)
            message = ""
            if status == "fail":
                message = f"assertion failed: {test}"
            elif status == "error":
                message = "raised an exception"
            elif status == "timeout":
                message = "timed out"
            results.append({"status": status, "message": message, "duration_ms": 0})
        return {"mode": "execute", "results": results}
