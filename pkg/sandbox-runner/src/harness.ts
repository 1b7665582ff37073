// Python-side programs the runner drives. The validator is a long-lived
// child that only ever parses; the executor is a fresh child per request
// so a crash cannot leak into the next execution.

// Reads {"tests": [...]} lines, answers a JSON list of booleans per line.
// ast.parse never runs the statement; empty statements are invalid.
export const VALIDATOR_SOURCE = `
import ast, json, sys

for line in sys.stdin:
    if not line.strip():
        continue
    request = json.loads(line)
    results = []
    for statement in request["tests"]:
        ok = bool(statement.strip())
        if ok:
            try:
                ok = len(ast.parse(statement).body) > 0
            except (SyntaxError, ValueError):
                ok = False
        results.append(ok)
    sys.stdout.write(json.dumps(results) + "\\n")
    sys.stdout.flush()
`;

// Reads one {"source", "tests", "timeout_ms"} payload on stdin, loads the
// source, runs every test in order under a per-test interval timer, and
// prints the per-test results as one JSON line. Assertion failures map to
// "fail", anything else raised maps to "error", timer expiry to "timeout".
export const EXECUTOR_SOURCE = `
import json, signal, sys, time

payload = json.loads(sys.stdin.read())
timeout_s = payload.get("timeout_ms", 5000) / 1000.0

try:
    import resource
    _GIB = 1024 * 1024 * 1024
    resource.setrlimit(resource.RLIMIT_AS, (_GIB, _GIB))
    _cpu_cap = max(2, int(timeout_s * len(payload["tests"])) + 2)
    resource.setrlimit(resource.RLIMIT_CPU, (_cpu_cap, _cpu_cap + 1))
except Exception:
    pass  # best effort; not every platform allows it


class _TestTimeout(Exception):
    pass


def _on_alarm(signum, frame):
    raise _TestTimeout()


signal.signal(signal.SIGALRM, _on_alarm)

namespace = {}
load_error = None
signal.setitimer(signal.ITIMER_REAL, timeout_s)
try:
    exec(compile(payload["source"], "<candidate>", "exec"), namespace)
except _TestTimeout:
    load_error = "source load exceeded the per-test budget"
except BaseException as exc:
    load_error = f"{type(exc).__name__}: {exc}"
finally:
    signal.setitimer(signal.ITIMER_REAL, 0)

results = []
for statement in payload["tests"]:
    if load_error is not None:
        results.append(
            {"status": "error", "message": f"source failed to load: {load_error}", "duration_ms": 0}
        )
        continue
    started = time.monotonic()
    signal.setitimer(signal.ITIMER_REAL, timeout_s)
    try:
        exec(compile(statement, "<test>", "exec"), namespace)
        status, message = "pass", ""
    except _TestTimeout:
        status, message = "timeout", f"test exceeded {payload.get('timeout_ms', 5000)} ms"
    except AssertionError as exc:
        status, message = "fail", str(exc) or f"assertion failed: {statement}"
    except BaseException as exc:
        status, message = "error", f"{type(exc).__name__}: {exc}"
    finally:
        signal.setitimer(signal.ITIMER_REAL, 0)
    results.append(
        {
            "status": status,
            "message": message,
            "duration_ms": int((time.monotonic() - started) * 1000),
        }
    )

sys.stdout.write(json.dumps(results) + "\\n")
sys.stdout.flush()
`;
