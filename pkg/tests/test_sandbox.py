import json
import random
import sys
import textwrap

import pytest

from reflexion.sandbox import (
    ExecRule,
    SandboxProtocolError,
    SandboxScriptError,
    ScriptedSandbox,
    SubprocessSandbox,
    TestStatus,
    all_passed,
    validate_statement,
)


class TestValidateStatement:
    def test_docstring_example_valid(self):
        assert validate_statement("assert minSubArraySum([-1, -2, -3]) == -6")

    def test_unbalanced_parenthesis_invalid(self):
        assert not validate_statement("assert f(1,2 ==")

    def test_empty_invalid(self):
        assert not validate_statement("")
        assert not validate_statement("   \n  ")

    def test_comment_only_invalid(self):
        assert not validate_statement("# just a comment")

    def test_validation_never_executes(self, tmp_path):
        marker = tmp_path / "marker.txt"
        statement = f"__import__('pathlib').Path({str(marker)!r}).write_text('ran')"
        assert validate_statement(statement)
        assert not marker.exists()


class TestScriptedSandbox:
    def test_validate_is_real_parsing(self):
        sandbox = ScriptedSandbox()
        assert sandbox.validate(["assert 1 == 1", "assert f(1,2 ==", ""]) == [True, False, False]

    def test_execute_broadcast_status(self):
        sandbox = ScriptedSandbox([ExecRule("def f", "pass")])
        outcomes = sandbox.execute("def f(): pass", ["assert f() is None", "assert True"])
        assert all_passed(outcomes)

    def test_execute_per_test_statuses(self):
        sandbox = ScriptedSandbox([ExecRule("def f", ["pass", "fail"])])
        outcomes = sandbox.execute("def f(): pass", ["t1", "t2"])
        assert [o.status for o in outcomes] == [TestStatus.PASS, TestStatus.FAIL]
        assert "t2" in outcomes[1].message

    def test_execute_by_substring_mapping(self):
        sandbox = ScriptedSandbox([ExecRule("def f", {"== -6": "fail", "default": "pass"})])
        outcomes = sandbox.execute("def f(): pass", ["assert f() == 1", "assert f() == -6"])
        assert [o.status for o in outcomes] == [TestStatus.PASS, TestStatus.FAIL]

    def test_unmatched_source_is_protocol_error(self):
        sandbox = ScriptedSandbox([ExecRule("nope", "pass")])
        with pytest.raises(SandboxProtocolError):
            sandbox.execute("def f(): pass", ["t"])

    def test_misaligned_status_list_rejected(self):
        sandbox = ScriptedSandbox([ExecRule("def f", ["pass"])])
        with pytest.raises(SandboxScriptError):
            sandbox.execute("def f(): pass", ["t1", "t2"])

    def test_request_log(self):
        sandbox = ScriptedSandbox([ExecRule(".", "pass")])
        sandbox.validate(["assert True"])
        sandbox.execute("x = 1", ["assert True"])
        assert sandbox.validate_calls == 1
        assert sandbox.execute_calls == 1

    def test_responses_length_match_randomized(self):
        rng = random.Random(3)
        sandbox = ScriptedSandbox([ExecRule("(?s).", "pass")])
        pool = ["assert True", "assert f(1,2 ==", "", "x = ", "y = 1"]
        for _ in range(500):
            n = rng.randint(1, 9)
            tests = [rng.choice(pool) for _ in range(n)]
            if rng.random() < 0.5:
                assert len(sandbox.validate(tests)) == n
            else:
                assert len(sandbox.execute("src", tests)) == n


# A miniature runner speaking the wire protocol, used to exercise the
# subprocess client without the external runner.
TINY_RUNNER = textwrap.dedent(
    """
    import ast, json, sys
    for line in sys.stdin:
        req = json.loads(line)
        if req["mode"] == "validate":
            results = []
            for t in req["tests"]:
                ok = bool(t.strip())
                if ok:
                    try:
                        ok = len(ast.parse(t).body) > 0
                    except SyntaxError:
                        ok = False
                results.append(ok)
            print(json.dumps({"mode": "validate", "results": results}), flush=True)
        elif req["mode"] == "execute":
            results = [
                {"status": "pass", "message": "", "duration_ms": 1} for _ in req["tests"]
            ]
            print(json.dumps({"mode": "execute", "results": results}), flush=True)
        else:
            print(json.dumps({"mode": "error", "error": "bad mode"}), flush=True)
    """
)


@pytest.fixture()
def tiny_runner(tmp_path):
    script = tmp_path / "runner.py"
    script.write_text(TINY_RUNNER, encoding="utf-8")
    sandbox = SubprocessSandbox([sys.executable, str(script)])
    yield sandbox
    sandbox.close()


class TestSubprocessSandbox:
    def test_validate_round_trip(self, tiny_runner):
        assert tiny_runner.validate(["assert 1 == 1", "assert f(2 =="]) == [True, False]

    def test_execute_round_trip(self, tiny_runner):
        outcomes = tiny_runner.execute("x = 1", ["assert True", "assert x == 1"])
        assert all_passed(outcomes)
        assert all(o.duration_ms == 1 for o in outcomes)

    def test_sequential_requests_share_one_process(self, tiny_runner):
        tiny_runner.validate(["assert True"])
        first = tiny_runner._proc.pid
        tiny_runner.validate(["assert True"])
        assert tiny_runner._proc.pid == first

    def test_crashed_runner_raises_and_recovers(self, tmp_path):
        script = tmp_path / "crash.py"
        script.write_text("import sys; sys.exit(3)", encoding="utf-8")
        sandbox = SubprocessSandbox([sys.executable, str(script)], suite_timeout_s=1)
        with pytest.raises(SandboxProtocolError):
            sandbox.validate(["assert True"])
        sandbox.close()

    def test_hung_runner_killed_at_deadline(self, tmp_path):
        script = tmp_path / "hang.py"
        script.write_text("import time\nwhile True: time.sleep(1)", encoding="utf-8")
        sandbox = SubprocessSandbox([sys.executable, str(script)], suite_timeout_s=0.2)
        with pytest.raises(SandboxProtocolError):
            sandbox.validate(["assert True"])
        sandbox.close()

    def test_malformed_reply_is_protocol_error(self, tmp_path):
        script = tmp_path / "garbage.py"
        script.write_text(
            "import sys\nfor line in sys.stdin: print('not json', flush=True)",
            encoding="utf-8",
        )
        sandbox = SubprocessSandbox([sys.executable, str(script)])
        with pytest.raises(SandboxProtocolError):
            sandbox.validate(["assert True"])
        sandbox.close()

    def test_protocol_shapes_are_wire_exact(self, tiny_runner):
        response = tiny_runner.handle({"mode": "validate", "tests": ["assert True"]})
        assert response == {"mode": "validate", "results": [True]}
        response = tiny_runner.handle(
            {"mode": "execute", "source": "x=1", "tests": ["assert True"], "timeout_ms": 100}
        )
        assert response == {
            "mode": "execute",
            "results": [{"status": "pass", "message": "", "duration_ms": 1}],
        }
