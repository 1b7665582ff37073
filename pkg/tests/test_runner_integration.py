"""Primary client against the real external runner, when it is built.

These exercise the full protocol between SubprocessSandbox and the
sandbox-runner executable; they are skipped if dist/main.js is absent so
the primary suite never depends on the secondary build.
"""

from pathlib import Path

import pytest

from reflexion.codegym import SuiteProvenance, TestSuite, evaluate_internal, load_problems
from reflexion.sandbox import SubprocessSandbox, TestStatus

from support import FIXTURES

RUNNER = Path(__file__).resolve().parents[1] / "sandbox-runner" / "dist" / "main.js"

pytestmark = pytest.mark.skipif(
    not RUNNER.exists(), reason="sandbox-runner is not built (npm run build)"
)

CORRECT_BODY = """    min_sum = float('inf')
    for i in range(len(nums)):
        current_sum = 0
        for j in range(i, len(nums)):
            current_sum += nums[j]
            if current_sum < min_sum:
                min_sum = current_sum
    return min_sum"""


@pytest.fixture()
def runner_sandbox():
    sandbox = SubprocessSandbox(["node", str(RUNNER)])
    yield sandbox
    sandbox.close()


def min_problem():
    problems = load_problems(FIXTURES / "problems")
    return next(p for p in problems if p.problem_id == "min_sub_array_sum")


def test_validate_through_real_runner(runner_sandbox):
    results = runner_sandbox.validate(
        ["assert minSubArraySum([-1, -2, -3]) == -6", "assert f(1,2 ==", ""]
    )
    assert results == [True, False, False]


def test_internal_evaluation_through_real_runner(runner_sandbox):
    problem = min_problem()
    suite = TestSuite(
        tests=(
            "assert minSubArraySum([2, 3, 4, 1, 2, 4]) == 1",
            "assert minSubArraySum([-1, -2, -3]) == -6",
        ),
        provenance=SuiteProvenance.SELF_GENERATED,
    )
    verdict, outcomes = evaluate_internal(CORRECT_BODY, problem, suite, runner_sandbox)
    assert verdict.passed
    assert [o.status for o in outcomes] == [TestStatus.PASS, TestStatus.PASS]

    verdict, outcomes = evaluate_internal("    return 0", problem, suite, runner_sandbox)
    assert not verdict.passed
    assert all(o.status is TestStatus.FAIL for o in outcomes)


def test_timeout_through_real_runner(runner_sandbox):
    outcomes = runner_sandbox.execute(
        "def spin():\n    while True:\n        pass\n",
        ["assert spin() is None"],
        timeout_ms=100,
    )
    assert outcomes[0].status is TestStatus.TIMEOUT


def test_full_demo_suite_through_real_runner(tmp_path):
    """The whole programming demo, with real execution instead of scripts."""
    from reflexion.cli import run_from_config
    from reflexion.config import load_config

    config = load_config(FIXTURES / "configs" / "codegym_demo.yaml")
    config["sandbox"] = {"kind": "subprocess", "command": ["node", str(RUNNER)], "script": None}
    report = run_from_config(config, tmp_path / "out")
    assert report.totals["tasks_solved"] == 6
    assert report.confusion["counts"]["TP"] == 6
    assert report.confusion["pass_at_1"] == 1.0
