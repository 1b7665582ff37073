"""Internal-suite evaluation, one-shot hidden submission, confusion rates.

Hidden tests are consulted exactly once per task, after the trial loop has
exited, and are never rendered into any prompt; that is what keeps the
run's final accuracy a genuine single-submission number.
"""

from __future__ import annotations

import enum
import threading
from dataclasses import dataclass
from typing import Optional, Sequence

from ..core import FailureTag, TaskSpec, Trajectory, Verdict
from ..sandbox import (
    DEFAULT_TEST_TIMEOUT_MS,
    ProtocolSandbox,
    TestOutcome,
    TestStatus,
    all_passed,
)
from .problems import ProblemSpec
from .suite import SuiteProvenance, TestSuite


class DoubleSubmissionError(RuntimeError):
    pass


class OutcomeCell(str, enum.Enum):
    """Joint outcome of the internal suite and the hidden suite."""

    TP = "TP"  # internal passed, hidden passed
    FN = "FN"  # internal failed, hidden passed
    FP = "FP"  # internal passed, hidden failed
    TN = "TN"  # internal failed, hidden failed


def assemble_program(signature: str, body: str) -> str:
    """Join a signature with a generated body, indenting the body if needed."""
    body = body.rstrip()
    lines = body.splitlines()
    first_code = next((ln for ln in lines if ln.strip()), "")
    if first_code and not first_code.startswith((" ", "\t")):
        lines = [("    " + ln if ln.strip() else ln) for ln in lines]
        body = "\n".join(lines)
    return f"{signature.rstrip()}\n{body}\n"


def _feedback(tests: Sequence[str], outcomes: Sequence[TestOutcome]) -> str:
    failed = [
        (test, outcome)
        for test, outcome in zip(tests, outcomes)
        if outcome.status is not TestStatus.PASS
    ]
    if not failed:
        return f"all {len(tests)} tests passed"
    lines = [f"{len(failed)} of {len(tests)} tests failed:"]
    for test, outcome in failed:
        line = f"  [{outcome.status.value}] {test}"
        if outcome.message:
            line += f"  ({outcome.message})"
        lines.append(line)
    return "\n".join(lines)


def evaluate_internal(
    candidate_body: str,
    problem: ProblemSpec,
    suite: TestSuite,
    sandbox: ProtocolSandbox,
    timeout_ms: int = DEFAULT_TEST_TIMEOUT_MS,
) -> tuple[Verdict, list[TestOutcome]]:
    """Run the candidate against the self-generated suite.

    The verdict's detail names every failing test so the reflection step
    can condition on concrete unit-test feedback. Timeouts count as
    failures.
    """
    if suite.provenance is not SuiteProvenance.SELF_GENERATED:
        raise ValueError("internal evaluation only accepts self-generated suites")
    if not suite.tests:
        raise ValueError("cannot evaluate against an empty suite")
    program = assemble_program(problem.signature, candidate_body)
    outcomes = sandbox.execute(program, suite.tests, timeout_ms=timeout_ms)
    detail = _feedback(suite.tests, outcomes)
    if all_passed(outcomes):
        return Verdict.success(detail=detail), outcomes
    return Verdict.failure(tag=FailureTag.TESTS_FAILED, detail=detail), outcomes


class SuiteEvaluator:
    """Adapter: trial-loop evaluator backed by evaluate_internal."""

    def __init__(
        self,
        problem: ProblemSpec,
        suite: TestSuite,
        sandbox: ProtocolSandbox,
        timeout_ms: int = DEFAULT_TEST_TIMEOUT_MS,
    ) -> None:
        self.problem = problem
        self.suite = suite
        self.sandbox = sandbox
        self.timeout_ms = timeout_ms

    def evaluate(self, task: TaskSpec, traj: Trajectory) -> Verdict:
        body = traj.steps[-1].action.raw if traj.steps else ""
        verdict, _ = evaluate_internal(
            body, self.problem, self.suite, self.sandbox, self.timeout_ms
        )
        return verdict


class NoSignalEvaluator:
    """Ablation evaluator: no tests, no early exit, every trial 'fails'."""

    def evaluate(self, task: TaskSpec, traj: Trajectory) -> Verdict:
        return Verdict.failure(detail="no internal test signal (test generation disabled)")


@dataclass(frozen=True)
class Submission:
    problem_id: str
    cell: OutcomeCell
    hidden_passed: bool
    outcomes: tuple[TestOutcome, ...]


class SubmissionLedger:
    """Enforces the one-shot hidden-test submission per task per run."""

    def __init__(self, sandbox: ProtocolSandbox, timeout_ms: int = DEFAULT_TEST_TIMEOUT_MS) -> None:
        self._sandbox = sandbox
        self._timeout_ms = timeout_ms
        self._lock = threading.Lock()
        self._submissions: dict[str, Submission] = {}

    def submit(
        self, final_body: str, problem: ProblemSpec, internal_passed: bool
    ) -> Submission:
        with self._lock:
            if problem.problem_id in self._submissions:
                raise DoubleSubmissionError(
                    f"problem {problem.problem_id!r} was already submitted"
                )
            # Reserve the slot before executing so a crash cannot allow a retry.
            self._submissions[problem.problem_id] = None  # type: ignore[assignment]
        outcomes = self._sandbox.execute(
            assemble_program(problem.signature, final_body),
            problem.hidden_tests,
            timeout_ms=self._timeout_ms,
        )
        hidden_passed = all_passed(outcomes)
        if internal_passed:
            cell = OutcomeCell.TP if hidden_passed else OutcomeCell.FP
        else:
            cell = OutcomeCell.FN if hidden_passed else OutcomeCell.TN
        submission = Submission(
            problem_id=problem.problem_id,
            cell=cell,
            hidden_passed=hidden_passed,
            outcomes=tuple(outcomes),
        )
        with self._lock:
            self._submissions[problem.problem_id] = submission
        return submission

    @property
    def submissions(self) -> dict[str, Submission]:
        with self._lock:
            return dict(self._submissions)

    def cells(self) -> list[OutcomeCell]:
        with self._lock:
            return [s.cell for s in self._submissions.values() if s is not None]


def confusion_report(outcomes: Sequence[OutcomeCell]) -> dict:
    """Counts and rates over joint internal/hidden outcomes.

    pass@1 counts the hidden-suite passes, (TP + FN) / total. The internal
    false-positive rate is FP / (TP + FP): how often a fully-green internal
    suite still hid a wrong solution.
    """
    if not outcomes:
        raise ValueError("confusion_report needs at least one outcome")
    counts = {cell.value: 0 for cell in OutcomeCell}
    for cell in outcomes:
        counts[cell.value] += 1
    total = len(outcomes)
    internal_passes = counts["TP"] + counts["FP"]
    return {
        "counts": counts,
        "total": total,
        "pass_at_1": (counts["TP"] + counts["FN"]) / total,
        "fp_internal_rate": (counts["FP"] / internal_passes) if internal_passes else 0.0,
        "frequencies": {cell: counts[cell] / total for cell in counts},
    }
