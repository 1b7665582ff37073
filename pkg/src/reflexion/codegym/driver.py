"""Wires the programming gym into the trial loop.

Per problem: generate the internal suite (unless ablated), loop
trial/evaluate/reflect until the suite passes or the budget runs out, then
submit the final body against the hidden tests exactly once.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

from ..core import TaskSpec
from ..gateway import Provider
from ..loop import LoopConfig, SuiteComponents, TaskResult, run_suite_results
from ..reflector import Reflector, ReflectorMode
from ..sandbox import ProtocolSandbox
from .actor import ProgramActor
from .gym import NoSignalEvaluator, SubmissionLedger, SuiteEvaluator, confusion_report
from .problems import ProblemSpec, problem_to_task
from .suite import EmptySuiteError, generate_test_suite

logger = logging.getLogger(__name__)


class Ablation(str, enum.Enum):
    """Which part of the composite approach is switched off."""

    NONE = "none"
    NO_TEST_GEN = "no-test-gen"
    NO_SELF_REFLECTION = "no-self-reflection"
    BASE = "base"  # single attempt, no tests, no reflection

    @property
    def mode_label(self) -> str:
        return {
            Ablation.NONE: "reflexion",
            Ablation.NO_TEST_GEN: "test generation omission",
            Ablation.NO_SELF_REFLECTION: "self-reflection omission",
            Ablation.BASE: "base model",
        }[self]


@dataclass
class ProgrammingRun:
    results: list[TaskResult]
    confusion: dict
    ledger: SubmissionLedger
    skipped_suite_generation: list[str] = field(default_factory=list)


def run_programming_suite(
    problems: Sequence[ProblemSpec],
    actor_provider: Provider,
    testgen_provider: Provider,
    reflection_provider: Optional[Provider],
    sandbox: ProtocolSandbox,
    cfg: LoopConfig,
    ablation: Ablation = Ablation.NONE,
    reflection_few_shot: tuple[str, ...] = (),
    parallelism: int = 1,
) -> ProgrammingRun:
    if ablation is Ablation.BASE:
        cfg = LoopConfig(max_trials=1, consecutive_fail_stop=None, omega=cfg.omega)
    use_tests = ablation not in (Ablation.NO_TEST_GEN, Ablation.BASE)
    use_reflection = ablation not in (Ablation.NO_SELF_REFLECTION, Ablation.BASE)

    by_id = {p.problem_id: p for p in problems}
    tasks = [problem_to_task(p) for p in problems]
    ledger = SubmissionLedger(sandbox)
    skipped: list[str] = []

    def make_actor(task: TaskSpec) -> ProgramActor:
        return ProgramActor(
            actor_provider, by_id[task.task_id], show_test_feedback=use_tests
        )

    def make_evaluator(task: TaskSpec):
        if not use_tests:
            return NoSignalEvaluator()
        problem = by_id[task.task_id]
        try:
            suite = generate_test_suite(testgen_provider, problem, sandbox)
        except EmptySuiteError:
            # Degrade to the no-test-gen behavior for this task only.
            logger.warning("no valid tests for %s; running without internal suite", task.task_id)
            skipped.append(task.task_id)
            return NoSignalEvaluator()
        return SuiteEvaluator(problem, suite, sandbox)

    def make_reflector(task: TaskSpec) -> Reflector:
        if not use_reflection:
            return Reflector(mode=ReflectorMode.NONE)
        if reflection_provider is None:
            raise ValueError("self-reflection requires a reflection provider")
        return Reflector(
            mode=ReflectorMode.SELF_REFLECTION,
            provider=reflection_provider,
            few_shot=reflection_few_shot,
        )

    def on_task_done(task: TaskSpec, result: TaskResult) -> None:
        if not result.records:
            logger.warning("task %s produced no trials; skipping submission", task.task_id)
            return
        last = result.records[-1]
        body = last.trajectory.steps[-1].action.raw if last.trajectory.steps else ""
        internal_passed = result.solved if use_tests else False
        ledger.submit(body, by_id[task.task_id], internal_passed=internal_passed)

    components = SuiteComponents(
        make_actor=make_actor,
        make_evaluator=make_evaluator,
        make_reflector=make_reflector,
        on_task_done=on_task_done,
    )
    results = run_suite_results(tasks, components, cfg, parallelism=parallelism)
    confusion = confusion_report(ledger.cells()) if ledger.cells() else {}
    return ProgrammingRun(
        results=results,
        confusion=confusion,
        ledger=ledger,
        skipped_suite_generation=skipped,
    )
