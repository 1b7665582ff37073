"""Verdict producers: exact match, behavior heuristic, LLM judge.

The pure grading functions live at module level; thin classes adapt them to
the uniform ``evaluate(task, trajectory) -> Verdict`` surface the trial loop
consumes. The code-gym's unit-test evaluator lives with the gym.
"""

from __future__ import annotations

import re
import string
from dataclasses import dataclass

from .actor import render_trajectory
from .core import FailureTag, TaskSpec, Trajectory, Verdict
from .environments.base import SUCCESS_MARKER
from .gateway import CompletionRequest, Message, Provider

_ARTICLES = ("a", "an", "the")
_PUNCT_TABLE = str.maketrans("", "", string.punctuation)


def normalize_answer(text: str) -> str:
    """Open-domain answer normalization: lowercase, strip punctuation,
    collapse whitespace, drop leading articles. Idempotent."""
    text = text.lower().translate(_PUNCT_TABLE)
    tokens = text.split()
    while tokens and tokens[0] in _ARTICLES:
        tokens = tokens[1:]
    return " ".join(tokens)


def exact_match(answer: str, gold: str) -> Verdict:
    """Binary grading by normalized string equality."""
    if not gold:
        raise ValueError("gold answer must be non-empty")
    if normalize_answer(answer) == normalize_answer(gold):
        return Verdict.success(detail=f"answer {answer!r} matches")
    return Verdict.failure(
        tag=FailureTag.WRONG_ANSWER,
        detail=f"answer {answer!r} does not match expected {gold!r}",
    )


@dataclass(frozen=True)
class HeuristicParams:
    repeat_cycle_limit: int = 3
    max_actions: int = 30
    success_marker: str = SUCCESS_MARKER

    def __post_init__(self) -> None:
        if self.repeat_cycle_limit < 1 or self.max_actions < 1:
            raise ValueError("heuristic thresholds must be at least 1")


def _longest_repeat_run(traj: Trajectory) -> int:
    longest, run, prev = 0, 0, None
    for step in traj.steps:
        key = (step.action.raw.strip(), step.observation.strip())
        run = run + 1 if key == prev else 1
        prev = key
        longest = max(longest, run)
    return longest


def heuristic_evaluate(traj: Trajectory, params: HeuristicParams = HeuristicParams()) -> Verdict:
    """Hand-written failure detector for decision episodes.

    A completed task passes outright. Otherwise: repeating one
    (action, observation) pair for more than ``repeat_cycle_limit``
    consecutive steps flags a hallucinated loop; exceeding ``max_actions``
    steps flags inefficient planning; the loop flag wins when both hold.
    """
    if traj.steps and traj.steps[-1].observation.rstrip().endswith(params.success_marker):
        return Verdict.success(detail="environment signaled completion")
    repeat_run = _longest_repeat_run(traj)
    if repeat_run > params.repeat_cycle_limit:
        return Verdict.failure(
            tag=FailureTag.HALLUCINATION,
            detail=f"same action and response for {repeat_run} consecutive steps",
        )
    if len(traj.steps) > params.max_actions:
        return Verdict.failure(
            tag=FailureTag.INEFFICIENT_PLANNING,
            detail=f"{len(traj.steps)} actions without completing the task",
        )
    return Verdict.failure(detail="task not completed")


_JUDGE_PREAMBLE = (
    "You are grading an agent's attempt at a task. Read the task and the "
    "trajectory, then answer with the single token PASS if the attempt "
    "solved the task, or FAIL if it did not."
)
_PASS_FAIL = re.compile(r"\b(pass|fail)\b", re.IGNORECASE)


def llm_binary_evaluate(provider: Provider, task: TaskSpec, traj: Trajectory) -> Verdict:
    """Ask a model for a PASS/FAIL call on the trajectory.

    Parsing is case-insensitive and the first occurrence of either token
    wins; output with neither token is a conservative failure.
    """
    body = (
        f"Task: {task.statement}\n\n"
        f"Trajectory:\n{render_trajectory(traj)}\n\n"
        "Answer PASS or FAIL."
    )
    request = CompletionRequest(
        messages=(Message("system", _JUDGE_PREAMBLE), Message("user", body)),
        temperature=0.0,
        max_tokens=8,
    )
    output = provider.complete(request).content
    match = _PASS_FAIL.search(output)
    if match is None:
        return Verdict.failure(
            tag=FailureTag.EVALUATOR_UNPARSEABLE,
            detail=f"judge output had no PASS/FAIL token: {output[:120]!r}",
        )
    if match.group(1).lower() == "pass":
        return Verdict.success(detail=output.strip())
    return Verdict.failure(detail=output.strip())


class ExactMatchEvaluator:
    """Grades the final Finish answer against the task's gold answer."""

    def evaluate(self, task: TaskSpec, traj: Trajectory) -> Verdict:
        if not task.gold_answer:
            raise ValueError(f"task {task.task_id} has no gold answer to grade against")
        answer = traj.final_answer()
        if answer is None:
            return Verdict.failure(
                tag=FailureTag.WRONG_ANSWER, detail="no final answer was produced"
            )
        return exact_match(answer, task.gold_answer)


class HeuristicEvaluator:
    def __init__(self, params: HeuristicParams = HeuristicParams()) -> None:
        self.params = params

    def evaluate(self, task: TaskSpec, traj: Trajectory) -> Verdict:
        return heuristic_evaluate(traj, self.params)


class LlmJudgeEvaluator:
    def __init__(self, provider: Provider) -> None:
        self.provider = provider

    def evaluate(self, task: TaskSpec, traj: Trajectory) -> Verdict:
        return llm_binary_evaluate(self.provider, task, traj)
