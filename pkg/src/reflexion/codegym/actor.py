"""Function-body generation for the programming gym.

Each trial is one completion. The prompt threads, in order: instruction,
few-shot examples, the target signature and description, long-term memory
(reflections), the previous implementation, and its unit-test feedback;
the model answers with an improved function body only.
"""

from __future__ import annotations

import re
from typing import Optional

from ..core import Action, EpisodicMemory, Step, TaskSpec, Trajectory, Verdict, memory_render
from ..environments.base import Environment
from ..gateway import CompletionRequest, Message, Provider
from .problems import ProblemSpec

_INSTRUCTION = (
    "You are a Python writing assistant. Respond only with the body of the "
    "requested function, indented with 4 spaces so it fits under the given "
    "signature. Do not repeat the signature. When previous attempts and "
    "unit test results are shown, fix the implementation accordingly."
)

_FENCED = re.compile(r"```[a-zA-Z]*\n(.*?)```", re.DOTALL)


def extract_body(output: str) -> str:
    """Strip code fences and any echoed signature line from model output."""
    match = _FENCED.search(output)
    if match:
        output = match.group(1)
    lines = output.splitlines()
    while lines and not lines[0].strip():
        lines.pop(0)
    if lines and lines[0].lstrip().startswith("def "):
        lines.pop(0)
    return "\n".join(lines).rstrip()


class ProgramActor:
    """Stateful per-task actor; build a fresh one for every problem."""

    def __init__(
        self,
        provider: Provider,
        problem: ProblemSpec,
        few_shot: tuple[str, ...] = (),
        show_test_feedback: bool = True,
        temperature: float = 0.0,
        max_tokens: int = 768,
    ) -> None:
        self.provider = provider
        self.problem = problem
        self.few_shot = tuple(few_shot)
        self.show_test_feedback = show_test_feedback
        self.temperature = temperature
        self.max_tokens = max_tokens
        self._previous_body: Optional[str] = None
        self._previous_feedback: Optional[str] = None

    def build_request(self, mem: EpisodicMemory) -> CompletionRequest:
        parts = []
        if self.few_shot:
            parts.append("\n\n".join(self.few_shot))
        parts.append(
            f"Implement the body of this function:\n{self.problem.signature}\n"
            f'    """{self.problem.description}"""'
        )
        if len(mem) > 0:
            parts.append(f"Your reflections on previous attempts:\n{memory_render(mem)}")
        if self._previous_body is not None:
            parts.append(f"Your previous implementation:\n{self._previous_body}")
        if self.show_test_feedback and self._previous_feedback is not None:
            parts.append(f"Unit test results:\n{self._previous_feedback}")
        parts.append("Respond with the improved function body only.")
        return CompletionRequest(
            messages=(Message("system", _INSTRUCTION), Message("user", "\n\n".join(parts))),
            temperature=self.temperature,
            max_tokens=self.max_tokens,
        )

    def run_episode(
        self, env: Optional[Environment], task: TaskSpec, mem: EpisodicMemory
    ) -> Trajectory:
        request = self.build_request(mem)
        output = self.provider.complete(request).content
        body = extract_body(output) or "    pass"
        step = Step(action=Action.plain(body), observation="")
        return Trajectory(task_id=task.task_id, steps=(step,))

    def observe_verdict(self, traj: Trajectory, verdict: Verdict) -> None:
        if traj.steps:
            self._previous_body = traj.steps[-1].action.raw
        if self.show_test_feedback:
            self._previous_feedback = verdict.detail or None
