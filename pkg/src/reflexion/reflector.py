"""Converts a failed trial into a verbal reflection for long-term memory.

Three strategies: full self-reflection through a model, the raw-trajectory
ablation (store the episode verbatim, no model call), and none (the
retry-only baseline, which appends nothing).
"""

from __future__ import annotations

import enum
from typing import Optional

from .actor import render_trajectory
from .core import (
    EpisodicMemory,
    Reflection,
    ReflectionKind,
    TaskSpec,
    Trajectory,
    Verdict,
    memory_render,
)
from .gateway import CompletionRequest, Message, Provider


class ReflectorMode(str, enum.Enum):
    SELF_REFLECTION = "self_reflection"
    EPISODIC_ONLY = "episodic_only"
    NONE = "none"


class ReflectionError(RuntimeError):
    pass


_REFLECT_PREAMBLE = (
    "You are reviewing a failed attempt at a task. Write a short first-person "
    "reflection: diagnose what went wrong and state what to do differently in "
    "the next attempt. Respond with the reflection text only."
)


def build_reflection_prompt(
    task: TaskSpec,
    traj: Trajectory,
    verdict: Verdict,
    mem: EpisodicMemory,
    few_shot: tuple[str, ...] = (),
    include_memory: bool = True,
) -> CompletionRequest:
    parts = []
    if few_shot:
        parts.append("\n\n".join(few_shot))
    if include_memory and len(mem) > 0:
        parts.append(f"Reflections from earlier trials:\n{memory_render(mem)}")
    parts.append(f"Task: {task.statement}")
    parts.append(f"Trajectory:\n{render_trajectory(traj)}")
    signal = "Status: Fail"
    if verdict.detail:
        signal += f"\nFailure signal: {verdict.detail}"
    parts.append(signal)
    parts.append("Reflection:")
    return CompletionRequest(
        messages=(Message("system", _REFLECT_PREAMBLE), Message("user", "\n\n".join(parts))),
        temperature=0.0,
        max_tokens=256,
    )


class Reflector:
    """Produces the reflection appended to memory after a failed trial.

    In NONE mode ``reflect`` returns None, which the trial loop reads as
    "append nothing". EPISODIC_ONLY stores the rendered trajectory verbatim
    and never calls the provider.
    """

    def __init__(
        self,
        mode: ReflectorMode = ReflectorMode.SELF_REFLECTION,
        provider: Optional[Provider] = None,
        few_shot: tuple[str, ...] = (),
        include_memory: bool = True,
    ) -> None:
        if mode is ReflectorMode.SELF_REFLECTION and provider is None:
            raise ValueError("self-reflection mode needs a provider")
        self.mode = mode
        self.provider = provider
        self.few_shot = tuple(few_shot)
        self.include_memory = include_memory

    def reflect(
        self,
        task: TaskSpec,
        traj: Trajectory,
        verdict: Verdict,
        mem: EpisodicMemory,
        trial_index: int,
    ) -> Optional[Reflection]:
        if verdict.passed:
            raise ValueError("reflection is only produced for failed trials")

        if self.mode is ReflectorMode.NONE:
            return None

        if self.mode is ReflectorMode.EPISODIC_ONLY:
            return Reflection(
                trial_index=trial_index,
                text=render_trajectory(traj),
                kind=ReflectionKind.EPISODIC_TRAJECTORY,
            )

        request = build_reflection_prompt(
            task, traj, verdict, mem, self.few_shot, self.include_memory
        )
        assert self.provider is not None
        text = self.provider.complete(request).content.strip()
        if not text:
            raise ReflectionError("reflection model returned empty output")
        return Reflection(trial_index=trial_index, text=text, kind=ReflectionKind.SELF_REFLECTION)
