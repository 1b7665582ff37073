"""Shared domain types and the bounded episodic memory.

Everything here is an immutable value: operations return new objects, so
instances can be shared across threads without coordination.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Optional


class FailureTag(str, enum.Enum):
    """Why a trial failed. NONE doubles as "passed" and "unclassified failure"."""

    NONE = "none"
    HALLUCINATION = "hallucination"
    INEFFICIENT_PLANNING = "inefficient_planning"
    WRONG_ANSWER = "wrong_answer"
    TESTS_FAILED = "tests_failed"
    EVALUATOR_UNPARSEABLE = "evaluator_unparseable"


class TaskKind(str, enum.Enum):
    DECISION = "decision"
    REASONING = "reasoning"
    PROGRAMMING = "programming"


class ReflectionKind(str, enum.Enum):
    SELF_REFLECTION = "self_reflection"
    EPISODIC_TRAJECTORY = "episodic_trajectory"


@dataclass(frozen=True)
class Action:
    """One agent action, either a bare command line or a tool invocation.

    When ``tool`` is set, ``raw`` must reconstruct as ``tool[argument]``.
    """

    raw: str
    tool: Optional[str] = None
    argument: Optional[str] = None

    def __post_init__(self) -> None:
        if not self.raw:
            raise ValueError("action raw text must be non-empty")
        if self.tool is not None:
            if self.argument is None:
                raise ValueError("tool actions require an argument (may be empty text)")
            expected = f"{self.tool}[{self.argument}]"
            if self.raw != expected:
                raise ValueError(f"raw {self.raw!r} does not reconstruct as {expected!r}")

    @classmethod
    def from_tool(cls, tool: str, argument: str) -> "Action":
        return cls(raw=f"{tool}[{argument}]", tool=tool, argument=argument)

    @classmethod
    def plain(cls, raw: str) -> "Action":
        return cls(raw=raw)


@dataclass(frozen=True)
class Step:
    """One (thought, action, observation) unit of a trajectory."""

    action: Action
    observation: str
    thought: Optional[str] = None


@dataclass(frozen=True)
class Trajectory:
    """Ordered step record of one trial; the agent's short-term memory.

    ``truncated`` is set iff the episode was cut by a step or length cap.
    An empty observation is tolerated only on the terminal step.
    """

    task_id: str
    steps: tuple[Step, ...] = ()
    truncated: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "steps", tuple(self.steps))
        for step in self.steps[:-1]:
            if step.observation == "":
                raise ValueError("only the terminal step may have an empty observation")

    def with_step(self, step: Step) -> "Trajectory":
        return replace(self, steps=self.steps + (step,))

    def final_answer(self, finish_tool: str = "Finish") -> Optional[str]:
        """Argument of the last Finish-style action, if any."""
        for step in reversed(self.steps):
            if step.action.tool == finish_tool:
                return step.action.argument
        return None

    def __len__(self) -> int:
        return len(self.steps)


@dataclass(frozen=True)
class Verdict:
    """Evaluator output for one trajectory."""

    passed: bool
    score: float
    failure_tag: FailureTag = FailureTag.NONE
    detail: str = ""

    def __post_init__(self) -> None:
        if not 0.0 <= self.score <= 1.0:
            raise ValueError("score must lie in [0, 1]")
        if self.passed and self.failure_tag is not FailureTag.NONE:
            raise ValueError("a passing verdict cannot carry a failure tag")

    @classmethod
    def success(cls, detail: str = "") -> "Verdict":
        return cls(passed=True, score=1.0, detail=detail)

    @classmethod
    def failure(cls, tag: FailureTag = FailureTag.NONE, detail: str = "") -> "Verdict":
        return cls(passed=False, score=0.0, failure_tag=tag, detail=detail)


@dataclass(frozen=True)
class Reflection:
    """Verbal experience summary produced after a failed trial."""

    trial_index: int
    text: str
    kind: ReflectionKind = ReflectionKind.SELF_REFLECTION

    def __post_init__(self) -> None:
        if self.trial_index < 0:
            raise ValueError("trial_index must be non-negative")
        if not self.text.strip():
            raise ValueError("reflection text must be non-empty")


@dataclass(frozen=True)
class EpisodicMemory:
    """FIFO buffer of reflections bounded by ``capacity``; the long-term memory.

    Appending at capacity evicts exactly the oldest entry. Entries are kept
    oldest to newest.
    """

    capacity: int
    entries: tuple[Reflection, ...] = ()

    def __post_init__(self) -> None:
        if self.capacity < 1:
            raise ValueError("capacity must be a positive integer")
        object.__setattr__(self, "entries", tuple(self.entries))
        if len(self.entries) > self.capacity:
            raise ValueError("entries exceed capacity")

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class TaskSpec:
    """A single task instance handed to the trial loop."""

    task_id: str
    kind: TaskKind
    statement: str
    gold_answer: Optional[str] = None
    ground_truth_context: Optional[str] = None
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        if self.kind is TaskKind.REASONING and not self.gold_answer:
            raise ValueError("reasoning tasks require a gold_answer")
        if self.ground_truth_context is not None and self.kind is not TaskKind.REASONING:
            raise ValueError("ground_truth_context is only meaningful for reasoning tasks")


def memory_append(mem: EpisodicMemory, reflection: Reflection) -> EpisodicMemory:
    """Return a new memory with ``reflection`` as the newest entry.

    If the memory is full, the oldest entry is evicted.
    """
    if not reflection.text.strip():
        raise ValueError("cannot append an empty reflection")
    entries = mem.entries + (reflection,)
    if len(entries) > mem.capacity:
        entries = entries[len(entries) - mem.capacity:]
    return EpisodicMemory(capacity=mem.capacity, entries=entries)


DEFAULT_MEMORY_PREFIX = "Trial #{n} reflection:"


def memory_render(mem: EpisodicMemory, prefix_template: str = DEFAULT_MEMORY_PREFIX) -> str:
    """Serialize memory for prompt inclusion, oldest entry first.

    Each entry is prefixed with a header derived from its trial index
    (``{n}`` is the 1-based trial number). The empty memory renders to the
    empty string. Pure function: equal memory states render identically.
    """
    blocks = []
    for entry in mem.entries:
        header = prefix_template.format(n=entry.trial_index + 1)
        blocks.append(f"{header}\n{entry.text}")
    return "\n\n".join(blocks)
