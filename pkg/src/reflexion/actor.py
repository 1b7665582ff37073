"""Prompt assembly and the two generation strategies.

The actor turns (few-shot examples, episodic memory, task, running
trajectory) into completion requests, parses actions out of model output,
and drives one episode against an environment. Two strategies: a single-pass
chain-of-thought generation and an interleaved think/act tool loop.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .core import Action, EpisodicMemory, Step, TaskSpec, Trajectory, memory_render
from .environments.base import NOTHING_HAPPENS, Environment
from .gateway import CompletionRequest, Message, Provider

ELISION_MARKER = "..."
DEFAULT_CHAR_BUDGET = 24_000

DEFAULT_LAYOUT = "{few_shot}\n\n{memory}\n\n{task}\n\n{trajectory}"

_PLACEHOLDER_ORDER = ("few_shot", "memory", "task", "trajectory")

# "Action 3: Search[Gorden Kaye]" or a bare "Finish[novelist]"; the whole
# line must be the action, trailing junk on the line rejects it.
_ACTION_LINE = re.compile(r"^\s*(?:Action\s*\d*\s*:\s*)?([A-Za-z_][A-Za-z0-9_]*)\[(.*)\]\s*$")
_THOUGHT_PREFIX = re.compile(r"^\s*Thought\s*\d*\s*:\s*", re.IGNORECASE)


class Strategy(str, enum.Enum):
    COT = "cot"
    REACT = "react"


class ActionGrammar(str, enum.Enum):
    """How model output maps to actions.

    BRACKETED expects ``Tool[argument]`` lines (question answering);
    PLAIN takes the first output line verbatim as a command (household
    environments, where "think: ..." is itself a no-op command).
    """

    BRACKETED = "bracketed"
    PLAIN = "plain"


class TemplateError(ValueError):
    pass


class UnparseableActionError(ValueError):
    """Model output contained no recognizable action line."""

    def __init__(self, raw_output: str) -> None:
        super().__init__(f"no action found in output: {raw_output[:120]!r}")
        self.raw_output = raw_output


@dataclass(frozen=True)
class PromptTemplate:
    """Prompt skeleton; rendering order is fixed: preamble, few-shot
    examples, memory block, task, trajectory-so-far."""

    system_preamble: str
    few_shot_examples: tuple[str, ...] = ()
    memory_header: str = "You have attempted this task before. Reflections from past trials:"
    task_header: str = "Task:"
    layout: str = DEFAULT_LAYOUT

    def __post_init__(self) -> None:
        object.__setattr__(self, "few_shot_examples", tuple(self.few_shot_examples))
        _validate_layout(self.layout)

    @classmethod
    def from_files(
        cls,
        layout_path: str | Path,
        few_shot_path: str | Path | None = None,
        system_preamble: str = "",
        memory_header: str | None = None,
        task_header: str | None = None,
    ) -> "PromptTemplate":
        """Load the layout (and optionally few-shot blocks) from plain text.

        The layout file must contain the named placeholders {memory}, {task}
        and {trajectory}; {few_shot} is optional and defaults to the front.
        Few-shot files hold blocks separated by a line of three dashes.
        """
        layout = Path(layout_path).read_text(encoding="utf-8").strip("\n")
        if "{few_shot}" not in layout:
            layout = "{few_shot}\n\n" + layout
        examples: tuple[str, ...] = ()
        if few_shot_path is not None:
            raw = Path(few_shot_path).read_text(encoding="utf-8")
            examples = tuple(b.strip() for b in re.split(r"\n---\n", raw) if b.strip())
        kwargs = {}
        if memory_header is not None:
            kwargs["memory_header"] = memory_header
        if task_header is not None:
            kwargs["task_header"] = task_header
        return cls(
            system_preamble=system_preamble,
            few_shot_examples=examples,
            layout=layout,
            **kwargs,
        )


def _validate_layout(layout: str) -> None:
    positions = []
    for name in _PLACEHOLDER_ORDER:
        token = "{" + name + "}"
        if name != "few_shot" and token not in layout:
            raise TemplateError(f"layout is missing the {token} placeholder")
        if layout.count(token) > 1:
            raise TemplateError(f"layout repeats the {token} placeholder")
        if token in layout:
            positions.append(layout.index(token))
    if positions != sorted(positions):
        raise TemplateError(
            "placeholders must keep the order few_shot, memory, task, trajectory"
        )


@dataclass(frozen=True)
class ActorConfig:
    strategy: Strategy = Strategy.REACT
    max_steps: int = 20
    few_shot_count: Optional[int] = None
    grammar: ActionGrammar = ActionGrammar.BRACKETED
    char_budget: int = DEFAULT_CHAR_BUDGET
    temperature: float = 0.0
    max_tokens: int = 512
    stop: tuple[str, ...] = ("\nObservation",)

    def __post_init__(self) -> None:
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")
        if self.few_shot_count is not None and self.few_shot_count < 0:
            raise ValueError("few_shot_count must be non-negative")
        object.__setattr__(self, "stop", tuple(self.stop))


def render_trajectory(traj: Trajectory, grammar: ActionGrammar = ActionGrammar.BRACKETED) -> str:
    """Serialize steps for prompt inclusion.

    Bracketed grammar emits numbered Thought/Action/Observation lines; plain
    grammar emits "> command" lines followed by the raw observation.
    """
    lines: list[str] = []
    for i, step in enumerate(traj.steps, start=1):
        if grammar is ActionGrammar.BRACKETED:
            if step.thought:
                lines.append(f"Thought {i}: {step.thought}")
            lines.append(f"Action {i}: {step.action.raw}")
            if step.observation:
                lines.append(f"Observation {i}: {step.observation}")
        else:
            lines.append(f"> {step.action.raw}")
            if step.observation:
                lines.append(step.observation)
    return "\n".join(lines)


def _render_task_block(task: TaskSpec, task_header: str, intro: str) -> str:
    parts = []
    if intro:
        parts.append(intro)
    if task.ground_truth_context:
        parts.append(f"Context: {task.ground_truth_context}")
    parts.append(f"{task_header} {task.statement}")
    return "\n".join(parts)


def build_prompt(
    template: PromptTemplate,
    task: TaskSpec,
    mem: EpisodicMemory,
    traj: Trajectory,
    *,
    intro: str = "",
    grammar: ActionGrammar = ActionGrammar.BRACKETED,
    few_shot_count: Optional[int] = None,
    char_budget: int = DEFAULT_CHAR_BUDGET,
    temperature: float = 0.0,
    max_tokens: int = 512,
    stop: tuple[str, ...] = (),
) -> CompletionRequest:
    """Assemble the completion request for the next generation.

    The memory block appears iff the memory is non-empty. If the rendered
    prompt exceeds ``char_budget``, the oldest trajectory steps are elided
    behind an ellipsis marker; memory entries are never dropped.
    """
    examples = template.few_shot_examples
    if few_shot_count is not None:
        examples = examples[:few_shot_count]
    few_shot_block = "\n\n".join(examples)

    memory_block = ""
    if len(mem) > 0:
        memory_block = f"{template.memory_header}\n{memory_render(mem)}"

    task_block = _render_task_block(task, template.task_header, intro)

    def render(steps_dropped: int) -> str:
        kept = Trajectory(
            task_id=traj.task_id, steps=traj.steps[steps_dropped:], truncated=traj.truncated
        )
        traj_block = render_trajectory(kept, grammar)
        if steps_dropped > 0:
            traj_block = f"{ELISION_MARKER}\n{traj_block}" if traj_block else ELISION_MARKER
        body = template.layout.format(
            few_shot=few_shot_block,
            memory=memory_block,
            task=task_block,
            trajectory=traj_block,
        )
        return re.sub(r"\n{3,}", "\n\n", body).strip()

    dropped = 0
    body = render(dropped)
    while (
        len(body) + len(template.system_preamble) > char_budget
        and dropped < len(traj.steps)
    ):
        dropped += 1
        body = render(dropped)

    messages = []
    if template.system_preamble:
        messages.append(Message("system", template.system_preamble))
    messages.append(Message("user", body))
    return CompletionRequest(
        messages=tuple(messages),
        temperature=temperature,
        max_tokens=max_tokens,
        stop=tuple(stop),
    )


def parse_action(model_output: str) -> Action:
    """Extract the first ``Tool[argument]`` action line from model output.

    Accepts both "Action <k>: Tool[arg]" and a bare "Tool[arg]" line; text
    after the action line is discarded. Raises UnparseableActionError when
    no such line exists.
    """
    for line in model_output.splitlines():
        match = _ACTION_LINE.match(line)
        if match:
            return Action.from_tool(match.group(1), match.group(2))
    raise UnparseableActionError(model_output)


def _parse_turn(model_output: str, grammar: ActionGrammar) -> tuple[Optional[str], Action]:
    """Split one completion into (thought, action) per the grammar."""
    if grammar is ActionGrammar.PLAIN:
        for line in model_output.splitlines():
            line = line.strip()
            if line.startswith(">"):
                line = line[1:].strip()
            if line:
                return None, Action.plain(line)
        raise UnparseableActionError(model_output)

    lines = model_output.splitlines()
    for idx, line in enumerate(lines):
        if _ACTION_LINE.match(line):
            action = parse_action(line)
            thought_lines = []
            for prior in lines[:idx]:
                cleaned = _THOUGHT_PREFIX.sub("", prior).strip()
                if cleaned:
                    thought_lines.append(cleaned)
            thought = " ".join(thought_lines) or None
            return thought, action
    raise UnparseableActionError(model_output)


class Actor:
    """Generation policy: one provider, one template, one strategy.

    An actor instance runs one episode at a time; run distinct episodes on
    distinct instances when parallelizing (they may share a provider).
    """

    def __init__(self, provider: Provider, template: PromptTemplate, config: ActorConfig) -> None:
        self.provider = provider
        self.template = template
        self.config = config

    def build_request(
        self, task: TaskSpec, mem: EpisodicMemory, traj: Trajectory, intro: str = ""
    ) -> CompletionRequest:
        cfg = self.config
        return build_prompt(
            self.template,
            task,
            mem,
            traj,
            intro=intro,
            grammar=cfg.grammar,
            few_shot_count=cfg.few_shot_count,
            char_budget=cfg.char_budget,
            temperature=cfg.temperature,
            max_tokens=cfg.max_tokens,
            stop=cfg.stop,
        )

    def run_episode(self, env: Optional[Environment], task: TaskSpec, mem: EpisodicMemory) -> Trajectory:
        """Play one trial and return its trajectory.

        CoT issues a single completion whose action is graded by the
        environment; ReAct loops (complete, parse, step) until the
        environment terminates or the step cap fires, which sets the
        truncated flag.
        """
        if env is None:
            raise ValueError("these strategies need an environment")
        env.reset(task.task_id)
        intro = env.prompt_intro()
        traj = Trajectory(task_id=task.task_id)

        if self.config.strategy is Strategy.COT:
            traj, _ = self._one_turn(env, task, mem, traj, intro)
            return traj

        for _ in range(self.config.max_steps):
            traj, done = self._one_turn(env, task, mem, traj, intro)
            if done:
                return traj
        return Trajectory(task_id=traj.task_id, steps=traj.steps, truncated=True)

    def _one_turn(
        self,
        env: Environment,
        task: TaskSpec,
        mem: EpisodicMemory,
        traj: Trajectory,
        intro: str,
    ) -> tuple[Trajectory, bool]:
        request = self.build_request(task, mem, traj, intro)
        response = self.provider.complete(request)
        try:
            thought, action = _parse_turn(response.content, self.config.grammar)
        except UnparseableActionError:
            # Invalid output is a wasted step, not an abort.
            raw = response.content.strip() or "(empty completion)"
            step = Step(action=Action.plain(raw), observation=NOTHING_HAPPENS)
            return traj.with_step(step), False
        obs = env.step(action)
        step = Step(action=action, observation=obs.text, thought=thought)
        return traj.with_step(step), obs.done
