"""The trial loop: attempt, evaluate, reflect, remember, retry.

One task runs as a strictly sequential chain of trials (later trials depend
on the memory written by earlier ones); a suite may run distinct tasks
concurrently since every task carries isolated state.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Protocol, Sequence

from .core import (
    EpisodicMemory,
    Reflection,
    TaskSpec,
    Trajectory,
    Verdict,
    memory_append,
)
from .environments.base import Environment
from .gateway import Provider
from .reflector import Reflector, ReflectorMode


class ActorLike(Protocol):
    def run_episode(
        self, env: Optional[Environment], task: TaskSpec, mem: EpisodicMemory
    ) -> Trajectory:
        ...


class EvaluatorLike(Protocol):
    def evaluate(self, task: TaskSpec, traj: Trajectory) -> Verdict:
        ...


@dataclass(frozen=True)
class LoopConfig:
    max_trials: int = 10
    consecutive_fail_stop: Optional[int] = None
    omega: int = 3

    def __post_init__(self) -> None:
        if self.max_trials < 1:
            raise ValueError("max_trials must be at least 1")
        if self.consecutive_fail_stop is not None and self.consecutive_fail_stop < 1:
            raise ValueError("consecutive_fail_stop must be at least 1")
        if self.omega < 1:
            raise ValueError("omega must be at least 1")


# Presets mirroring the three task families' loop settings.
DECISION_PRESET = LoopConfig(max_trials=12, consecutive_fail_stop=None, omega=3)
REASONING_PRESET = LoopConfig(max_trials=10, consecutive_fail_stop=3, omega=3)
PROGRAMMING_PRESET = LoopConfig(max_trials=4, consecutive_fail_stop=None, omega=1)


@dataclass(frozen=True)
class TrialRecord:
    trial_index: int
    trajectory: Trajectory
    verdict: Verdict
    reflection: Optional[Reflection] = None
    elapsed_s: float = 0.0
    provider_calls: int = 0


@dataclass(frozen=True)
class TaskResult:
    task_id: str
    records: tuple[TrialRecord, ...]
    solved: bool
    solved_at_trial: Optional[int] = None
    error: Optional[str] = None
    provider_calls: int = 0
    elapsed_s: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "records", tuple(self.records))
        if self.solved:
            if self.solved_at_trial is None or not self.records[self.solved_at_trial].verdict.passed:
                raise ValueError("solved results must point at a passing trial")


def _collect_providers(*components: object) -> list[Provider]:
    seen: dict[int, Provider] = {}
    for comp in components:
        provider = getattr(comp, "provider", None)
        if isinstance(provider, Provider):
            seen.setdefault(id(provider), provider)
    return list(seen.values())


def _thread_calls(providers: Sequence[Provider]) -> int:
    return sum(p.thread_calls for p in providers)


def run_task(
    task: TaskSpec,
    actor: ActorLike,
    evaluator: EvaluatorLike,
    reflector: Reflector,
    cfg: LoopConfig,
    *,
    env: Optional[Environment] = None,
    memory: Optional[EpisodicMemory] = None,
) -> TaskResult:
    """Run one task to success or budget exhaustion.

    Trial 0 runs with the caller-supplied memory (normally empty). After a
    failed trial that is not the last, the reflector runs and its output is
    appended to memory before the next trial; the environment is reset at
    the start of every episode. The loop exits on the first pass, at
    ``max_trials``, or after ``consecutive_fail_stop`` failures in a row.
    Component errors end the task early with the partial result and the
    error message.
    """
    mem = memory if memory is not None else EpisodicMemory(capacity=cfg.omega)
    providers = _collect_providers(actor, evaluator, reflector)
    records: list[TrialRecord] = []
    consecutive_fails = 0
    task_started = time.monotonic()
    calls_at_task_start = _thread_calls(providers)

    try:
        for trial in range(cfg.max_trials):
            started = time.monotonic()
            calls_before = _thread_calls(providers)
            traj = actor.run_episode(env, task, mem)
            verdict = evaluator.evaluate(task, traj)
            observe = getattr(actor, "observe_verdict", None)
            if observe is not None:
                observe(traj, verdict)

            if verdict.passed:
                consecutive_fails = 0
                is_last = True
            else:
                consecutive_fails += 1
                is_last = trial == cfg.max_trials - 1 or (
                    cfg.consecutive_fail_stop is not None
                    and consecutive_fails >= cfg.consecutive_fail_stop
                )

            reflection = None
            if not verdict.passed and not is_last and reflector.mode is not ReflectorMode.NONE:
                reflection = reflector.reflect(task, traj, verdict, mem, trial_index=trial)
                if reflection is not None:
                    mem = memory_append(mem, reflection)

            records.append(
                TrialRecord(
                    trial_index=trial,
                    trajectory=traj,
                    verdict=verdict,
                    reflection=reflection,
                    elapsed_s=time.monotonic() - started,
                    provider_calls=_thread_calls(providers) - calls_before,
                )
            )
            if is_last:
                break
    except Exception as exc:  # partial result; the suite keeps going
        return TaskResult(
            task_id=task.task_id,
            records=tuple(records),
            solved=False,
            error=f"{type(exc).__name__}: {exc}",
            provider_calls=_thread_calls(providers) - calls_at_task_start,
            elapsed_s=time.monotonic() - task_started,
        )

    solved_at = next((r.trial_index for r in records if r.verdict.passed), None)
    return TaskResult(
        task_id=task.task_id,
        records=tuple(records),
        solved=solved_at is not None,
        solved_at_trial=solved_at,
        provider_calls=_thread_calls(providers) - calls_at_task_start,
        elapsed_s=time.monotonic() - task_started,
    )


@dataclass
class SuiteComponents:
    """Per-task component factories plus an optional completion hook.

    Factories let stateful pieces (actors that thread implementation
    feedback, per-task test suites) be built fresh for every task; the
    hook runs after each task finishes (the code gym submits there).
    """

    make_actor: Callable[[TaskSpec], ActorLike]
    make_evaluator: Callable[[TaskSpec], EvaluatorLike]
    make_reflector: Callable[[TaskSpec], Reflector]
    make_env: Callable[[TaskSpec], Optional[Environment]] = lambda task: None
    on_task_done: Optional[Callable[[TaskSpec, TaskResult], None]] = None


def run_suite_results(
    tasks: Sequence[TaskSpec],
    components: SuiteComponents,
    cfg: LoopConfig,
    parallelism: int = 1,
) -> list[TaskResult]:
    """Execute every task and return results in task order.

    Per-task errors are captured in their TaskResult and never abort the
    suite. With ``parallelism`` above one, distinct tasks run on worker
    threads; each task still runs its trials sequentially.
    """
    if not tasks:
        raise ValueError("task list must be non-empty")

    def run_one(task: TaskSpec) -> TaskResult:
        try:
            actor = components.make_actor(task)
            evaluator = components.make_evaluator(task)
            reflector = components.make_reflector(task)
            env = components.make_env(task)
            result = run_task(task, actor, evaluator, reflector, cfg, env=env)
        except Exception as exc:
            result = TaskResult(
                task_id=task.task_id,
                records=(),
                solved=False,
                error=f"{type(exc).__name__}: {exc}",
            )
        if components.on_task_done is not None:
            components.on_task_done(task, result)
        return result

    if parallelism <= 1:
        return [run_one(task) for task in tasks]
    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        return list(pool.map(run_one, tasks))
