"""Environment contract shared by the desk-scale test environments."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, runtime_checkable

from ..core import Action

NOTHING_HAPPENS = "Nothing happens."
SUCCESS_MARKER = "Status: Success"


class EnvironmentError_(Exception):
    """Raised for usage errors: unknown task ids, stepping a done episode."""


class DoneEnvironmentError(EnvironmentError_):
    pass


@dataclass(frozen=True)
class EnvObservation:
    text: str
    done: bool = False
    success: bool = False

    def __post_init__(self) -> None:
        if self.success and not self.done:
            raise ValueError("success implies done")


@runtime_checkable
class Environment(Protocol):
    def reset(self, task_id: str) -> EnvObservation:
        ...

    def step(self, action: Action) -> EnvObservation:
        ...

    def prompt_intro(self) -> str:
        """Text shown above the task line in prompts; may be empty."""
        ...
