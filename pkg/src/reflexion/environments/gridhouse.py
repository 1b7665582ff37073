"""Deterministic text household environment.

A world is a fixed set of named locations (surfaces and openable
containers) holding items, an agent with an inventory, and a goal
predicate. Commands mirror the household verb set: go to / open / take X
from Y / put X in|on Y / use X / examine X / think. Invalid or
inapplicable commands answer "Nothing happens." and leave the state
untouched; the environment only ever signals completion, never failure.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import yaml

from ..core import Action, TaskKind, TaskSpec
from .base import (
    NOTHING_HAPPENS,
    SUCCESS_MARKER,
    DoneEnvironmentError,
    EnvObservation,
    EnvironmentError_,
)


@dataclass(frozen=True)
class GoalSpec:
    kind: str  # examine_under_lamp | move_to | retrieve
    item: str
    target: Optional[str] = None  # lamp or destination, by kind


@dataclass(frozen=True)
class GridHouseTask:
    task_id: str
    statement: str
    locations: tuple[tuple[str, tuple[str, ...], bool], ...]  # (name, items, openable)
    goal: GoalSpec


@dataclass
class _Location:
    name: str
    items: list[str]
    openable: bool
    is_open: bool


_TAKE = re.compile(r"^take (.+) from (.+)$")
_PUT = re.compile(r"^put (.+) (in|on) (.+)$")


class GridHouse:
    """One environment instance; create one per concurrent episode."""

    def __init__(self, tasks: dict[str, GridHouseTask]) -> None:
        self._tasks = dict(tasks)
        self._task: Optional[GridHouseTask] = None
        self._locations: dict[str, _Location] = {}
        self._agent_at: Optional[str] = None
        self._inventory: list[str] = []
        self._done = False
        self._intro = ""

    def reset(self, task_id: str) -> EnvObservation:
        if task_id not in self._tasks:
            raise EnvironmentError_(f"unknown task id {task_id!r}")
        task = self._tasks[task_id]
        self._task = task
        self._locations = {
            name: _Location(name=name, items=list(items), openable=openable, is_open=False)
            for name, items, openable in task.locations
        }
        self._agent_at = None
        self._inventory = []
        self._done = False
        names = [loc for loc, _, _ in task.locations]
        listing = _join_listing([f"a {n}" for n in names])
        self._intro = (
            "You are in the middle of a room. Looking quickly around you, "
            f"you see {listing}.\nYour task is to: {task.statement}"
        )
        return EnvObservation(text=self._intro)

    def prompt_intro(self) -> str:
        return self._intro

    def step(self, action: Action) -> EnvObservation:
        if self._task is None:
            raise EnvironmentError_("reset the environment before stepping")
        if self._done:
            raise DoneEnvironmentError("episode already finished")
        command = action.raw.strip()
        text, success = self._apply(command)
        if success:
            self._done = True
            return EnvObservation(text=f"{text}\n{SUCCESS_MARKER}", done=True, success=True)
        return EnvObservation(text=text)

    # Command dispatch. Every branch either mutates state and answers, or
    # returns NOTHING_HAPPENS leaving the world untouched.
    def _apply(self, command: str) -> tuple[str, bool]:
        if command.startswith("think"):
            return "OK.", False
        if command.startswith("go to "):
            return self._go_to(command[len("go to "):].strip()), False
        if command.startswith("open "):
            return self._open(command[len("open "):].strip()), False
        match = _TAKE.match(command)
        if match:
            return self._take(match.group(1).strip(), match.group(2).strip())
        match = _PUT.match(command)
        if match:
            return self._put(match.group(1).strip(), match.group(2), match.group(3).strip())
        if command.startswith("use "):
            return self._use(command[len("use "):].strip())
        if command.startswith("examine "):
            return self._examine(command[len("examine "):].strip()), False
        return NOTHING_HAPPENS, False

    def _go_to(self, name: str) -> str:
        loc = self._locations.get(name)
        if loc is None or self._agent_at == name:
            return NOTHING_HAPPENS
        self._agent_at = name
        return self._look(loc)

    def _look(self, loc: _Location) -> str:
        if loc.openable and not loc.is_open:
            return f"The {loc.name} is closed."
        if loc.openable:
            if not loc.items:
                return f"The {loc.name} is open. In it, you see nothing."
            return f"The {loc.name} is open. In it, you see {_join_listing([f'a {i}' for i in loc.items])}."
        if not loc.items:
            return f"On the {loc.name}, you see nothing."
        return f"On the {loc.name}, you see {_join_listing([f'a {i}' for i in loc.items])}."

    def _open(self, name: str) -> str:
        loc = self._locations.get(name)
        if loc is None or self._agent_at != name or not loc.openable or loc.is_open:
            return NOTHING_HAPPENS
        loc.is_open = True
        if not loc.items:
            return f"You open the {name}. The {name} is open. In it, you see nothing."
        listing = _join_listing([f"a {i}" for i in loc.items])
        return f"You open the {name}. The {name} is open. In it, you see {listing}."

    def _visible_items(self, loc: _Location) -> list[str]:
        if loc.openable and not loc.is_open:
            return []
        return loc.items

    def _take(self, item: str, source: str) -> tuple[str, bool]:
        loc = self._locations.get(source)
        if loc is None or self._agent_at != source or item not in self._visible_items(loc):
            return NOTHING_HAPPENS, False
        loc.items.remove(item)
        self._inventory.append(item)
        text = f"You pick up the {item} from the {source}."
        goal = self._task.goal
        success = goal.kind == "retrieve" and goal.item == item
        return text, success

    def _put(self, item: str, preposition: str, dest: str) -> tuple[str, bool]:
        loc = self._locations.get(dest)
        if loc is None or self._agent_at != dest or item not in self._inventory:
            return NOTHING_HAPPENS, False
        if loc.openable and not loc.is_open:
            return NOTHING_HAPPENS, False
        self._inventory.remove(item)
        loc.items.append(item)
        text = f"You put the {item} {preposition} the {dest}."
        goal = self._task.goal
        success = goal.kind == "move_to" and goal.item == item and goal.target == dest
        return text, success

    def _use(self, item: str) -> tuple[str, bool]:
        at = self._locations.get(self._agent_at) if self._agent_at else None
        if at is None or item not in self._visible_items(at):
            return NOTHING_HAPPENS, False
        text = f"You turn on the {item}."
        goal = self._task.goal
        success = (
            goal.kind == "examine_under_lamp"
            and goal.target == item
            and goal.item in self._inventory
        )
        return text, success

    def _examine(self, item: str) -> str:
        at = self._locations.get(self._agent_at) if self._agent_at else None
        visible = item in self._inventory or (at is not None and item in self._visible_items(at))
        if not visible:
            return NOTHING_HAPPENS
        return f"There's nothing special about the {item}."

    # Introspection used by property tests.
    def item_places(self) -> dict[str, str]:
        places = {item: "inventory" for item in self._inventory}
        for loc in self._locations.values():
            for item in loc.items:
                places[item] = loc.name
        return places


def _join_listing(parts: list[str]) -> str:
    if len(parts) == 1:
        return parts[0]
    return ", ".join(parts[:-1]) + f", and {parts[-1]}"


def parse_task_document(data: dict) -> GridHouseTask:
    locations = []
    for entry in data["locations"]:
        locations.append(
            (
                entry["name"],
                tuple(entry.get("items", ())),
                bool(entry.get("openable", False)),
            )
        )
    goal = data["goal"]
    return GridHouseTask(
        task_id=data["task_id"],
        statement=data["statement"],
        locations=tuple(locations),
        goal=GoalSpec(kind=goal["kind"], item=goal["item"], target=goal.get("target")),
    )


def load_gridhouse(path: str | Path) -> tuple[dict[str, GridHouseTask], list[TaskSpec]]:
    """Load task documents from a directory of YAML files (or one file)."""
    path = Path(path)
    files = sorted(path.glob("*.yaml")) if path.is_dir() else [path]
    tasks: dict[str, GridHouseTask] = {}
    specs: list[TaskSpec] = []
    for file in files:
        for doc in yaml.safe_load_all(file.read_text(encoding="utf-8")):
            if doc is None:
                continue
            task = parse_task_document(doc)
            if task.task_id in tasks:
                raise ValueError(f"duplicate task id {task.task_id!r}")
            tasks[task.task_id] = task
            specs.append(
                TaskSpec(task_id=task.task_id, kind=TaskKind.DECISION, statement=task.statement)
            )
    return tasks, specs
