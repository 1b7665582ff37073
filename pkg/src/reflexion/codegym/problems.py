"""Problem registry for the programming gym.

A problem directory holds one subdirectory per problem:

    problems/
      min_sub_array_sum/
        metadata.json      {"problem_id": "...", "language_tag": "python"}
        signature.py       function signature line(s)
        description.txt    docstring-style problem statement
        hidden_tests.txt   one test statement per line, never shown to models
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from ..core import TaskKind, TaskSpec


@dataclass(frozen=True)
class ProblemSpec:
    problem_id: str
    signature: str
    description: str
    hidden_tests: tuple[str, ...]
    language_tag: str = "python"

    def __post_init__(self) -> None:
        object.__setattr__(self, "hidden_tests", tuple(self.hidden_tests))
        if not self.hidden_tests:
            raise ValueError(f"problem {self.problem_id!r} must carry hidden tests")


def load_problems(root: str | Path) -> list[ProblemSpec]:
    root = Path(root)
    problems = []
    for directory in sorted(p for p in root.iterdir() if p.is_dir()):
        metadata = json.loads((directory / "metadata.json").read_text(encoding="utf-8"))
        hidden = [
            line.strip()
            for line in (directory / "hidden_tests.txt").read_text(encoding="utf-8").splitlines()
            if line.strip()
        ]
        problems.append(
            ProblemSpec(
                problem_id=metadata["problem_id"],
                signature=(directory / "signature.py").read_text(encoding="utf-8").rstrip(),
                description=(directory / "description.txt").read_text(encoding="utf-8").strip(),
                hidden_tests=tuple(hidden),
                language_tag=metadata.get("language_tag", "python"),
            )
        )
    if not problems:
        raise ValueError(f"no problems found under {root}")
    return problems


def problem_to_task(problem: ProblemSpec) -> TaskSpec:
    return TaskSpec(
        task_id=problem.problem_id,
        kind=TaskKind.PROGRAMMING,
        statement=problem.description,
    )
