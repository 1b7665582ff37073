"""Shared fixtures for the test suite: scripted episodes and tiny stubs.

The expected trajectories here were written out by hand from the recorded
episode scripts before the environments were built; tests compare live runs
against these frozen values.
"""

from __future__ import annotations

from pathlib import Path

from reflexion.core import (
    Action,
    EpisodicMemory,
    Step,
    TaskKind,
    TaskSpec,
    Trajectory,
    Verdict,
)
from reflexion.environments.base import EnvObservation
from reflexion.gateway import MockProvider

FIXTURES = Path(__file__).resolve().parents[1] / "src" / "reflexion" / "fixtures"

# ---------------------------------------------------------------------------
# Canonical two-trial fixture: the second trial can only succeed when the
# reflection text reaches the prompt, so retry-only baselines never solve it.
# ---------------------------------------------------------------------------

CANONICAL_TASK = TaskSpec(
    task_id="common_profession",
    kind=TaskKind.REASONING,
    statement="What profession does John Lanchester and Alan Dean Foster have in common?",
    gold_answer="novelist",
)

CANONICAL_REFLECTION = (
    "I listed two professions, but only the one both authors share should be "
    "the answer. Next time I should answer novelist alone."
)

WRONG_COMPLETION = (
    "Thought 1: Let's think step by step. Both write novels and screenplays.\n"
    "Action 1: Finish[novelist and screenwriter]"
)
RIGHT_COMPLETION = (
    "Thought 1: Let's think step by step. The shared profession is novelist.\n"
    "Action 1: Finish[novelist]"
)


def canonical_actor_provider() -> MockProvider:
    return MockProvider.from_pairs(
        [
            ("answer novelist alone", RIGHT_COMPLETION),
            (r"(?s).", WRONG_COMPLETION),
        ]
    )


def canonical_reflection_provider() -> MockProvider:
    return MockProvider.from_pairs([(r"(?s).", CANONICAL_REFLECTION)])


class SingleAnswerEnv:
    """Minimal grading environment: only Finish matters."""

    def __init__(self, gold: str) -> None:
        self.gold = gold
        self._done = False

    def reset(self, task_id: str) -> EnvObservation:
        self._done = False
        return EnvObservation(text="")

    def prompt_intro(self) -> str:
        return ""

    def step(self, action: Action) -> EnvObservation:
        from reflexion.evaluators import exact_match

        if action.tool == "Finish":
            self._done = True
            passed = exact_match(action.argument or "", self.gold).passed
            text = "Answer is CORRECT" if passed else "Answer is INCORRECT"
            return EnvObservation(text=text, done=True, success=passed)
        return EnvObservation(text="Nothing happens.")


class ScriptedEnv:
    """Feeds back canned observations regardless of actions."""

    def __init__(self, observations, done_on=None):
        self.observations = list(observations)
        self.done_on = done_on
        self._cursor = 0

    def reset(self, task_id: str) -> EnvObservation:
        self._cursor = 0
        return EnvObservation(text="initial")

    def prompt_intro(self) -> str:
        return ""

    def step(self, action: Action) -> EnvObservation:
        text = self.observations[min(self._cursor, len(self.observations) - 1)]
        self._cursor += 1
        done = action.tool == "Finish" or (self.done_on is not None and action.raw == self.done_on)
        return EnvObservation(text=text, done=done)


class AlwaysFailEvaluator:
    def evaluate(self, task: TaskSpec, traj: Trajectory) -> Verdict:
        return Verdict.failure(detail="scripted failure")


class AlwaysPassEvaluator:
    def evaluate(self, task: TaskSpec, traj: Trajectory) -> Verdict:
        return Verdict.success()


def make_traj(pairs, task_id="t", truncated=False, thoughts=None) -> Trajectory:
    steps = []
    for i, (raw, obs) in enumerate(pairs):
        thought = thoughts[i] if thoughts else None
        steps.append(Step(action=Action.plain(raw), observation=obs, thought=thought))
    return Trajectory(task_id=task_id, steps=tuple(steps), truncated=truncated)


def make_memory(capacity=3, texts=()) -> EpisodicMemory:
    from reflexion.core import Reflection, memory_append

    mem = EpisodicMemory(capacity=capacity)
    for i, text in enumerate(texts):
        mem = memory_append(mem, Reflection(trial_index=i, text=text))
    return mem


# ---------------------------------------------------------------------------
# Household episode: expected trajectories for the examine-mug task driven by
# fixtures/scripts/gridhouse_mock.yaml.
# ---------------------------------------------------------------------------

GRIDHOUSE_REFLECTION = (
    "In this environment, my plan was to find a mug then find and use a desklamp. "
    "However, the task says to examine the mug with the desklamp. I should have "
    "looked for the desklamp first, then looked for the mug. I noticed that the "
    "desklamp was found on desk 1. In the next trial, I will go to desk 1, find "
    "the lamp, then look for the mug and examine it with the desklamp."
)

GRIDHOUSE_TRIAL1 = [
    ("think: To solve the task, I need to find and take a mug, then find and use a desklamp.", "OK."),
    (
        "think: First I need to find a mug. A mug is more likely to appear in drawer (1-6), "
        "desk (1-2), shelf (1-6), garbagecan (1), laundryhamper (1). I can check one by one, "
        "starting with drawer 1.",
        "OK.",
    ),
    ("go to drawer 1", "The drawer 1 is closed."),
    ("open drawer 1", "You open the drawer 1. The drawer 1 is open. In it, you see nothing."),
    ("go to drawer 6", "The drawer 6 is closed."),
    ("open drawer 6", "You open the drawer 6. The drawer 6 is open. In it, you see a keychain 2."),
    (
        "go to desk 1",
        "On the desk 1, you see a creditcard 3, a desklamp 1, a laptop 2, a mug 1, a pen 1, "
        "and a pencil 1.",
    ),
    ("think: Now I find a mug (1). Next, I need to take it.", "OK."),
    ("take mug 1 from desk 1", "You pick up the mug 1 from the desk 1."),
    (
        "think: Now I take a mug (1). Next, I need to find a desklamp. A desklamp is more "
        "likely to appear in desk (1-2), sidetable (1-2), shelf (1-6), bed (1), drawer (1-6). "
        "I can check one by one, starting with desk 1.",
        "OK.",
    ),
    ("go to desk 1", "Nothing happens."),
    (
        "go to desk 2",
        "On the desk 2, you see a alarmclock 1, a bowl 1, a mug 3, a pencil 3, and a pencil 2.",
    ),
    ("think: Now I find a desklamp (1). Next, I need to use it.", "OK."),
    ("use desklamp 1", "Nothing happens."),
    ("use desklamp 1", "Nothing happens."),
    ("use desklamp 1", "Nothing happens."),
    ("use desklamp 1", "Nothing happens."),
]

GRIDHOUSE_TRIAL2 = [
    (
        "go to desk 1",
        "On the desk 1, you see a creditcard 3, a desklamp 1, a laptop 2, a mug 1, a pen 1, "
        "and a pencil 1.",
    ),
    ("think: To solve the task, I need to find and take a mug, then find and use a desklamp.", "OK."),
    ("take mug 1 from desk 1", "You pick up the mug 1 from the desk 1."),
    ("think: To solve the task, I need to find and take a mug, then find and use a desklamp.", "OK."),
    ("use desklamp 1", "You turn on the desklamp 1.\nStatus: Success"),
]

# ---------------------------------------------------------------------------
# Question-answering episode: expected trajectories for the sitcom-role task
# driven by fixtures/scripts/qa_mock.yaml.
# ---------------------------------------------------------------------------

QA_REFLECTION = (
    'I searched the wrong title for the show, "\'Allo \'Allo!", which resulted in no '
    "results. I should have searched the show's main character, Gorden Kaye, to find "
    "the role he was best known for in the show."
)

_GROWN_UPS_PARAGRAPH = (
    "Grown-Ups is a 1980 British BBC television film devised and directed by Mike Leigh. "
    "It stars Lesley Manville, Philip Davis, Brenda Blethyn, Janine Duvitski, Lindsay "
    "Duncan and Sam Kelly. It was edited by Robin Sales and produced by Louis Marks for "
    "the BBC, and originally shown on BBC 2 on 28 November 1980."
)

_SIMILAR_OBSERVATION = (
    "Could not find [\"'Allo 'Allo!\"]. Similar: [\"'Allo 'Allo!\", "
    "\"List of 'Allo 'Allo! characters\", \"'Allo 'Allo! (series 2)\", "
    "\"'Allo 'Allo! (series 4)\", \"'Allo 'Allo! (series 6)\"]"
)

_GORDEN_KAYE_PARAGRAPH = (
    "Gordon Irving Kaye (7 April 1941 - 23 January 2017), known professionally as Gorden "
    "Kaye, was an English actor, best known for playing womanising cafe owner Rene Artois "
    "in the television comedy series 'Allo 'Allo!."
)

_SAM_KELLY_PARAGRAPH = (
    "Roger Michael Kelly (19 December 1943 - 14 June 2014), known by the stage name Sam "
    "Kelly, was an English actor who appeared in film, television, radio and theatre. He "
    "is best known for his roles as Captain Hans Geering in 'Allo 'Allo!, Warren in "
    "Porridge, Sam in On the Up, and Ted Liversidge in Barbara."
)

QA_TRIAL1 = [
    ("Search[Grown-Ups]", _GROWN_UPS_PARAGRAPH),
    ("Search[\"'Allo 'Allo!\"]", _SIMILAR_OBSERVATION),
    ("Search[Gorden Kaye]", _GORDEN_KAYE_PARAGRAPH),
    ("Finish[Rene Artois]", "Answer is INCORRECT"),
]

QA_TRIAL2 = [
    ("Search[Grown-Ups]", _GROWN_UPS_PARAGRAPH),
    ("Search[Sam Kelly]", _SAM_KELLY_PARAGRAPH),
    ("Finish[Captain Hans Geering]", "Answer is CORRECT"),
]


def step_pairs(traj_dict: dict) -> list[tuple[str, str]]:
    return [(s["action"]["raw"], s["observation"]) for s in traj_dict["steps"]]
