"""Question answering over a local document corpus.

Three tools: Search[title] returns the first paragraph of the exact or
uniquely-prefixed title, otherwise a "Could not find" message with the five
closest titles by token overlap; Lookup[term] walks the sentences of the
last searched document; Finish[answer] ends the episode, graded by
normalized exact match against the task's gold answer.
"""

from __future__ import annotations

import json
import re
import string
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from ..core import Action, TaskKind, TaskSpec
from .base import (
    NOTHING_HAPPENS,
    DoneEnvironmentError,
    EnvObservation,
    EnvironmentError_,
)

_PUNCT_TABLE = str.maketrans("", "", string.punctuation)
SIMILAR_LIMIT = 5


@dataclass(frozen=True)
class CorpusDoc:
    title: str
    paragraphs: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "paragraphs", tuple(self.paragraphs))
        if not self.paragraphs:
            raise ValueError(f"document {self.title!r} has no paragraphs")


def _title_tokens(text: str) -> frozenset[str]:
    return frozenset(text.lower().translate(_PUNCT_TABLE).split())


def load_corpus(path: str | Path) -> list[CorpusDoc]:
    """Read a line-delimited corpus: one {title, paragraphs} object per line."""
    docs = []
    titles = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        data = json.loads(line)
        doc = CorpusDoc(title=data["title"], paragraphs=tuple(data["paragraphs"]))
        if doc.title in titles:
            raise ValueError(f"duplicate corpus title {doc.title!r}")
        titles.add(doc.title)
        docs.append(doc)
    return docs


def load_qa_tasks(path: str | Path) -> list[TaskSpec]:
    """Read tasks from a line-delimited file of {task_id, question, answer, context?}."""
    tasks = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        data = json.loads(line)
        tasks.append(
            TaskSpec(
                task_id=data["task_id"],
                kind=TaskKind.REASONING,
                statement=data["question"],
                gold_answer=data["answer"],
                ground_truth_context=data.get("context"),
            )
        )
    return tasks


class CorpusQA:
    """One environment instance; create one per concurrent episode."""

    def __init__(self, corpus: list[CorpusDoc], tasks: list[TaskSpec]) -> None:
        self._docs = list(corpus)
        self._by_title = {doc.title.casefold(): doc for doc in self._docs}
        self._tasks = {task.task_id: task for task in tasks}
        self._task: Optional[TaskSpec] = None
        self._last_doc: Optional[CorpusDoc] = None
        self._lookup_state: dict[str, int] = {}
        self._done = False

    def reset(self, task_id: str) -> EnvObservation:
        if task_id not in self._tasks:
            raise EnvironmentError_(f"unknown task id {task_id!r}")
        self._task = self._tasks[task_id]
        self._last_doc = None
        self._lookup_state = {}
        self._done = False
        return EnvObservation(text=f"Question: {self._task.statement}")

    def prompt_intro(self) -> str:
        return ""

    def step(self, action: Action) -> EnvObservation:
        if self._task is None:
            raise EnvironmentError_("reset the environment before stepping")
        if self._done:
            raise DoneEnvironmentError("episode already finished")
        if action.tool == "Search":
            return EnvObservation(text=self._search(action.argument or ""))
        if action.tool == "Lookup":
            return EnvObservation(text=self._lookup(action.argument or ""))
        if action.tool == "Finish":
            return self._finish(action.argument or "")
        return EnvObservation(text=NOTHING_HAPPENS)

    def _search(self, query: str) -> str:
        needle = query.strip().casefold()
        doc = self._by_title.get(needle)
        if doc is None:
            prefixed = [d for d in self._docs if d.title.casefold().startswith(needle)]
            if len(prefixed) == 1:
                doc = prefixed[0]
        if doc is not None:
            self._last_doc = doc
            self._lookup_state = {}
            return doc.paragraphs[0]
        similar = self._similar_titles(query)
        return f"Could not find [{query}]. Similar: {similar!r}"

    def _similar_titles(self, query: str) -> list[str]:
        query_tokens = _title_tokens(query)
        scored = []
        for idx, doc in enumerate(self._docs):
            score = len(query_tokens & _title_tokens(doc.title))
            if score > 0:
                scored.append((-score, idx, doc.title))
        scored.sort()
        return [title for _, _, title in scored[:SIMILAR_LIMIT]]

    def _lookup(self, term: str) -> str:
        if self._last_doc is None or not term.strip():
            return NOTHING_HAPPENS
        sentences = []
        for paragraph in self._last_doc.paragraphs:
            sentences.extend(s.strip() for s in re.split(r"(?<=[.!?])\s+", paragraph) if s.strip())
        matches = [s for s in sentences if term.lower() in s.lower()]
        if not matches:
            return "No more results."
        key = term.lower()
        position = self._lookup_state.get(key, 0)
        if position >= len(matches):
            return "No more results."
        self._lookup_state[key] = position + 1
        return f"(Result {position + 1}/{len(matches)}) {matches[position]}"

    def _finish(self, answer: str) -> EnvObservation:
        from ..evaluators import exact_match

        self._done = True
        assert self._task is not None and self._task.gold_answer is not None
        verdict = exact_match(answer, self._task.gold_answer)
        if verdict.passed:
            return EnvObservation(text="Answer is CORRECT", done=True, success=True)
        return EnvObservation(text="Answer is INCORRECT", done=True, success=False)
