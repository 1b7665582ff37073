"""Self-generated unit-test suites with syntactic filtering."""

from __future__ import annotations

import enum
import random
import re
from dataclasses import dataclass
from typing import Optional

from ..gateway import CompletionRequest, Message, Provider
from ..sandbox import ProtocolSandbox, validate_statement
from .problems import ProblemSpec

MAX_SELF_GENERATED_TESTS = 6

_FENCE = re.compile(r"^```[a-zA-Z]*$")


class EmptySuiteError(RuntimeError):
    """No syntactically valid test candidates survived filtering."""


class SuiteProvenance(str, enum.Enum):
    SELF_GENERATED = "self_generated"
    HIDDEN = "hidden"


@dataclass(frozen=True)
class TestSuite:
    __test__ = False  # not a pytest class, despite the name

    tests: tuple[str, ...]
    provenance: SuiteProvenance

    def __post_init__(self) -> None:
        object.__setattr__(self, "tests", tuple(self.tests))
        if self.provenance is SuiteProvenance.SELF_GENERATED:
            if len(self.tests) > MAX_SELF_GENERATED_TESTS:
                raise ValueError(
                    f"self-generated suites are capped at {MAX_SELF_GENERATED_TESTS} tests"
                )
            for test in self.tests:
                if not validate_statement(test):
                    raise ValueError(f"unparseable test statement: {test!r}")

    def __len__(self) -> int:
        return len(self.tests)


_TESTGEN_PREAMBLE = (
    "You write unit tests. Given a function signature and its description, "
    "think step by step about edge cases, then list single-line assert "
    "statements that exercise the function. Output one assert per line."
)


def build_testgen_prompt(problem: ProblemSpec) -> CompletionRequest:
    body = (
        f"Function signature:\n{problem.signature}\n\n"
        f"Description:\n{problem.description}\n\n"
        "Write up to eight single-line assert statements testing this function."
    )
    return CompletionRequest(
        messages=(Message("system", _TESTGEN_PREAMBLE), Message("user", body)),
        temperature=0.0,
        max_tokens=512,
    )


def extract_candidates(output: str) -> list[str]:
    """Pull candidate assert statements out of model output."""
    candidates = []
    for line in output.splitlines():
        line = line.strip()
        if _FENCE.match(line):
            continue
        line = re.sub(r"^[-*\d.)\s]+(?=assert\b)", "", line)
        if line.startswith("assert "):
            candidates.append(line)
    return candidates


def _dedup(tests: list[str]) -> list[str]:
    seen = set()
    kept = []
    for test in tests:
        key = " ".join(test.split())
        if key not in seen:
            seen.add(key)
            kept.append(test)
    return kept


def generate_test_suite(
    provider: Provider,
    problem: ProblemSpec,
    sandbox: ProtocolSandbox,
    max_tests: int = MAX_SELF_GENERATED_TESTS,
    sample_seed: Optional[int] = None,
) -> TestSuite:
    """Ask the model for tests, keep the syntactically valid ones.

    Candidates are validated through the sandbox, deduplicated preserving
    first occurrence, and the first ``max_tests`` survivors are retained
    (or a seeded random sample when ``sample_seed`` is given). Raises
    EmptySuiteError when nothing valid remains.
    """
    output = provider.complete(build_testgen_prompt(problem)).content
    candidates = extract_candidates(output)
    if candidates:
        validity = sandbox.validate(candidates)
        valid = [t for t, ok in zip(candidates, validity) if ok]
    else:
        valid = []
    valid = _dedup(valid)
    if not valid:
        raise EmptySuiteError(f"no valid test statements generated for {problem.problem_id}")
    if sample_seed is not None and len(valid) > max_tests:
        rng = random.Random(sample_seed)
        picked = rng.sample(valid, max_tests)
        valid = [t for t in valid if t in set(picked)]
    return TestSuite(tests=tuple(valid[:max_tests]), provenance=SuiteProvenance.SELF_GENERATED)
