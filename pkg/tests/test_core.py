import collections

import pytest
from hypothesis import given
from hypothesis import strategies as st

from reflexion.core import (
    Action,
    EpisodicMemory,
    FailureTag,
    Reflection,
    ReflectionKind,
    Step,
    TaskKind,
    TaskSpec,
    Trajectory,
    Verdict,
    memory_append,
    memory_render,
)


def reflection(i, text=None):
    return Reflection(trial_index=i, text=text or f"reflection {i}")


class TestAction:
    def test_tool_action_reconstructs(self):
        action = Action.from_tool("Search", "Sam Kelly")
        assert action.raw == "Search[Sam Kelly]"

    def test_mismatched_raw_rejected(self):
        with pytest.raises(ValueError):
            Action(raw="Search[x]", tool="Search", argument="y")

    def test_empty_raw_rejected(self):
        with pytest.raises(ValueError):
            Action(raw="")


class TestTrajectory:
    def test_preserves_order(self):
        steps = [Step(action=Action.plain(f"a{i}"), observation=f"o{i}") for i in range(4)]
        traj = Trajectory(task_id="t", steps=tuple(steps))
        assert [s.action.raw for s in traj.steps] == ["a0", "a1", "a2", "a3"]

    def test_empty_observation_only_terminal(self):
        ok = Trajectory(task_id="t", steps=(Step(action=Action.plain("a"), observation=""),))
        assert len(ok) == 1
        with pytest.raises(ValueError):
            Trajectory(
                task_id="t",
                steps=(
                    Step(action=Action.plain("a"), observation=""),
                    Step(action=Action.plain("b"), observation="o"),
                ),
            )

    def test_final_answer(self):
        traj = Trajectory(
            task_id="t",
            steps=(
                Step(action=Action.from_tool("Search", "x"), observation="o"),
                Step(action=Action.from_tool("Finish", "novelist"), observation="done"),
            ),
        )
        assert traj.final_answer() == "novelist"


class TestVerdict:
    def test_passed_requires_clean_tag(self):
        with pytest.raises(ValueError):
            Verdict(passed=True, score=1.0, failure_tag=FailureTag.WRONG_ANSWER)

    def test_score_bounds(self):
        with pytest.raises(ValueError):
            Verdict(passed=False, score=1.5)

    def test_binary_constructors(self):
        assert Verdict.success().score == 1.0
        failed = Verdict.failure(tag=FailureTag.TESTS_FAILED)
        assert failed.score == 0.0 and not failed.passed


class TestTaskSpec:
    def test_reasoning_needs_gold(self):
        with pytest.raises(ValueError):
            TaskSpec(task_id="q", kind=TaskKind.REASONING, statement="?")

    def test_context_only_for_reasoning(self):
        with pytest.raises(ValueError):
            TaskSpec(
                task_id="d",
                kind=TaskKind.DECISION,
                statement="move it",
                ground_truth_context="ctx",
            )


class TestMemoryAppend:
    def test_append_to_empty(self):
        mem = memory_append(EpisodicMemory(capacity=3), reflection(0))
        assert [r.trial_index for r in mem.entries] == [0]

    def test_fifo_eviction_at_capacity_three(self):
        mem = EpisodicMemory(capacity=3)
        for i in range(4):
            mem = memory_append(mem, reflection(i))
        assert [r.trial_index for r in mem.entries] == [1, 2, 3]

    def test_capacity_one_keeps_only_newest(self):
        mem = EpisodicMemory(capacity=1)
        mem = memory_append(mem, reflection(0))
        mem = memory_append(mem, reflection(1))
        assert [r.trial_index for r in mem.entries] == [1]

    def test_rejects_empty_text(self):
        with pytest.raises(ValueError):
            Reflection(trial_index=0, text="   ")

    @given(
        total=st.integers(min_value=0, max_value=1000),
        omega=st.sampled_from([1, 2, 3, 8]),
    )
    def test_matches_bounded_queue_oracle(self, total, omega):
        oracle = collections.deque(maxlen=omega)
        mem = EpisodicMemory(capacity=omega)
        for i in range(total):
            r = reflection(i)
            oracle.append(r)
            mem = memory_append(mem, r)
            assert len(mem) <= omega
        assert list(mem.entries) == list(oracle)


class TestMemoryRender:
    def test_empty_renders_empty(self):
        assert memory_render(EpisodicMemory(capacity=3)) == ""

    def test_singleton_contains_text(self):
        mem = memory_append(EpisodicMemory(capacity=3), reflection(0, "check the lamp first"))
        rendered = memory_render(mem)
        assert "check the lamp first" in rendered
        assert rendered.startswith("Trial #1 reflection:")

    def test_order_preserved(self):
        mem = EpisodicMemory(capacity=3)
        mem = memory_append(mem, reflection(0, "first lesson"))
        mem = memory_append(mem, reflection(1, "second lesson"))
        rendered = memory_render(mem)
        assert rendered.index("first lesson") < rendered.index("second lesson")

    def test_pure_function(self):
        mem = memory_append(EpisodicMemory(capacity=2), reflection(0))
        assert memory_render(mem) == memory_render(mem)

    def test_prefix_overridable(self):
        mem = memory_append(EpisodicMemory(capacity=2), reflection(0, "lesson"))
        rendered = memory_render(mem, prefix_template="Attempt {n}:")
        assert rendered.startswith("Attempt 1:")

    def test_episodic_kind_allowed(self):
        r = Reflection(trial_index=0, text="> go\nseen", kind=ReflectionKind.EPISODIC_TRAJECTORY)
        assert r.kind is ReflectionKind.EPISODIC_TRAJECTORY
