import pytest

from support import make_memory, make_traj

from reflexion.actor import render_trajectory
from reflexion.core import ReflectionKind, TaskKind, TaskSpec, Verdict
from reflexion.gateway import MockProvider
from reflexion.reflector import ReflectionError, Reflector, ReflectorMode

TASK = TaskSpec(task_id="q", kind=TaskKind.REASONING, statement="?", gold_answer="x")
FAILED = Verdict.failure(detail="wrong answer given")
TRAJ = make_traj([("Search[x]", "nothing useful"), ("Finish[y]", "Answer is INCORRECT")])


class TestSelfReflection:
    def test_returns_model_text(self):
        provider = MockProvider.from_pairs(
            [(r"(?s).", "I searched the wrong title for the show; next time search the actor.")]
        )
        reflector = Reflector(provider=provider)
        reflection = reflector.reflect(TASK, TRAJ, FAILED, make_memory(), trial_index=0)
        assert reflection.kind is ReflectionKind.SELF_REFLECTION
        assert reflection.trial_index == 0
        assert "searched the wrong title" in reflection.text

    def test_prompt_carries_failure_signal_and_trajectory(self):
        provider = MockProvider.from_pairs([(r"(?s).", "lesson")])
        Reflector(provider=provider).reflect(TASK, TRAJ, FAILED, make_memory(), trial_index=0)
        prompt = provider.prompts_seen()[0]
        assert "Status: Fail" in prompt
        assert "wrong answer given" in prompt
        assert "Search[x]" in prompt

    def test_prior_reflections_included_by_default(self):
        provider = MockProvider.from_pairs([(r"(?s).", "lesson")])
        mem = make_memory(texts=["earlier lesson about lamps"])
        Reflector(provider=provider).reflect(TASK, TRAJ, FAILED, mem, trial_index=1)
        assert "earlier lesson about lamps" in provider.prompts_seen()[0]

    def test_prior_reflections_toggle(self):
        provider = MockProvider.from_pairs([(r"(?s).", "lesson")])
        mem = make_memory(texts=["earlier lesson about lamps"])
        Reflector(provider=provider, include_memory=False).reflect(
            TASK, TRAJ, FAILED, mem, trial_index=1
        )
        assert "earlier lesson about lamps" not in provider.prompts_seen()[0]

    def test_empty_output_is_an_error(self):
        provider = MockProvider.from_pairs([(r"(?s).", "   ")])
        with pytest.raises(ReflectionError):
            Reflector(provider=provider).reflect(TASK, TRAJ, FAILED, make_memory(), trial_index=0)

    def test_requires_provider(self):
        with pytest.raises(ValueError):
            Reflector(mode=ReflectorMode.SELF_REFLECTION)


class TestAblationModes:
    def test_episodic_only_stores_trajectory_without_model_call(self):
        provider = MockProvider.from_pairs([(r"(?s).", "never used")])
        reflector = Reflector(mode=ReflectorMode.EPISODIC_ONLY, provider=provider)
        reflection = reflector.reflect(TASK, TRAJ, FAILED, make_memory(), trial_index=0)
        assert reflection.kind is ReflectionKind.EPISODIC_TRAJECTORY
        assert reflection.text == render_trajectory(TRAJ)
        assert provider.total_calls == 0

    def test_none_mode_returns_sentinel(self):
        reflector = Reflector(mode=ReflectorMode.NONE)
        assert reflector.reflect(TASK, TRAJ, FAILED, make_memory(), trial_index=0) is None


class TestPrecondition:
    def test_never_reflects_on_success(self):
        reflector = Reflector(mode=ReflectorMode.NONE)
        with pytest.raises(ValueError):
            reflector.reflect(TASK, TRAJ, Verdict.success(), make_memory(), trial_index=0)
