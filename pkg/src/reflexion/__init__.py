"""Verbal reinforcement for language agents.

Agents improve across trials not by weight updates but by storing verbal
reflections on their failures in a bounded episodic memory that is fed
back into subsequent prompts.
"""

from .core import (
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
from .gateway import (
    CompletionRequest,
    CompletionResponse,
    HTTPProvider,
    Message,
    MockProvider,
    Provider,
    RecordingProvider,
    ReplayProvider,
    ScriptRule,
    request_digest,
)
from .actor import (
    ActionGrammar,
    Actor,
    ActorConfig,
    PromptTemplate,
    Strategy,
    build_prompt,
    parse_action,
    render_trajectory,
)
from .evaluators import (
    ExactMatchEvaluator,
    HeuristicEvaluator,
    HeuristicParams,
    LlmJudgeEvaluator,
    exact_match,
    heuristic_evaluate,
    llm_binary_evaluate,
    normalize_answer,
)
from .reflector import Reflector, ReflectorMode
from .loop import (
    LoopConfig,
    SuiteComponents,
    TaskResult,
    TrialRecord,
    run_suite_results,
    run_task,
)
from .report import RunReport, build_report, read_report, write_report

__version__ = "0.1.0"
