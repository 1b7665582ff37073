from .problems import ProblemSpec, load_problems, problem_to_task
from .suite import EmptySuiteError, SuiteProvenance, TestSuite, generate_test_suite
from .gym import (
    DoubleSubmissionError,
    OutcomeCell,
    SubmissionLedger,
    assemble_program,
    confusion_report,
    evaluate_internal,
)
from .actor import ProgramActor
from .driver import Ablation, ProgrammingRun, run_programming_suite

__all__ = [
    "ProblemSpec",
    "load_problems",
    "problem_to_task",
    "EmptySuiteError",
    "SuiteProvenance",
    "TestSuite",
    "generate_test_suite",
    "DoubleSubmissionError",
    "OutcomeCell",
    "SubmissionLedger",
    "assemble_program",
    "confusion_report",
    "evaluate_internal",
    "ProgramActor",
    "Ablation",
    "ProgrammingRun",
    "run_programming_suite",
]
