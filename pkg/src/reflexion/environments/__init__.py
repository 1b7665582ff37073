from .base import EnvObservation, Environment, EnvironmentError_, DoneEnvironmentError
from .gridhouse import GridHouse, load_gridhouse
from .corpusqa import CorpusQA, CorpusDoc, load_corpus, load_qa_tasks

__all__ = [
    "EnvObservation",
    "Environment",
    "EnvironmentError_",
    "DoneEnvironmentError",
    "GridHouse",
    "load_gridhouse",
    "CorpusQA",
    "CorpusDoc",
    "load_corpus",
    "load_qa_tasks",
]
