"""Run bookkeeping: learning curves, failure histograms, report files.

Report files are written deterministically (sorted keys, no wall-clock
content) so that a replayed run produces byte-identical artifacts; timing
goes to a separate sidecar file.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from .core import FailureTag
from .loop import TaskResult

SCHEMA_VERSION = "1.0"

TAG_ORDER = [tag.value for tag in FailureTag]


class SchemaVersionError(ValueError):
    pass


@dataclass(frozen=True)
class RunReport:
    run_id: str
    mode_label: str
    config: dict
    curve: tuple[float, ...]
    failure_histogram: dict[str, tuple[int, ...]]
    results: tuple[TaskResult, ...]
    confusion: Optional[dict] = None
    totals: dict = field(default_factory=dict)
    schema_version: str = SCHEMA_VERSION

    def __post_init__(self) -> None:
        object.__setattr__(self, "curve", tuple(self.curve))
        object.__setattr__(self, "results", tuple(self.results))
        for i in range(1, len(self.curve)):
            if self.curve[i] < self.curve[i - 1]:
                raise ValueError("solved-proportion curve must be non-decreasing")


def solve_curve(results: Sequence[TaskResult]) -> tuple[float, ...]:
    """Cumulative proportion of tasks solved by each trial index."""
    if not results:
        return ()
    length = max((len(r.records) for r in results), default=0)
    length = max(
        length,
        max((r.solved_at_trial + 1 for r in results if r.solved_at_trial is not None), default=0),
    )
    if length == 0:
        return ()
    total = len(results)
    curve = []
    for trial in range(length):
        solved = sum(
            1
            for r in results
            if r.solved_at_trial is not None and r.solved_at_trial <= trial
        )
        curve.append(solved / total)
    return tuple(curve)


def failure_histogram(results: Sequence[TaskResult]) -> dict[str, tuple[int, ...]]:
    """Counts of failed trials per failure tag per trial index."""
    length = max((len(r.records) for r in results), default=0)
    counts = {tag: [0] * length for tag in TAG_ORDER}
    for result in results:
        for record in result.records:
            if not record.verdict.passed:
                counts[record.verdict.failure_tag.value][record.trial_index] += 1
    return {tag: tuple(values) for tag, values in counts.items()}


def build_report(
    results: Sequence[TaskResult],
    run_id: str,
    config: dict,
    mode_label: str = "reflexion",
    confusion: Optional[dict] = None,
) -> RunReport:
    totals = {
        "tasks": len(results),
        "tasks_solved": sum(1 for r in results if r.solved),
        "trials": sum(len(r.records) for r in results),
        "provider_calls": sum(r.provider_calls for r in results),
        "errors": sum(1 for r in results if r.error),
    }
    return RunReport(
        run_id=run_id,
        mode_label=mode_label,
        config=config,
        curve=solve_curve(results),
        failure_histogram=failure_histogram(results),
        results=tuple(results),
        confusion=confusion,
        totals=totals,
    )


def _trajectory_to_dict(traj) -> dict:
    return {
        "task_id": traj.task_id,
        "truncated": traj.truncated,
        "steps": [
            {
                "thought": s.thought,
                "action": {"raw": s.action.raw, "tool": s.action.tool, "argument": s.action.argument},
                "observation": s.observation,
            }
            for s in traj.steps
        ],
    }


def task_result_to_dict(result: TaskResult, include_trajectories: bool = False) -> dict:
    data = {
        "task_id": result.task_id,
        "solved": result.solved,
        "solved_at_trial": result.solved_at_trial,
        "error": result.error,
        "provider_calls": result.provider_calls,
        "trials": [
            {
                "trial_index": rec.trial_index,
                "verdict": {
                    "passed": rec.verdict.passed,
                    "score": rec.verdict.score,
                    "failure_tag": rec.verdict.failure_tag.value,
                    "detail": rec.verdict.detail,
                },
                "reflection": (
                    None
                    if rec.reflection is None
                    else {
                        "trial_index": rec.reflection.trial_index,
                        "kind": rec.reflection.kind.value,
                        "text": rec.reflection.text,
                    }
                ),
                "provider_calls": rec.provider_calls,
            }
            for rec in result.records
        ],
    }
    if include_trajectories:
        for entry, rec in zip(data["trials"], result.records):
            entry["trajectory"] = _trajectory_to_dict(rec.trajectory)
    return data


def report_to_dict(report: RunReport) -> dict:
    return {
        "schema_version": report.schema_version,
        "run_id": report.run_id,
        "mode_label": report.mode_label,
        "config": report.config,
        "curve": list(report.curve),
        "failure_histogram": {tag: list(v) for tag, v in report.failure_histogram.items()},
        "confusion": report.confusion,
        "totals": report.totals,
        "tasks": [task_result_to_dict(r) for r in report.results],
    }


def write_report(report: RunReport, output_dir: str | Path) -> Path:
    """Write report.json, per-task trial logs, and the timing sidecar.

    Everything except timings.json is deterministic for a given run, which
    is what makes record/replay comparisons byte-exact.
    """
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    report_path = out / "report.json"
    report_path.write_text(
        json.dumps(report_to_dict(report), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    tasks_dir = out / "tasks"
    tasks_dir.mkdir(exist_ok=True)
    for result in report.results:
        log = task_result_to_dict(result, include_trajectories=True)
        (tasks_dir / f"{result.task_id}.json").write_text(
            json.dumps(log, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
    timings = {
        "tasks": {
            r.task_id: {
                "elapsed_s": r.elapsed_s,
                "trials": [rec.elapsed_s for rec in r.records],
            }
            for r in report.results
        }
    }
    (out / "timings.json").write_text(
        json.dumps(timings, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return report_path


def read_report(path: str | Path) -> dict:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    version = data.get("schema_version", "")
    major = version.split(".", 1)[0]
    if major != SCHEMA_VERSION.split(".", 1)[0]:
        raise SchemaVersionError(f"unsupported report schema version {version!r}")
    return data


def _csv(rows: Sequence[Sequence[object]]) -> str:
    import csv

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerows(rows)
    return buf.getvalue()


def curve_csv(report: dict) -> str:
    rows: list[Sequence[object]] = [("trial", "proportion")]
    rows.extend((i, value) for i, value in enumerate(report["curve"]))
    return _csv(rows)


def failure_histogram_csv(report: dict) -> str:
    histogram = report["failure_histogram"]
    length = max((len(v) for v in histogram.values()), default=0)
    rows: list[Sequence[object]] = [("trial", *TAG_ORDER)]
    for trial in range(length):
        rows.append((trial, *(histogram[tag][trial] for tag in TAG_ORDER)))
    return _csv(rows)


def summary_csv(report: dict) -> str:
    totals = report["totals"]
    solve_rate = totals["tasks_solved"] / totals["tasks"] if totals["tasks"] else 0.0
    header = ["mode", "tasks", "solved", "solve_rate"]
    row: list[object] = [report["mode_label"], totals["tasks"], totals["tasks_solved"], solve_rate]
    if report.get("confusion"):
        header.append("pass_at_1")
        row.append(report["confusion"]["pass_at_1"])
    return _csv([header, row])


def confusion_csv(report: dict) -> str:
    confusion = report.get("confusion")
    if not confusion:
        return _csv([("tp", "fn", "fp", "tn")])
    counts = confusion["counts"]
    total = confusion["total"]
    rows = [
        ("metric", "tp", "fn", "fp", "tn"),
        ("count", counts["TP"], counts["FN"], counts["FP"], counts["TN"]),
        (
            "frequency",
            counts["TP"] / total,
            counts["FN"] / total,
            counts["FP"] / total,
            counts["TN"] / total,
        ),
    ]
    return _csv(rows)
