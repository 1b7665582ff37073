#!/usr/bin/env python3
"""Ablation table for the programming gym fixtures.

Runs the six bundled problems under the four composite variants (base
single shot, test generation off, self-reflection off, both on) with the
deterministic scripted provider and sandbox, then prints single-submission
accuracy and the internal/hidden confusion cells per variant.

Usage: python scripts/run_codegym_experiment.py [output_dir]
"""

import sys
from pathlib import Path

import yaml

from reflexion.cli import _fixture_path
from reflexion.codegym import Ablation, load_problems, run_programming_suite
from reflexion.gateway import MockProvider
from reflexion.loop import LoopConfig
from reflexion.report import build_report, write_report
from reflexion.sandbox import ExecRule, ScriptedSandbox


def build_sandbox():
    data = yaml.safe_load(_fixture_path("scripts", "codegym_sandbox.yaml").read_text())
    return ScriptedSandbox([ExecRule(r["pattern"], r["statuses"]) for r in data["rules"]])


def run(ablation, problems):
    provider = MockProvider.from_script_file(_fixture_path("scripts", "codegym_mock.yaml"))
    outcome = run_programming_suite(
        problems=problems,
        actor_provider=provider,
        testgen_provider=provider,
        reflection_provider=provider,
        sandbox=build_sandbox(),
        cfg=LoopConfig(max_trials=4, omega=1),
        ablation=ablation,
    )
    return outcome


def main() -> int:
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("out/codegym_experiment")
    problems = load_problems(_fixture_path("problems"))
    print(f"{'variant':<28} {'pass@1':>7}   TP  FN  FP  TN")
    for ablation in (Ablation.BASE, Ablation.NO_TEST_GEN, Ablation.NO_SELF_REFLECTION, Ablation.NONE):
        outcome = run(ablation, problems)
        counts = outcome.confusion["counts"]
        label = ablation.mode_label
        print(
            f"{label:<28} {outcome.confusion['pass_at_1']:>7.3f}   "
            f"{counts['TP']:>2}  {counts['FN']:>2}  {counts['FP']:>2}  {counts['TN']:>2}"
        )
        report = build_report(
            outcome.results,
            run_id=f"codegym-{ablation.value}",
            config={},
            mode_label=label,
            confusion=outcome.confusion,
        )
        write_report(report, out / ablation.value)
    print(f"reports written under {out}/")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
