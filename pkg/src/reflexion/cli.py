"""Command-line entry point: run, replay, report, validate-config."""

from __future__ import annotations

import argparse
import re
import sys
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

import yaml

from .actor import ActionGrammar, Actor, ActorConfig, PromptTemplate, Strategy
from .codegym import Ablation, load_problems, run_programming_suite
from .config import (
    ConfigError,
    check_credentials,
    config_fingerprint,
    derive_run_id,
    load_config,
)
from .environments import CorpusQA, GridHouse, load_corpus, load_gridhouse, load_qa_tasks
from .evaluators import ExactMatchEvaluator, HeuristicEvaluator, LlmJudgeEvaluator
from .gateway import HTTPProvider, MockProvider, Provider, RecordingProvider, ReplayProvider
from .loop import LoopConfig, SuiteComponents, run_suite_results
from .reflector import Reflector, ReflectorMode
from .report import (
    build_report,
    confusion_csv,
    curve_csv,
    failure_histogram_csv,
    read_report,
    summary_csv,
    write_report,
)
from .sandbox import ExecRule, ProtocolSandbox, ScriptedSandbox, SubprocessSandbox

_PREAMBLES = {
    "decision": (
        "You are an agent in a household. Interact with the room using short "
        "commands, one per line, like the examples. Use 'think: ...' to reason."
    ),
    "reasoning": (
        "You answer questions by reasoning step by step. Use Search[entity], "
        "Lookup[term] and Finish[answer] actions as in the examples."
    ),
}

_FIXTURE_FEW_SHOT = {
    ("decision", "react"): "gridhouse_few_shot.txt",
    ("reasoning", "react"): "react_qa_few_shot.txt",
    ("reasoning", "cot"): "cot_qa_few_shot.txt",
}

_MODE_LABELS = {
    "self_reflection": "reflexion",
    "episodic_only": "episodic memory",
    "none": "baseline",
}


def _fixture_path(*parts: str) -> Path:
    return Path(str(resources.files("reflexion").joinpath("fixtures", *parts)))


def _load_blocks(path: str | Path) -> tuple[str, ...]:
    raw = Path(path).read_text(encoding="utf-8")
    return tuple(b.strip() for b in re.split(r"\n---\n", raw) if b.strip())


def build_provider(config: dict) -> Provider:
    cassette = config["cassette"]
    if cassette["replay"]:
        return ReplayProvider(cassette["replay"])
    provider_cfg = config["provider"]
    if provider_cfg["kind"] == "mock":
        provider: Provider = MockProvider.from_script_file(provider_cfg["script"])
    else:
        provider = HTTPProvider(
            base_url=provider_cfg["base_url"],
            model=provider_cfg["model"],
            api_key=provider_cfg.get("api_key"),
            retries=provider_cfg.get("retries", 2),
        )
    if cassette["record"]:
        provider = RecordingProvider(provider, cassette["record"])
    return provider


def build_sandbox(config: dict) -> ProtocolSandbox:
    sandbox_cfg = config["sandbox"]
    if sandbox_cfg["kind"] == "subprocess":
        return SubprocessSandbox(sandbox_cfg["command"])
    rules = []
    if sandbox_cfg["script"]:
        data = yaml.safe_load(Path(sandbox_cfg["script"]).read_text(encoding="utf-8")) or {}
        for item in data.get("rules", []):
            rules.append(ExecRule(pattern=item["pattern"], statuses=item["statuses"]))
    return ScriptedSandbox(rules)


def _build_template(config: dict) -> PromptTemplate:
    templates = config["templates"]
    suite = config["suite"]
    preamble = templates["system_preamble"] or _PREAMBLES.get(suite, "")
    few_shot_path = templates["actor_few_shot"]
    if few_shot_path is None:
        name = _FIXTURE_FEW_SHOT.get((suite, config["strategy"]))
        few_shot_path = _fixture_path("templates", name) if name else None
    few_shot = _load_blocks(few_shot_path) if few_shot_path else ()
    kwargs = {}
    if templates["memory_header"]:
        kwargs["memory_header"] = templates["memory_header"]
    if templates["task_header"]:
        kwargs["task_header"] = templates["task_header"]
    elif suite == "reasoning":
        kwargs["task_header"] = "Question:"
    if templates["layout"]:
        layout = Path(templates["layout"]).read_text(encoding="utf-8").strip("\n")
        if "{few_shot}" not in layout:
            layout = "{few_shot}\n\n" + layout
        return PromptTemplate(
            system_preamble=preamble, few_shot_examples=few_shot, layout=layout, **kwargs
        )
    return PromptTemplate(system_preamble=preamble, few_shot_examples=few_shot, **kwargs)


def _reflection_few_shot(config: dict) -> tuple[str, ...]:
    path = config["templates"]["reflection_few_shot"]
    if path is None:
        path = _fixture_path("templates", "reflection_few_shot.txt")
    return _load_blocks(path)


def run_from_config(config: dict, output_dir: str | Path):
    """Execute the configured suite and write run artifacts; returns the report."""
    check_credentials(config)
    run_id = derive_run_id(config)
    snapshot = config_fingerprint(config)
    cfg = LoopConfig(
        max_trials=config["max_trials"],
        consecutive_fail_stop=config["consecutive_fail_stop"],
        omega=config["omega"],
    )
    provider = build_provider(config)

    if config["suite"] == "programming":
        problems = load_problems(config["problems"])
        if config["task_filter"]:
            wanted = set(config["task_filter"])
            problems = [p for p in problems if p.problem_id in wanted]
        ablation = Ablation(config["ablation"])
        sandbox = build_sandbox(config)
        try:
            run = run_programming_suite(
                problems=problems,
                actor_provider=provider,
                testgen_provider=provider,
                reflection_provider=provider,
                sandbox=sandbox,
                cfg=cfg,
                ablation=ablation,
                reflection_few_shot=_reflection_few_shot(config),
                parallelism=config["parallelism"],
            )
        finally:
            closer = getattr(sandbox, "close", None)
            if closer is not None:
                closer()
        report = build_report(
            run.results,
            run_id=run_id,
            config=snapshot,
            mode_label=ablation.mode_label,
            confusion=run.confusion or None,
        )
    else:
        tasks, components = _build_text_suite(config, provider)
        results = run_suite_results(tasks, components, cfg, parallelism=config["parallelism"])
        report = build_report(
            results,
            run_id=run_id,
            config=snapshot,
            mode_label=_MODE_LABELS[config["reflector"]],
        )
    write_report(report, output_dir)
    return report


def _build_text_suite(config: dict, provider: Provider):
    suite = config["suite"]
    template = _build_template(config)
    actor_config = ActorConfig(
        strategy=Strategy(config["strategy"]),
        max_steps=config["max_steps"],
        few_shot_count=config["few_shot_count"],
        grammar=ActionGrammar(config["grammar"]),
        char_budget=config["char_budget"],
        temperature=float(config["temperature"]),
        max_tokens=config["max_tokens"],
        stop=("\nObservation",) if config["grammar"] == "bracketed" else ("\n>",),
    )

    if suite == "decision":
        grid_tasks, specs = load_gridhouse(config["tasks"])

        def make_env(task):
            return GridHouse(grid_tasks)

    else:
        corpus = load_corpus(config["corpus"])
        specs = load_qa_tasks(config["tasks"])

        def make_env(task):
            return CorpusQA(corpus, specs)

    if config["task_filter"]:
        wanted = set(config["task_filter"])
        specs = [t for t in specs if t.task_id in wanted]
    if not specs:
        raise ConfigError("task_filter removed every task")

    def make_actor(task):
        return Actor(provider, template, actor_config)

    evaluator_kind = config["evaluator"]

    def make_evaluator(task):
        if evaluator_kind == "heuristic":
            return HeuristicEvaluator()
        if evaluator_kind == "exact_match":
            return ExactMatchEvaluator()
        if evaluator_kind == "llm":
            return LlmJudgeEvaluator(provider)
        raise ConfigError(f"evaluator {evaluator_kind!r} is not valid for {suite} suites")

    reflection_few_shot = _reflection_few_shot(config)

    def make_reflector(task):
        mode = ReflectorMode(config["reflector"])
        if mode is ReflectorMode.SELF_REFLECTION:
            return Reflector(mode=mode, provider=provider, few_shot=reflection_few_shot)
        return Reflector(mode=mode)

    components = SuiteComponents(
        make_actor=make_actor,
        make_evaluator=make_evaluator,
        make_reflector=make_reflector,
        make_env=make_env,
    )
    return specs, components


def _apply_overrides(config: dict, args: argparse.Namespace) -> dict:
    if getattr(args, "ablation", None):
        config["ablation"] = args.ablation
    if getattr(args, "reflector", None):
        config["reflector"] = args.reflector
    if getattr(args, "max_trials", None):
        config["max_trials"] = args.max_trials
    if getattr(args, "omega", None):
        config["omega"] = args.omega
    if getattr(args, "parallelism", None):
        config["parallelism"] = args.parallelism
    if getattr(args, "record", None):
        config["cassette"]["record"] = args.record
    if getattr(args, "replay", None):
        config["cassette"]["replay"] = args.replay
    return config


def _cmd_run(args: argparse.Namespace) -> int:
    config = _apply_overrides(load_config(args.config), args)
    report = run_from_config(config, args.output_dir)
    solved = report.totals["tasks_solved"]
    print(f"run {report.run_id} [{report.mode_label}]: {solved}/{report.totals['tasks']} tasks solved")
    print(f"report written to {Path(args.output_dir) / 'report.json'}")
    return 0


def _cmd_replay(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    config["cassette"]["record"] = None
    config["cassette"]["replay"] = args.cassette
    report = run_from_config(config, args.output_dir)
    print(f"replayed run {report.run_id}; report written to {args.output_dir}")
    return 0


def _cmd_report(args: argparse.Namespace) -> int:
    data = read_report(args.report)
    renders = {
        "curve.csv": curve_csv(data),
        "failure_histogram.csv": failure_histogram_csv(data),
        "summary.csv": summary_csv(data),
    }
    if data.get("confusion"):
        renders["confusion.csv"] = confusion_csv(data)
    if args.stdout:
        for name, text in renders.items():
            print(f"# {name}")
            print(text)
    else:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for name, text in renders.items():
            (out / name).write_text(text, encoding="utf-8")
        print(f"wrote {', '.join(renders)} to {out}")
    return 0


def _cmd_validate(args: argparse.Namespace) -> int:
    load_config(args.config)
    print("configuration is valid")
    return 0


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reflexion",
        description="Run verbal-reinforcement agent suites and render their reports.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a configured suite")
    run.add_argument("--config", required=True)
    run.add_argument("--output-dir", required=True)
    run.add_argument("--ablation", choices=["none", "no-test-gen", "no-self-reflection", "base"])
    run.add_argument("--reflector", choices=["self_reflection", "episodic_only", "none"])
    run.add_argument("--max-trials", type=int, dest="max_trials")
    run.add_argument("--omega", type=int)
    run.add_argument("--parallelism", type=int)
    run.add_argument("--record", help="record provider calls to this cassette")
    run.add_argument("--replay", help="serve provider calls from this cassette")
    run.set_defaults(func=_cmd_run)

    replay = sub.add_parser("replay", help="re-run a suite from a recorded cassette")
    replay.add_argument("--config", required=True)
    replay.add_argument("--cassette", required=True)
    replay.add_argument("--output-dir", required=True)
    replay.set_defaults(func=_cmd_replay)

    report = sub.add_parser("report", help="render CSV series from a report file")
    report.add_argument("--report", required=True)
    report.add_argument("--out", default="report_csv")
    report.add_argument("--stdout", action="store_true")
    report.set_defaults(func=_cmd_report)

    validate = sub.add_parser("validate-config", help="check a config file and exit")
    validate.add_argument("--config", required=True)
    validate.set_defaults(func=_cmd_validate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # component failure
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
