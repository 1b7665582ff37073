"""Run configuration: strict schema, defaults, path resolution.

Unknown keys are rejected by name (runs can be expensive against live
endpoints, so configs fail fast). Relative paths are resolved against the
config file's directory. The cassette block is excluded from the config
snapshot embedded in reports so a recorded run and its replay produce
identical report bytes.
"""

from __future__ import annotations

import copy
import hashlib
import json
import os
from pathlib import Path
from typing import Any, Optional

import yaml

from .gateway import API_KEY_ENV_VAR


class ConfigError(ValueError):
    pass


_SCHEMA: dict[str, Any] = {
    "run_id": None,
    "suite": "decision",
    "strategy": None,  # default depends on suite
    "grammar": None,  # default depends on suite
    "evaluator": None,  # default depends on suite
    "reflector": "self_reflection",
    "ablation": "none",
    "omega": None,  # default depends on suite
    "max_trials": None,  # default depends on suite
    "consecutive_fail_stop": None,
    "max_steps": 20,
    "few_shot_count": None,
    "char_budget": 24_000,
    "temperature": 0.0,
    "max_tokens": 512,
    "task_filter": None,
    "tasks": None,
    "corpus": None,
    "problems": None,
    "parallelism": 1,
    "templates": {
        "layout": None,
        "actor_few_shot": None,
        "reflection_few_shot": None,
        "system_preamble": None,
        "memory_header": None,
        "task_header": None,
    },
    "provider": {
        "kind": "mock",
        "script": None,
        "base_url": None,
        "model": None,
        "retries": 2,
        "api_key": None,
    },
    "cassette": {
        "record": None,
        "replay": None,
    },
    "sandbox": {
        "kind": "scripted",
        "script": None,
        "command": None,
    },
}

_SUITE_DEFAULTS = {
    "decision": {
        "strategy": "react",
        "grammar": "plain",
        "evaluator": "heuristic",
        "omega": 3,
        "max_trials": 12,
        "consecutive_fail_stop": None,
    },
    "reasoning": {
        "strategy": "react",
        "grammar": "bracketed",
        "evaluator": "exact_match",
        "omega": 3,
        "max_trials": 10,
        "consecutive_fail_stop": 3,
    },
    "programming": {
        "strategy": "cot",
        "grammar": "plain",
        "evaluator": "internal_suite",
        "omega": 1,
        "max_trials": 4,
        "consecutive_fail_stop": None,
    },
}

_CHOICES = {
    "suite": {"decision", "reasoning", "programming"},
    "strategy": {"react", "cot"},
    "grammar": {"plain", "bracketed"},
    "evaluator": {"heuristic", "exact_match", "llm", "internal_suite"},
    "reflector": {"self_reflection", "episodic_only", "none"},
    "ablation": {"none", "no-test-gen", "no-self-reflection", "base"},
    "provider.kind": {"mock", "http"},
    "sandbox.kind": {"scripted", "subprocess"},
}

_PATH_KEYS = (
    ("tasks",),
    ("corpus",),
    ("problems",),
    ("templates", "layout"),
    ("templates", "actor_few_shot"),
    ("templates", "reflection_few_shot"),
    ("provider", "script"),
    ("cassette", "record"),
    ("cassette", "replay"),
    ("sandbox", "script"),
)


def _reject_unknown(data: dict, schema: dict, prefix: str = "") -> None:
    for key in data:
        if key not in schema:
            raise ConfigError(f"unknown configuration key: {prefix}{key}")
        if isinstance(schema[key], dict) and isinstance(data[key], dict):
            _reject_unknown(data[key], schema[key], prefix=f"{prefix}{key}.")


def _merged(defaults: dict, data: dict) -> dict:
    result = copy.deepcopy(defaults)
    for key, value in data.items():
        if isinstance(result.get(key), dict) and isinstance(value, dict):
            result[key] = _merged(result[key], value)
        else:
            result[key] = value
    return result


def _check_choice(config: dict, dotted: str) -> None:
    keys = dotted.split(".")
    value: Any = config
    for key in keys:
        value = value[key]
    if value is not None and value not in _CHOICES[dotted]:
        allowed = ", ".join(sorted(_CHOICES[dotted]))
        raise ConfigError(f"{dotted} must be one of: {allowed} (got {value!r})")


def validate_config(data: dict) -> dict:
    """Apply defaults and validate; returns the normalized config dict."""
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a mapping")
    _reject_unknown(data, _SCHEMA)
    config = _merged(_SCHEMA, data)

    for dotted in _CHOICES:
        _check_choice(config, dotted)

    suite = config["suite"]
    for key, value in _SUITE_DEFAULTS[suite].items():
        if config[key] is None and key != "consecutive_fail_stop":
            config[key] = value
    if "consecutive_fail_stop" not in data:
        config["consecutive_fail_stop"] = _SUITE_DEFAULTS[suite]["consecutive_fail_stop"]

    for key in ("omega", "max_trials", "max_steps", "parallelism", "max_tokens"):
        if not isinstance(config[key], int) or config[key] < 1:
            raise ConfigError(f"{key} must be a positive integer")
    if config["consecutive_fail_stop"] is not None and (
        not isinstance(config["consecutive_fail_stop"], int) or config["consecutive_fail_stop"] < 1
    ):
        raise ConfigError("consecutive_fail_stop must be a positive integer or null")
    if not 0.0 <= float(config["temperature"]) <= 2.0:
        raise ConfigError("temperature must lie in [0, 2]")

    if suite == "decision" and not config["tasks"]:
        raise ConfigError("decision suites need a tasks path")
    if suite == "reasoning" and (not config["tasks"] or not config["corpus"]):
        raise ConfigError("reasoning suites need tasks and corpus paths")
    if suite == "programming" and not config["problems"]:
        raise ConfigError("programming suites need a problems path")

    provider = config["provider"]
    if provider["kind"] == "mock" and not provider["script"] and not config["cassette"]["replay"]:
        raise ConfigError("mock provider needs a script path (or a replay cassette)")
    if provider["kind"] == "http" and not (provider["base_url"] and provider["model"]):
        raise ConfigError("http provider needs base_url and model")

    sandbox = config["sandbox"]
    if suite == "programming":
        if sandbox["kind"] == "scripted" and not sandbox["script"]:
            raise ConfigError("scripted sandbox needs a script path")
        if sandbox["kind"] == "subprocess" and not sandbox["command"]:
            raise ConfigError("subprocess sandbox needs a command list")

    return config


def _resolve(config: dict, base: Path) -> None:
    for keys in _PATH_KEYS:
        node: Any = config
        for key in keys[:-1]:
            node = node[key]
        value = node[keys[-1]]
        if value:
            node[keys[-1]] = str((base / value).resolve()) if not os.path.isabs(value) else value


def load_config(path: str | Path) -> dict:
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    config = validate_config(data)
    _resolve(config, path.parent)
    return config


def check_credentials(config: dict) -> None:
    """Fail before any task starts when the endpoint cannot be reached."""
    provider = config["provider"]
    if provider["kind"] == "http" and config["cassette"]["replay"] is None:
        if not provider.get("api_key") and not os.environ.get(API_KEY_ENV_VAR):
            raise ConfigError(
                f"http provider configured but {API_KEY_ENV_VAR} is not set "
                "and no api_key was given"
            )


def config_fingerprint(config: dict) -> dict:
    """Config snapshot for reports: volatile I/O blocks removed."""
    snapshot = copy.deepcopy(config)
    snapshot.pop("cassette", None)
    return snapshot


def derive_run_id(config: dict) -> str:
    if config.get("run_id"):
        return str(config["run_id"])
    canonical = json.dumps(config_fingerprint(config), sort_keys=True, default=str)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]
