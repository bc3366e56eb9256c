"""Resolution of a run configuration from defaults, environment, config file and flags."""

import json
import os
from typing import Any, Mapping

from pydantic import ValidationError

from data.models import RunConfig

OUTPUT_DIR_ENV = "TST_OUTPUT_DIR"

# Shorthand keys accepted in config files, mapped to RunConfig fields
_ALIASES = {
    "seed": "master_seed",
    "trials": "n_trials",
    "variant": "lower_bound_variant",
    "per_trial": "per_trial_path",
    "output": "summary_path",
}


class ConfigError(ValueError):
    """A config or grid file is not valid JSON or has the wrong shape."""


def load_json_file(path: str) -> Any:
    """Parse a JSON file; syntax errors report line and column."""
    with open(path, encoding="utf-8") as f:
        text = f.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}:{e.lineno}:{e.colno}: {e.msg}") from e


def _canonical(values: Mapping[str, Any]) -> dict[str, Any]:
    return {_ALIASES.get(key, key).replace("-", "_"): value for key, value in values.items()}


def load_config_file(path: str) -> dict[str, Any]:
    data = load_json_file(path)
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a JSON object, got {type(data).__name__}")
    return _canonical(data)


def resolve_run_config(file_values: Mapping[str, Any] | None = None, flag_values: Mapping[str, Any] | None = None) -> RunConfig:
    """
    Merge sources in increasing precedence: built-in defaults, the
    environment (output directory only), the config file, explicit flags.
    Flags left at None do not override anything.
    """
    merged: dict[str, Any] = {}
    if env_dir := os.getenv(OUTPUT_DIR_ENV):
        merged["output_dir"] = env_dir
    merged.update(_canonical(file_values or {}))
    merged.update({key: value for key, value in _canonical(flag_values or {}).items() if value is not None})
    return RunConfig.model_validate(merged)


def output_path(config: RunConfig, path: str | None) -> str | None:
    """Place relative output paths under the configured output directory."""
    if path is None or config.output_dir is None or os.path.isabs(path):
        return path
    return os.path.join(config.output_dir, path)


def load_grid_file(path: str) -> list[Any]:
    """A sweep grid: a JSON list of (l, s, eps, c) arrays or objects, or {"grid": [...]}."""
    data = load_json_file(path)
    if isinstance(data, dict):
        data = data.get("grid")
    if not isinstance(data, list) or not data:
        raise ConfigError(f"{path}: expected a non-empty list of grid entries")
    for i, entry in enumerate(data):
        if not isinstance(entry, (list, dict)):
            raise ConfigError(f"{path}: grid entry {i} must be an array or an object, got {type(entry).__name__}")
    return data


def describe_validation_error(e: ValidationError) -> list[str]:
    """One 'field: message' line per validation error."""
    lines = []
    for err in e.errors():
        location = ".".join(str(part) for part in err["loc"]) or "config"
        lines.append(f"{location}: {err['msg']}")
    return lines
