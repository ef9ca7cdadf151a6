from __future__ import annotations

import json
import os
from collections.abc import Mapping
from dataclasses import replace
from typing import Any

from result import Err, Ok, Result

from ovigo.config.defaults import ENV_ENDPOINT, ENV_MODEL, default_config
from ovigo.config.schema import PipelineConfig
from ovigo.services.fs import DEFAULT_FS, FileSystem


def load_config(path: str | None = None, fs: FileSystem = DEFAULT_FS) -> Result[PipelineConfig, str]:
    """Read a JSON config over the defaults. No path means defaults only."""
    if path is None:
        return Ok(default_config())
    resolved = fs.expanduser(path)
    if not fs.exists(resolved):
        return Err(f"Config file {resolved} does not exist.")

    try:
        payload = json.loads(fs.read_text(resolved))
    except Exception as exc:  # noqa: BLE001
        return Err(f"Failed reading config at {resolved}: {exc}.")
    if not isinstance(payload, dict):
        return Err(f"Config at {resolved} must be a JSON object.")
    try:
        return Ok(PipelineConfig.from_dict(payload, default_config()))
    except ValueError as exc:
        return Err(f"Invalid config at {resolved}: {exc}.")


def apply_env(config: PipelineConfig, env: Mapping[str, str] | None = None) -> PipelineConfig:
    env = os.environ if env is None else env
    overrides: dict[str, Any] = {}
    if env.get(ENV_ENDPOINT):
        overrides["llm_endpoint"] = env[ENV_ENDPOINT]
    if env.get(ENV_MODEL):
        overrides["llm_model"] = env[ENV_MODEL]
    return replace(config, **overrides) if overrides else config


def apply_overrides(config: PipelineConfig, assignments: list[str]) -> Result[PipelineConfig, str]:
    """Apply ``key=value`` CLI assignments; values are parsed as JSON, falling back to plain strings."""
    payload: dict[str, Any] = {}
    for item in assignments:
        key, sep, raw = item.partition("=")
        if not sep or not key:
            return Err(f"Override {item!r} must look like key=value.")
        try:
            payload[key.strip()] = json.loads(raw)
        except json.JSONDecodeError:
            payload[key.strip()] = raw
    if not payload:
        return Ok(config)
    try:
        return Ok(PipelineConfig.from_dict(payload, config))
    except ValueError as exc:
        return Err(f"Invalid override: {exc}.")


def sample_config_json() -> str:
    return json.dumps(default_config().to_dict(), indent=2, sort_keys=True)
