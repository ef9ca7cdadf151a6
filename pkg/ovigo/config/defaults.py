from __future__ import annotations

from ovigo.config.schema import PipelineConfig

ENV_ENDPOINT = "OVIGO_LLM_ENDPOINT"
ENV_API_KEY = "OVIGO_LLM_API_KEY"
ENV_MODEL = "OVIGO_LLM_MODEL"


def default_config() -> PipelineConfig:
    return PipelineConfig()
