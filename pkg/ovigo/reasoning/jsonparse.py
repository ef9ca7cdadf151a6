from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from typing import Any

from ovigo.models.errors import RepairFailed
from ovigo.reasoning.client import ChatClient
from ovigo.reasoning.prompts import repair_messages

logger = logging.getLogger(__name__)


@dataclass(slots=True)
class RepairBudget:
    """Repair calls still allowed for one query."""

    remaining: int = 1


def strict_json(raw: str) -> Any:
    return json.loads(raw.strip())


def repair_json(raw: str, llm: ChatClient, *, budget: RepairBudget | None = None, stage: str = "repair") -> Any:
    """Parse *raw*, spending at most one repair call when it does not parse as-is."""
    try:
        return strict_json(raw)
    except json.JSONDecodeError:
        pass
    budget = budget if budget is not None else RepairBudget()
    if budget.remaining <= 0:
        raise RepairFailed("Response is not valid JSON and the repair budget is spent", raw=raw, repaired="")
    budget.remaining -= 1
    logger.info("Response for %s is not valid JSON; asking for a repair", stage)
    repaired = llm.send(repair_messages(raw), stage=f"repair:{stage}")
    try:
        return strict_json(repaired)
    except json.JSONDecodeError as exc:
        raise RepairFailed(f"Repaired response still does not parse: {exc}", raw=raw, repaired=repaired) from exc
