"""Scripted answers for the fixture transcript.

The policy plays the part of the language model while a fixture is generated:
tag prompts are answered from keyword rules and every pipeline prompt of a
planned query is answered from that query's plan.
"""

from __future__ import annotations

import json
import logging
import re
from collections.abc import Sequence
from dataclasses import dataclass

from ovigo.fixtures.catalog import LOCATION_RULES, ROOM_RULES
from ovigo.models.enums import ChatRole
from ovigo.models.errors import UnexpectedRequest
from ovigo.models.reasoning import ChatMessage

logger = logging.getLogger(__name__)

FALLBACK_ROOM = "storage room"
FALLBACK_LOCATION = "open area"

_OFFERED = re.compile(r"^(\d+): (.+?) \[", re.MULTILINE)
_REQUEST = re.compile(r"^User request: (.+)$", re.MULTILINE)
_CONTENTS = re.compile(r"^Contents: (.*)$", re.MULTILINE)


@dataclass(slots=True, frozen=True)
class QueryPlan:
    """The answers a careful model would give for one query, in graph node IDs."""

    text: str
    floor_id: int
    room_id: int
    location_id: int | None
    target_tag: str
    object_id: int
    anchor_id: int | None = None
    # Wrap the grounding answer in prose so the JSON repair path runs.
    wrap_ground: bool = False


def _user_text(messages: Sequence[ChatMessage]) -> str:
    return next((m.content for m in messages if m.role is ChatRole.USER), "")


def _classify(text: str, rules: tuple[tuple[frozenset[str], str], ...], fallback: str) -> str:
    match = _CONTENTS.search(text)
    contents = {c.strip() for c in match.group(1).split(",")} if match else set()
    for keys, tag in rules:
        if keys & contents:
            return tag
    return fallback


class FixturePolicy:
    def __init__(self) -> None:
        self._plans: dict[str, QueryPlan] = {}

    def add(self, plan: QueryPlan) -> None:
        self._plans[plan.text] = plan

    def _plan_for(self, stage: str, text: str) -> QueryPlan:
        match = _REQUEST.search(text)
        plan = self._plans.get(match.group(1).strip()) if match else None
        if plan is None:
            raise UnexpectedRequest(f"No plan answers the {stage} prompt", stage=stage)
        return plan

    def __call__(self, stage: str, messages: Sequence[ChatMessage]) -> str:
        text = _user_text(messages)
        if stage.startswith("tag:room"):
            return _classify(text, ROOM_RULES, FALLBACK_ROOM)
        if stage.startswith("tag:location"):
            return _classify(text, LOCATION_RULES, FALLBACK_LOCATION)
        if stage.startswith("repair:"):
            start, end = text.find("{"), text.rfind("}")
            return text[start : end + 1] if 0 <= start < end else text

        plan = self._plan_for(stage, text)
        if stage == "select:floors":
            return json.dumps({"ids": [plan.floor_id]})
        if stage == "select:rooms":
            return json.dumps({"ids": [plan.room_id]})
        if stage == "select:locations":
            return json.dumps({"ids": [] if plan.location_id is None else [plan.location_id]})
        if stage.startswith("targets:"):
            offered = {int(i): tag for i, tag in _OFFERED.findall(text)}
            targets = sorted(i for i, tag in offered.items() if tag == plan.target_tag)
            anchors = [plan.anchor_id] if plan.anchor_id in offered and plan.anchor_id not in targets else []
            return json.dumps({"target_ids": targets, "anchor_ids": anchors})
        if stage == "ground":
            answer = json.dumps(
                {
                    "reasoning": f"The request names a {plan.target_tag}; object {plan.object_id} fits its relations.",
                    "explanation": f"Object {plan.object_id} is the {plan.target_tag} the request describes.",
                    "object_id": plan.object_id,
                }
            )
            return f"Answer: {answer}" if plan.wrap_ground else answer
        logger.debug("Unplanned stage %s", stage)
        raise UnexpectedRequest(f"The fixture policy does not answer {stage} prompts", stage=stage)
