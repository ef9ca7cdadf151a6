from __future__ import annotations

import hashlib
from functools import cache
from importlib import resources
from string import Template

from ovigo.models.enums import NodeKind
from ovigo.models.reasoning import ChatMessage

TEMPLATE_NAMES = (
    "system",
    "select_layer",
    "select_targets",
    "ground",
    "repair",
    "tag_room",
    "tag_location",
)


@cache
def load_template(name: str) -> Template:
    text = resources.files("ovigo.reasoning").joinpath("templates", f"{name}.txt").read_text(encoding="utf-8")
    return Template(text)


def template_digests() -> dict[str, str]:
    return {name: hashlib.sha256(load_template(name).template.encode("utf-8")).hexdigest() for name in TEMPLATE_NAMES}


def _conversation(user_template: str, **fields: str) -> list[ChatMessage]:
    return [
        ChatMessage.system(load_template("system").template.strip()),
        ChatMessage.user(load_template(user_template).substitute(**fields).strip()),
    ]


def layer_selection_messages(kind: NodeKind, query: str, entities: str) -> list[ChatMessage]:
    return _conversation("select_layer", query=query, layer=kind.plural, entities=entities)


def target_selection_messages(query: str, room_id: int, entities: str) -> list[ChatMessage]:
    return _conversation("select_targets", query=query, room=str(room_id), entities=entities)


def grounding_messages(query: str, groups: str) -> list[ChatMessage]:
    return _conversation("ground", query=query, groups=groups)


def repair_messages(raw: str) -> list[ChatMessage]:
    return _conversation("repair", raw=raw)


def tag_messages(kind: NodeKind, contents: list[str]) -> list[ChatMessage]:
    name = "tag_room" if kind is NodeKind.ROOM else "tag_location"
    return _conversation(name, contents=", ".join(contents))
