from __future__ import annotations

import logging
from collections.abc import Iterable
from dataclasses import replace

from ovigo.models.enums import EdgeKind, NodeKind
from ovigo.models.errors import ChatError
from ovigo.models.scene import LocationNode, RoomNode, SceneGraph
from ovigo.reasoning.client import ChatClient
from ovigo.reasoning.prompts import tag_messages

logger = logging.getLogger(__name__)

UNKNOWN_ROOM = "unknown room"
UNKNOWN_LOCATION = "unknown location"

_FALLBACK = {NodeKind.ROOM: UNKNOWN_ROOM, NodeKind.LOCATION: UNKNOWN_LOCATION}


def normalize_tag(text: str) -> str:
    """First non-empty line, unquoted, without a trailing period, lowercased."""
    line = next((ln.strip() for ln in text.strip().splitlines() if ln.strip()), "")
    line = line.strip("\"'` ").rstrip(".").strip()
    return line.lower()


def _assign(kind: NodeKind, node_id: int, contents: Iterable[str], llm: ChatClient | None) -> str:
    fallback = _FALLBACK[kind]
    items = sorted({c for c in contents if c})
    if not items or llm is None:
        return fallback
    try:
        answer = normalize_tag(llm.send(tag_messages(kind, items), stage=f"tag:{kind.value} {node_id}"))
    except ChatError as exc:
        logger.warning("Tagging %s %d failed (%s); using %r", kind.value, node_id, exc.message, fallback)
        return fallback
    if not answer:
        logger.warning("Empty tag for %s %d; using %r", kind.value, node_id, fallback)
        return fallback
    return answer


def assign_room_tag(room: RoomNode, contents: Iterable[str], llm: ChatClient | None) -> str:
    return _assign(NodeKind.ROOM, room.id, contents, llm)


def assign_location_tag(loc: LocationNode, object_tags: Iterable[str], llm: ChatClient | None) -> str:
    return _assign(NodeKind.LOCATION, loc.id, object_tags, llm)


def tag_graph(graph: SceneGraph, llm: ChatClient | None) -> SceneGraph:
    """Tag locations from their objects, then rooms from their objects and the fresh location tags."""
    locations: dict[int, LocationNode] = {}
    for loc in graph.locations.values():
        obj_ids = graph.children(EdgeKind.LO, {loc.id})
        tags = [graph.objects[i].primary_tag for i in obj_ids]
        locations[loc.id] = replace(loc, tag=assign_location_tag(loc, tags, llm))

    rooms: dict[int, RoomNode] = {}
    for room in graph.rooms.values():
        contents = [graph.objects[i].primary_tag for i in graph.children(EdgeKind.RO, {room.id})]
        contents.extend(locations[i].tag for i in graph.children(EdgeKind.RL, {room.id}))
        contents = [c for c in contents if c != UNKNOWN_LOCATION]
        rooms[room.id] = replace(room, tag=assign_room_tag(room, contents, llm))

    return replace(graph, rooms=rooms, locations=locations)
