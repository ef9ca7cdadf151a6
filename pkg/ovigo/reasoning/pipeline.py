"""Layer-by-layer narrowing of the scene graph down to one grounded object."""

from __future__ import annotations

import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from typing import Any

from result import Err, Ok, Result

from ovigo.graph.textualize import textualize_group, textualize_layer, textualize_objects
from ovigo.models.enums import EdgeKind, NodeKind
from ovigo.models.errors import GroundingError, OvigoError, RepairFailed, SelectionError, StageError
from ovigo.models.reasoning import EnrichedGroup, GroundingQuery, GroundingResult
from ovigo.models.scene import ObjectNode, SceneGraph
from ovigo.reasoning.client import ChatClient
from ovigo.reasoning.edges import VERTICAL_MARGIN, EdgeStats, enrich_subgraph
from ovigo.reasoning.jsonparse import RepairBudget, repair_json
from ovigo.reasoning.prompts import grounding_messages, layer_selection_messages, target_selection_messages

logger = logging.getLogger(__name__)


def _int_list(value: Any, key: str, stage: str) -> list[int]:
    if not isinstance(value, list):
        raise SelectionError(f"{stage}: {key!r} must be a list of IDs", stage=stage)
    out: list[int] = []
    for item in value:
        if isinstance(item, bool) or not isinstance(item, int):
            logger.warning("%s: ignoring non-integer ID %r", stage, item)
            continue
        out.append(item)
    return out


def _parse(raw: str, llm: ChatClient, budget: RepairBudget, stage: str) -> Any:
    try:
        return repair_json(raw, llm, budget=budget, stage=stage)
    except RepairFailed as exc:
        raise SelectionError(f"{stage}: response is not valid JSON", stage=stage, raw=exc.raw) from exc


def _keep_known(ids: Iterable[int], allowed: set[int], stage: str) -> list[int]:
    kept: list[int] = []
    for i in ids:
        if i not in allowed:
            logger.warning("%s: dropping unknown ID %d", stage, i)
        elif i not in kept:
            kept.append(i)
    return sorted(kept)


def select_related(
    graph: SceneGraph,
    kind: NodeKind,
    query: str,
    llm: ChatClient,
    *,
    candidates: Iterable[int] | None = None,
    budget: RepairBudget | None = None,
) -> list[int]:
    """IDs of *kind* entities the model relates to *query*, restricted to *candidates*."""
    table = graph.layer(kind)
    allowed = set(table) if candidates is None else {i for i in candidates if i in table}
    if not allowed:
        return []
    stage = f"select:{kind.plural}"
    raw = llm.send(layer_selection_messages(kind, query, textualize_layer(graph, kind, allowed)), stage=stage)
    payload = _parse(raw, llm, budget or RepairBudget(), stage)
    ids = payload.get("ids") if isinstance(payload, dict) else payload
    return _keep_known(_int_list(ids, "ids", stage), allowed, stage)


def select_targets_anchors(
    objects: Sequence[ObjectNode],
    room_id: int,
    query: str,
    llm: ChatClient,
    *,
    budget: RepairBudget | None = None,
) -> tuple[list[int], list[int]]:
    if not objects:
        raise SelectionError(f"Room {room_id} has no objects to choose from", room_id=room_id)
    stage = f"targets:room {room_id}"
    allowed = {o.id for o in objects}
    raw = llm.send(target_selection_messages(query, room_id, textualize_objects(objects)), stage=stage)
    payload = _parse(raw, llm, budget or RepairBudget(), stage)
    if not isinstance(payload, dict):
        raise SelectionError(f"{stage}: expected an object with target_ids and anchor_ids", stage=stage)
    targets = _keep_known(_int_list(payload.get("target_ids", []), "target_ids", stage), allowed, stage)
    anchors = _keep_known(_int_list(payload.get("anchor_ids", []), "anchor_ids", stage), allowed, stage)
    # An ID listed on both sides stays a target.
    anchors = [a for a in anchors if a not in set(targets)]
    if not targets:
        raise SelectionError(f"{stage}: no valid target IDs", stage=stage, room_id=room_id)
    return targets, anchors


def ground(
    query: str, groups: Sequence[EnrichedGroup], llm: ChatClient, *, budget: RepairBudget | None = None
) -> GroundingResult:
    if not groups:
        raise GroundingError("No object groups survived selection")
    text = "\n\n".join(textualize_group(g) for g in groups)
    raw = llm.send(grounding_messages(query, text), stage="ground")
    try:
        payload = repair_json(raw, llm, budget=budget or RepairBudget(), stage="ground")
    except RepairFailed as exc:
        raise GroundingError("Grounding response is not valid JSON", raw=exc.raw, repaired=exc.repaired) from exc
    if not isinstance(payload, dict):
        raise GroundingError("Grounding response must be a JSON object", raw=raw)
    object_id = payload.get("object_id")
    if isinstance(object_id, bool) or not isinstance(object_id, int):
        raise GroundingError(f"object_id must be an integer, got {object_id!r}", raw=raw)
    nodes = {n.id: n for g in groups for n in g.nodes}
    if object_id not in nodes:
        raise GroundingError(f"Object {object_id} is not among the offered nodes", object_id=object_id, raw=raw)
    return GroundingResult(
        object_id=object_id,
        bbox=nodes[object_id].bbox,
        reasoning=str(payload.get("reasoning", "")),
        explanation=str(payload.get("explanation", "")),
        raw_response=raw,
    )


@dataclass(slots=True)
class PipelineTrace:
    """What each stage kept; filled in as the query runs."""

    floors: list[int] = field(default_factory=list)
    rooms: list[int] = field(default_factory=list)
    locations: list[int] | None = None
    groups: list[EnrichedGroup] = field(default_factory=list)
    edge_stats: EdgeStats = field(default_factory=EdgeStats)
    # Rooms whose target selection failed, with the reason.
    skipped_rooms: dict[int, str] = field(default_factory=dict)


def _room_objects(graph: SceneGraph, room_id: int, locations: list[int] | None) -> list[ObjectNode]:
    objs = [graph.objects[i] for i in graph.children(EdgeKind.RO, {room_id})]
    if locations is None:
        return objs
    chosen = set(locations)
    return [o for o in objs if o.location_id is None or o.location_id in chosen]


def _run(graph: SceneGraph, query: str, llm: ChatClient, margin: float, trace: PipelineTrace) -> GroundingResult:
    budget = RepairBudget()

    trace.floors = select_related(graph, NodeKind.FLOOR, query, llm, budget=budget)
    if not trace.floors:
        raise SelectionError("No floor relates to the query", stage="select:floors")

    room_candidates = graph.children(EdgeKind.FR, set(trace.floors))
    trace.rooms = select_related(graph, NodeKind.ROOM, query, llm, candidates=room_candidates, budget=budget)
    if not trace.rooms:
        raise SelectionError("No room relates to the query", stage="select:rooms")

    loc_candidates = graph.children(EdgeKind.RL, set(trace.rooms))
    if loc_candidates:
        trace.locations = select_related(
            graph, NodeKind.LOCATION, query, llm, candidates=loc_candidates, budget=budget
        )

    last_error: SelectionError | None = None
    for room_id in trace.rooms:
        objs = _room_objects(graph, room_id, trace.locations)
        if not objs:
            logger.debug("Room %d has no candidate objects", room_id)
            continue
        try:
            targets, anchors = select_targets_anchors(objs, room_id, query, llm, budget=budget)
        except SelectionError as exc:
            logger.warning("Dropping room %d group: %s", room_id, exc.message)
            trace.skipped_rooms[room_id] = exc.message
            last_error = exc
            continue
        by_id = {o.id: o for o in objs}
        viewpoint = graph.rooms[room_id].mask.centroid()
        trace.groups.append(
            enrich_subgraph(
                room_id,
                [by_id[i] for i in targets],
                [by_id[i] for i in anchors],
                viewpoint,
                margin=margin,
                stats=trace.edge_stats,
            )
        )
    if not trace.groups:
        if last_error is not None:
            context = {**last_error.context, "stage": "select_targets_anchors", "skipped_rooms": trace.skipped_rooms}
            raise SelectionError(last_error.message, **context)
        raise SelectionError("No object group survived target selection", stage="select_targets_anchors")

    return ground(query, trace.groups, llm, budget=budget)


def run_pipeline(
    graph: SceneGraph,
    query: GroundingQuery | str,
    llm: ChatClient,
    *,
    margin: float = VERTICAL_MARGIN,
    trace: PipelineTrace | None = None,
) -> Result[GroundingResult, StageError]:
    text = query.text if isinstance(query, GroundingQuery) else GroundingQuery(query).text
    trace = trace if trace is not None else PipelineTrace()
    try:
        result = _run(graph, text, llm, margin, trace)
    except OvigoError as exc:
        stage = str(exc.context.get("stage") or _stage_of(exc))
        return Err(StageError.from_exception(stage, exc))
    logger.info("Grounded %r to object %d", text, result.object_id)
    return Ok(result)


def _stage_of(exc: OvigoError) -> str:
    if isinstance(exc, GroundingError):
        return "ground"
    return "reasoning"
