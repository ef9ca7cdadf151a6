from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import replace
from typing import Any

import numpy as np

from ovigo.geometry.polygons import points_in_polygon
from ovigo.models.enums import EdgeKind
from ovigo.models.errors import EmptyHierarchy
from ovigo.models.scene import BUILDING_ID, FloorNode, InterEdge, LocationNode, ObjectNode, RoomNode, SceneGraph

logger = logging.getLogger(__name__)

LOCATION_OVERLAP_MIN = 0.5


def _best_parent(fractions: dict[int, float]) -> int | None:
    """Largest positive fraction wins; ties go to the lower parent ID."""
    if not fractions:
        return None
    best = min(fractions, key=lambda pid: (-fractions[pid], pid))
    return best if fractions[best] > 0 else None


def _room_fractions(obj: ObjectNode, rooms: Sequence[RoomNode], floors: dict[int, FloorNode]) -> dict[int, float]:
    pts = obj.cloud.points
    if pts.shape[0] == 0:
        return {}
    out: dict[int, float] = {}
    for room in rooms:
        floor = floors[room.floor_index]
        in_slab = (pts[:, 2] >= floor.z_low) & (pts[:, 2] <= floor.z_high)
        hit = in_slab & room.mask.contains_xy(pts[:, :2])
        out[room.id] = float(hit.mean())
    return out


def _location_fractions(
    obj: ObjectNode, locations: Sequence[LocationNode], floors: dict[int, FloorNode]
) -> dict[int, float]:
    pts = obj.cloud.points
    if pts.shape[0] == 0:
        return {}
    out: dict[int, float] = {}
    for loc in locations:
        floor = floors[loc.floor_index]
        in_slab = (pts[:, 2] >= floor.z_low) & (pts[:, 2] <= floor.z_high)
        if not in_slab.any():
            out[loc.id] = 0.0
            continue
        hit = np.zeros(pts.shape[0], dtype=bool)
        hit[in_slab] = points_in_polygon(loc.polygon, pts[in_slab, :2])
        out[loc.id] = float(hit.mean())
    return out


def _room_floor(room: RoomNode, floors: dict[int, FloorNode]) -> int:
    z = room.cloud.z
    if z.shape[0]:
        fractions = {fid: float(((z >= f.z_low) & (z <= f.z_high)).mean()) for fid, f in floors.items()}
        best = _best_parent(fractions)
        if best is not None:
            return best
    if room.floor_index not in floors:
        raise EmptyHierarchy(f"Room {room.id} references missing floor {room.floor_index}", room_id=room.id)
    return room.floor_index


def build_graph(
    floors: Sequence[FloorNode],
    rooms: Sequence[RoomNode],
    locations: Sequence[LocationNode],
    objects: Sequence[ObjectNode],
    *,
    building_tag: str = "building",
    config: dict[str, Any] | None = None,
    location_overlap_min: float = LOCATION_OVERLAP_MIN,
) -> SceneGraph:
    """Wire layer outputs into the hierarchy by spatial containment."""
    if not floors:
        raise EmptyHierarchy("Scene has no floors")
    floor_table = {f.id: f for f in sorted(floors, key=lambda f: f.id)}
    room_table = {r.id: r for r in sorted(rooms, key=lambda r: r.id)}
    edges: list[InterEdge] = [InterEdge(EdgeKind.BF, BUILDING_ID, fid) for fid in floor_table]

    for room in room_table.values():
        edges.append(InterEdge(EdgeKind.FR, _room_floor(room, floor_table), room.id))

    loc_table: dict[int, LocationNode] = {}
    for loc in sorted(locations, key=lambda loc: loc.id):
        if loc.room_id not in room_table:
            raise EmptyHierarchy(f"Location {loc.id} references missing room {loc.room_id}", location_id=loc.id)
        loc_table[loc.id] = loc
        edges.append(InterEdge(EdgeKind.RL, loc.room_id, loc.id))

    obj_table: dict[int, ObjectNode] = {}
    if objects and not room_table:
        raise EmptyHierarchy("Objects exist but no room can hold them")
    room_list = list(room_table.values())
    loc_list = list(loc_table.values())
    for obj in sorted(objects, key=lambda o: o.id):
        room_id = _best_parent(_room_fractions(obj, room_list, floor_table))
        if room_id is None:
            room_id = min(room_list, key=lambda r: (math.dist(r.bbox.center, obj.bbox.center), r.id)).id
            logger.warning(
                "Object %d (%s) lies in no room; attached to nearest room %d", obj.id, obj.primary_tag, room_id
            )
        edges.append(InterEdge(EdgeKind.RO, room_id, obj.id))

        location_id: int | None = None
        fractions = _location_fractions(obj, loc_list, floor_table)
        best = _best_parent(fractions)
        if best is not None and fractions[best] >= location_overlap_min:
            location_id = best
            edges.append(InterEdge(EdgeKind.LO, best, obj.id))
        obj_table[obj.id] = replace(obj, room_id=room_id, location_id=location_id)

    return SceneGraph(
        building_tag=building_tag,
        floors=floor_table,
        rooms=room_table,
        locations=loc_table,
        objects=obj_table,
        edges=tuple(sorted(edges)),
        config=dict(config or {}),
    )
