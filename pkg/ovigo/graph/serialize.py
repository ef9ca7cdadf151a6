"""Scene-graph persistence: one canonical JSON document plus binary PLY sidecars for point clouds."""

from __future__ import annotations

import json
import os
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ovigo.models.enums import EdgeKind, NodeKind
from ovigo.models.errors import MissingFile, ParseError
from ovigo.models.geometry import BevFrame, BinaryMask, Box3D, PointCloud, Polygon2D
from ovigo.models.scene import FloorNode, InterEdge, LocationNode, ObjectNode, RoomNode, SceneGraph
from ovigo.services.cloud_io import encode_ply, parse_ply
from ovigo.services.fs import DEFAULT_FS, FileSystem
from ovigo.services.location_masks import frame_from_dict, frame_to_dict
from ovigo.services.rle import decode_rle, encode_rle

SCHEMA = "ovigo-hsg/1"


@dataclass(slots=True)
class SerializedGraph:
    document: bytes
    sidecars: dict[str, bytes] = field(default_factory=dict)


def _box(b: Box3D) -> list[list[float]]:
    return [list(b.min), list(b.max)]


class _Writer:
    def __init__(self, cloud_dir: str) -> None:
        self.cloud_dir = cloud_dir
        self.sidecars: dict[str, bytes] = {}

    def cloud(self, kind: NodeKind, node_id: int, cloud: PointCloud) -> dict[str, Any]:
        if len(cloud) == 0:
            return {"cloud_ref": None, "cloud_labelled": cloud.object_id is not None}
        ref = f"{self.cloud_dir}/{kind.value}_{node_id}.ply"
        self.sidecars[ref] = encode_ply(cloud)
        return {"cloud_ref": ref}


def graph_to_dict(graph: SceneGraph, cloud_dir: str = "clouds") -> tuple[dict[str, Any], dict[str, bytes]]:
    w = _Writer(cloud_dir)
    floors = [
        {
            "id": f.id,
            "tag": f.tag,
            "z_low": f.z_low,
            "z_high": f.z_high,
            "bbox": _box(f.bbox),
            "frame": frame_to_dict(f.frame),
            "mask": encode_rle(f.mask.values),
            **w.cloud(NodeKind.FLOOR, f.id, f.cloud),
        }
        for f in graph.floors.values()
    ]
    rooms = [
        {
            "id": r.id,
            "tag": r.tag,
            "floor": r.floor_index,
            "bbox": _box(r.bbox),
            "mask": encode_rle(r.mask.values),
            **w.cloud(NodeKind.ROOM, r.id, r.cloud),
        }
        for r in graph.rooms.values()
    ]
    locations = [
        {
            "id": loc.id,
            "tag": loc.tag,
            "room": loc.room_id,
            "floor": loc.floor_index,
            "bbox": _box(loc.bbox),
            "polygon": [list(v) for v in loc.polygon.vertices],
            "mask": encode_rle(loc.mask.values),
            **w.cloud(NodeKind.LOCATION, loc.id, loc.cloud),
        }
        for loc in graph.locations.values()
    ]
    objects = [
        {
            "id": o.id,
            "tag": o.primary_tag,
            "tags": dict(o.tags),
            "room": o.room_id,
            "location": o.location_id,
            "bbox": _box(o.bbox),
            **w.cloud(NodeKind.OBJECT, o.id, o.cloud),
        }
        for o in graph.objects.values()
    ]
    edges = {kind.value: [[e.parent_id, e.child_id] for e in graph.edges_of(kind)] for kind in EdgeKind}
    doc = {
        "schema": SCHEMA,
        "building": {"id": 0, "tag": graph.building_tag},
        "config": graph.config,
        "floors": floors,
        "rooms": rooms,
        "locations": locations,
        "objects": objects,
        "edges": edges,
    }
    return doc, w.sidecars


def serialize(graph: SceneGraph, cloud_dir: str = "clouds") -> SerializedGraph:
    """Canonical bytes: sorted keys and shortest round-trip float repr, so reruns are byte-identical."""
    doc, sidecars = graph_to_dict(graph, cloud_dir)
    text = json.dumps(doc, sort_keys=True, indent=1, allow_nan=False) + "\n"
    return SerializedGraph(document=text.encode("utf-8"), sidecars=sidecars)


class _Reader:
    def __init__(self, load_sidecar: Callable[[str], bytes]) -> None:
        self._load = load_sidecar

    @staticmethod
    def get(obj: Any, key: str, path: str) -> Any:
        if not isinstance(obj, dict) or key not in obj:
            raise ParseError(f"{path}.{key} is missing", path=f"{path}.{key}")
        return obj[key]

    def int_(self, obj: Any, key: str, path: str) -> int:
        value = self.get(obj, key, path)
        if not isinstance(value, int) or isinstance(value, bool):
            raise ParseError(f"{path}.{key} must be an integer", path=f"{path}.{key}")
        return value

    def opt_int(self, obj: Any, key: str, path: str) -> int | None:
        value = obj.get(key) if isinstance(obj, dict) else None
        if value is None:
            return None
        return self.int_(obj, key, path)

    def float_(self, obj: Any, key: str, path: str) -> float:
        value = self.get(obj, key, path)
        if not isinstance(value, int | float) or isinstance(value, bool):
            raise ParseError(f"{path}.{key} must be a number", path=f"{path}.{key}")
        return float(value)

    def str_(self, obj: Any, key: str, path: str) -> str:
        value = self.get(obj, key, path)
        if not isinstance(value, str):
            raise ParseError(f"{path}.{key} must be a string", path=f"{path}.{key}")
        return value

    def list_(self, obj: Any, key: str, path: str) -> list[Any]:
        value = self.get(obj, key, path)
        if not isinstance(value, list):
            raise ParseError(f"{path}.{key} must be a list", path=f"{path}.{key}")
        return value

    def box(self, obj: Any, path: str) -> Box3D:
        raw = self.get(obj, "bbox", path)
        try:
            lo, hi = raw
            return Box3D(
                (float(lo[0]), float(lo[1]), float(lo[2])),
                (float(hi[0]), float(hi[1]), float(hi[2])),
            )
        except (TypeError, ValueError, IndexError) as exc:
            raise ParseError(f"{path}.bbox must be [[x, y, z], [x, y, z]]: {exc}", path=f"{path}.bbox") from exc

    def cloud(self, obj: Any, path: str) -> PointCloud:
        ref = obj.get("cloud_ref") if isinstance(obj, dict) else None
        if ref is None:
            labelled = bool(obj.get("cloud_labelled", False)) if isinstance(obj, dict) else False
            return PointCloud(np.zeros((0, 3)), np.zeros(0, dtype=np.int64) if labelled else None)
        if not isinstance(ref, str):
            raise ParseError(f"{path}.cloud_ref must be a string", path=f"{path}.cloud_ref")
        return parse_ply(self._load(ref), ref)

    def mask(self, obj: Any, frame: BevFrame, path: str) -> BinaryMask:
        return BinaryMask(decode_rle(self.get(obj, "mask", path), frame.h, frame.w, where=f"{path}.mask"), frame)


def _check_schema(doc: Any) -> None:
    if not isinstance(doc, dict):
        raise ParseError("Scene graph document must be a JSON object", path="$")
    if doc.get("schema") != SCHEMA:
        raise ParseError(f"Unsupported schema {doc.get('schema')!r}, expected {SCHEMA}", path="$.schema")


def graph_from_dict(doc: Any, load_sidecar: Callable[[str], bytes]) -> SceneGraph:
    _check_schema(doc)
    rd = _Reader(load_sidecar)

    floors: dict[int, FloorNode] = {}
    for i, raw in enumerate(rd.list_(doc, "floors", "$")):
        p = f"$.floors[{i}]"
        frame = frame_from_dict(rd.get(raw, "frame", p), f"{p}.frame")
        node = FloorNode(
            id=rd.int_(raw, "id", p),
            z_low=rd.float_(raw, "z_low", p),
            z_high=rd.float_(raw, "z_high", p),
            cloud=rd.cloud(raw, p),
            bbox=rd.box(raw, p),
            mask=rd.mask(raw, frame, p),
            tag=rd.str_(raw, "tag", p),
        )
        floors[node.id] = node

    def floor_frame_of(raw: Any, p: str) -> tuple[int, BevFrame]:
        fid = rd.int_(raw, "floor", p)
        if fid not in floors:
            raise ParseError(f"{p}.floor references unknown floor {fid}", path=f"{p}.floor")
        return fid, floors[fid].frame

    rooms: dict[int, RoomNode] = {}
    for i, raw in enumerate(rd.list_(doc, "rooms", "$")):
        p = f"$.rooms[{i}]"
        fid, frame = floor_frame_of(raw, p)
        node = RoomNode(
            id=rd.int_(raw, "id", p),
            floor_index=fid,
            mask=rd.mask(raw, frame, p),
            cloud=rd.cloud(raw, p),
            bbox=rd.box(raw, p),
            tag=rd.str_(raw, "tag", p),
        )
        rooms[node.id] = node

    locations: dict[int, LocationNode] = {}
    for i, raw in enumerate(rd.list_(doc, "locations", "$")):
        p = f"$.locations[{i}]"
        fid, frame = floor_frame_of(raw, p)
        try:
            polygon = Polygon2D(tuple((float(x), float(y)) for x, y in rd.list_(raw, "polygon", p)))
        except (TypeError, ValueError) as exc:
            raise ParseError(f"{p}.polygon is invalid: {exc}", path=f"{p}.polygon") from exc
        node = LocationNode(
            id=rd.int_(raw, "id", p),
            room_id=rd.int_(raw, "room", p),
            polygon=polygon,
            mask=rd.mask(raw, frame, p),
            cloud=rd.cloud(raw, p),
            bbox=rd.box(raw, p),
            tag=rd.str_(raw, "tag", p),
            floor_index=fid,
        )
        locations[node.id] = node

    objects: dict[int, ObjectNode] = {}
    for i, raw in enumerate(rd.list_(doc, "objects", "$")):
        p = f"$.objects[{i}]"
        tags = rd.get(raw, "tags", p)
        if not isinstance(tags, dict) or not tags or not all(isinstance(v, int) and v >= 1 for v in tags.values()):
            raise ParseError(f"{p}.tags must map tags to positive counts", path=f"{p}.tags")
        node = ObjectNode(
            id=rd.int_(raw, "id", p),
            cloud=rd.cloud(raw, p),
            bbox=rd.box(raw, p),
            tags={str(k): int(v) for k, v in tags.items()},
            room_id=rd.opt_int(raw, "room", p),
            location_id=rd.opt_int(raw, "location", p),
        )
        objects[node.id] = node

    tables: dict[NodeKind, Mapping[int, object]] = {
        NodeKind.BUILDING: {0: None},
        NodeKind.FLOOR: floors,
        NodeKind.ROOM: rooms,
        NodeKind.LOCATION: locations,
        NodeKind.OBJECT: objects,
    }
    raw_edges = rd.get(doc, "edges", "$")
    edges: list[InterEdge] = []
    for kind in EdgeKind:
        for j, pair in enumerate(rd.list_(raw_edges, kind.value, "$.edges")):
            p = f"$.edges.{kind.value}[{j}]"
            if not (isinstance(pair, list) and len(pair) == 2 and all(isinstance(v, int) for v in pair)):
                raise ParseError(f"{p} must be [parent_id, child_id]", path=p)
            parent, child = pair
            if parent not in tables[kind.parent] or child not in tables[kind.child]:
                raise ParseError(f"{p} references an unknown node", path=p)
            edges.append(InterEdge(kind, parent, child))

    building = rd.get(doc, "building", "$")
    config = doc.get("config", {})
    if not isinstance(config, dict):
        raise ParseError("$.config must be an object", path="$.config")
    return SceneGraph(
        building_tag=rd.str_(building, "tag", "$.building"),
        floors=dict(sorted(floors.items())),
        rooms=dict(sorted(rooms.items())),
        locations=dict(sorted(locations.items())),
        objects=dict(sorted(objects.items())),
        edges=tuple(sorted(edges)),
        config=config,
    )


def deserialize(document: bytes, sidecars: Mapping[str, bytes] | Callable[[str], bytes]) -> SceneGraph:
    try:
        doc = json.loads(document.decode("utf-8"))
    except UnicodeDecodeError as exc:
        raise ParseError(f"Scene graph is not UTF-8 at offset {exc.start}", offset=exc.start) from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"Scene graph JSON is malformed at offset {exc.pos}: {exc.msg}", offset=exc.pos) from exc

    if callable(sidecars):
        load = sidecars
    else:
        table = sidecars

        def load(ref: str) -> bytes:
            if ref not in table:
                raise MissingFile(f"Sidecar cloud {ref} is missing", path=ref)
            return table[ref]

    return graph_from_dict(doc, load)


def sidecar_dir_for(path: str) -> str:
    stem = os.path.splitext(os.path.basename(path))[0]
    return f"{stem}.clouds"


def write_graph(graph: SceneGraph, path: str, fs: FileSystem = DEFAULT_FS) -> SerializedGraph:
    out = serialize(graph, sidecar_dir_for(path))
    base = os.path.dirname(path)
    for ref, data in out.sidecars.items():
        fs.write_bytes(os.path.join(base, ref), data)
    fs.write_bytes(path, out.document)
    return out


def read_graph(path: str, fs: FileSystem = DEFAULT_FS) -> SceneGraph:
    path = fs.expanduser(path)
    if not fs.exists(path):
        raise MissingFile(f"Scene graph {path} does not exist", path=path)
    base = os.path.dirname(path)

    def load(ref: str) -> bytes:
        full = os.path.join(base, ref)
        if not fs.exists(full):
            raise MissingFile(f"Sidecar cloud {full} is missing", path=full)
        return fs.read_bytes(full)

    return deserialize(fs.read_bytes(path), load)
