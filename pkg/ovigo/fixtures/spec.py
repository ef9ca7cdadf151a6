from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

from ovigo.fixtures.catalog import CATALOG
from ovigo.models.errors import FixtureSpecError, MissingFile
from ovigo.services.fs import DEFAULT_FS, FileSystem

# Three furniture cells at 1.5 m pitch need this much room along each side.
MIN_ROOM_SIDE = 4.8


@dataclass(slots=True, frozen=True)
class CameraSpec:
    width: int = 320
    height: int = 240
    fx: float = 220.0
    fy: float = 220.0
    cx: float = 160.0
    cy: float = 120.0


@dataclass(slots=True, frozen=True)
class RoomSpec:
    kind: str
    width: float


@dataclass(slots=True, frozen=True)
class FloorSpec:
    depth: float
    rooms: tuple[RoomSpec, ...]


@dataclass(slots=True, frozen=True)
class FixtureSpec:
    seed: int
    floors: tuple[FloorSpec, ...]
    floor_height: float = 3.5
    ceiling_height: float = 2.8
    wall_thickness: float = 0.1
    door_width: float = 0.9
    plane_points: int = 40000
    wall_density: float = 3000.0
    surface_spacing: float = 0.1
    noise: float = 0.0
    queries: int = 20
    camera: CameraSpec = field(default_factory=CameraSpec)

    def to_dict(self) -> dict[str, Any]:
        return {
            "seed": self.seed,
            "floorHeight": self.floor_height,
            "ceilingHeight": self.ceiling_height,
            "wallThickness": self.wall_thickness,
            "doorWidth": self.door_width,
            "planePoints": self.plane_points,
            "wallDensity": self.wall_density,
            "surfaceSpacing": self.surface_spacing,
            "noise": self.noise,
            "queries": self.queries,
            "camera": {
                "width": self.camera.width,
                "height": self.camera.height,
                "fx": self.camera.fx,
                "fy": self.camera.fy,
                "cx": self.camera.cx,
                "cy": self.camera.cy,
            },
            "floors": [
                {"depth": f.depth, "rooms": [{"kind": r.kind, "width": r.width} for r in f.rooms]} for f in self.floors
            ],
        }

    @classmethod
    def from_dict(cls, data: Any) -> FixtureSpec:
        if not isinstance(data, dict):
            raise FixtureSpecError("Fixture spec must be a JSON object", path="$")
        seed = _number(data, "seed", "$", int, required=True)
        raw_floors = data.get("floors")
        if not isinstance(raw_floors, list) or not raw_floors:
            raise FixtureSpecError("$.floors must be a non-empty list", path="$.floors")
        floors = tuple(_floor(raw, f"$.floors[{i}]") for i, raw in enumerate(raw_floors))

        defaults = cls(seed=0, floors=())
        ceiling = _number(data, "ceilingHeight", "$", float, default=defaults.ceiling_height, minimum=2.0)
        floor_height = _number(data, "floorHeight", "$", float, default=defaults.floor_height, minimum=ceiling + 0.6)
        camera_raw = data.get("camera", {})
        if not isinstance(camera_raw, dict):
            raise FixtureSpecError("$.camera must be an object", path="$.camera")
        cam_defaults = CameraSpec()
        camera = CameraSpec(
            width=_number(camera_raw, "width", "$.camera", int, default=cam_defaults.width, minimum=16),
            height=_number(camera_raw, "height", "$.camera", int, default=cam_defaults.height, minimum=16),
            fx=_number(camera_raw, "fx", "$.camera", float, default=cam_defaults.fx, minimum=1.0),
            fy=_number(camera_raw, "fy", "$.camera", float, default=cam_defaults.fy, minimum=1.0),
            cx=_number(camera_raw, "cx", "$.camera", float, default=cam_defaults.cx, minimum=0.0),
            cy=_number(camera_raw, "cy", "$.camera", float, default=cam_defaults.cy, minimum=0.0),
        )
        return cls(
            seed=int(seed),
            floors=floors,
            floor_height=floor_height,
            ceiling_height=ceiling,
            wall_thickness=_number(data, "wallThickness", "$", float, default=defaults.wall_thickness, minimum=0.05),
            door_width=_number(data, "doorWidth", "$", float, default=defaults.door_width, minimum=0.5),
            plane_points=_number(data, "planePoints", "$", int, default=defaults.plane_points, minimum=1000),
            wall_density=_number(data, "wallDensity", "$", float, default=defaults.wall_density, minimum=500.0),
            surface_spacing=_number(
                data, "surfaceSpacing", "$", float, default=defaults.surface_spacing, minimum=0.01
            ),
            noise=_number(data, "noise", "$", float, default=defaults.noise, minimum=0.0),
            queries=_number(data, "queries", "$", int, default=defaults.queries, minimum=0),
            camera=camera,
        )


def _number(
    data: dict[str, Any],
    key: str,
    where: str,
    kind: type,
    *,
    default: Any = None,
    minimum: float | None = None,
    required: bool = False,
) -> Any:
    path = f"{where}.{key}"
    if key not in data:
        if required:
            raise FixtureSpecError(f"{path} is required", path=path)
        return default
    raw = data[key]
    if isinstance(raw, bool) or not isinstance(raw, int | float) or (kind is int and not float(raw).is_integer()):
        raise FixtureSpecError(f"{path} must be {'an integer' if kind is int else 'a number'}", path=path)
    value = kind(raw)
    if minimum is not None and value < minimum:
        raise FixtureSpecError(f"{path}={value} is below the minimum {minimum}", path=path)
    return value


def _floor(raw: Any, where: str) -> FloorSpec:
    if not isinstance(raw, dict):
        raise FixtureSpecError(f"{where} must be an object", path=where)
    depth = _number(raw, "depth", where, float, required=True, minimum=MIN_ROOM_SIDE)
    rooms_raw = raw.get("rooms")
    if not isinstance(rooms_raw, list) or not rooms_raw:
        raise FixtureSpecError(f"{where}.rooms must list at least one room", path=f"{where}.rooms")
    rooms: list[RoomSpec] = []
    for i, room in enumerate(rooms_raw):
        path = f"{where}.rooms[{i}]"
        if not isinstance(room, dict):
            raise FixtureSpecError(f"{path} must be an object", path=path)
        kind = room.get("kind")
        if kind not in CATALOG:
            raise FixtureSpecError(f"{path}.kind must be one of {', '.join(sorted(CATALOG))}", path=f"{path}.kind")
        width = _number(room, "width", path, float, required=True, minimum=MIN_ROOM_SIDE)
        rooms.append(RoomSpec(kind=kind, width=width))
    return FloorSpec(depth=depth, rooms=tuple(rooms))


def load_fixture_spec(path: str, fs: FileSystem = DEFAULT_FS) -> FixtureSpec:
    path = fs.expanduser(path)
    if not fs.exists(path):
        raise MissingFile(f"Fixture spec {path} does not exist", path=path)
    try:
        payload = json.loads(fs.read_text(path))
    except json.JSONDecodeError as exc:
        raise FixtureSpecError(f"{path} is not valid JSON at offset {exc.pos}", path=path) from exc
    return FixtureSpec.from_dict(payload)
