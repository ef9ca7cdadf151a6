from __future__ import annotations

from collections.abc import Iterator
from dataclasses import dataclass, field

import numpy as np

from ovigo.models.enums import EdgeKind, NodeKind
from ovigo.models.geometry import BevFrame, BinaryMask, Box3D, FloatArray, PointCloud, Polygon2D


@dataclass(slots=True, frozen=True)
class HeightBand:
    alpha_min: float
    alpha_max: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha_min < self.alpha_max <= 1.0:
            msg = f"invalid height band ({self.alpha_min}, {self.alpha_max})"
            raise ValueError(msg)


@dataclass(slots=True, frozen=True)
class FloorSlab:
    index: int
    z_low: float
    z_high: float
    cloud: PointCloud
    tag: str

    def __post_init__(self) -> None:
        if not self.z_low < self.z_high:
            msg = f"floor slab {self.index} has z_low >= z_high"
            raise ValueError(msg)


@dataclass(slots=True, frozen=True)
class FloorNode:
    id: int
    z_low: float
    z_high: float
    cloud: PointCloud
    bbox: Box3D
    mask: BinaryMask
    tag: str

    @property
    def frame(self) -> BevFrame:
        return self.mask.frame


@dataclass(slots=True, frozen=True)
class RoomNode:
    id: int
    floor_index: int
    mask: BinaryMask
    cloud: PointCloud
    bbox: Box3D
    tag: str = ""


@dataclass(slots=True, frozen=True)
class LocationNode:
    id: int
    room_id: int
    polygon: Polygon2D
    mask: BinaryMask
    cloud: PointCloud
    bbox: Box3D
    tag: str = ""
    floor_index: int = 0


@dataclass(slots=True, frozen=True)
class Intrinsics:
    fx: float
    fy: float
    cx: float
    cy: float

    def __post_init__(self) -> None:
        if self.fx <= 0 or self.fy <= 0:
            msg = "focal lengths must be positive"
            raise ValueError(msg)


@dataclass(slots=True, frozen=True, eq=False)
class Detection:
    tag: str
    score: float
    box2d: tuple[int, int, int, int]
    mask: np.ndarray


@dataclass(slots=True, frozen=True, eq=False)
class FrameDetections:
    frame_id: int
    intrinsics: Intrinsics
    pose: FloatArray
    depth_scale: float
    detections: list[Detection] = field(default_factory=list)


@dataclass(slots=True, frozen=True)
class ObjectFragment:
    frame_id: int
    tag: str
    cloud: PointCloud
    bbox: Box3D


@dataclass(slots=True, frozen=True)
class ObjectNode:
    id: int
    cloud: PointCloud
    bbox: Box3D
    tags: dict[str, int]
    room_id: int | None = None
    location_id: int | None = None

    @property
    def primary_tag(self) -> str:
        # Highest count wins; ties go to the lexicographically first tag.
        return min(self.tags.items(), key=lambda kv: (-kv[1], kv[0]))[0]


@dataclass(slots=True, frozen=True, order=True)
class InterEdge:
    kind: EdgeKind
    parent_id: int
    child_id: int

    @property
    def parent_kind(self) -> NodeKind:
        return self.kind.parent

    @property
    def child_kind(self) -> NodeKind:
        return self.kind.child


BUILDING_ID = 0

type LayerTable = dict[int, FloorNode] | dict[int, RoomNode] | dict[int, LocationNode] | dict[int, ObjectNode]


@dataclass(slots=True, frozen=True)
class SceneGraph:
    building_tag: str
    floors: dict[int, FloorNode]
    rooms: dict[int, RoomNode]
    locations: dict[int, LocationNode]
    objects: dict[int, ObjectNode]
    edges: tuple[InterEdge, ...]
    config: dict[str, object] = field(default_factory=dict)

    def layer(self, kind: NodeKind) -> LayerTable:
        if kind is NodeKind.FLOOR:
            return self.floors
        if kind is NodeKind.ROOM:
            return self.rooms
        if kind is NodeKind.LOCATION:
            return self.locations
        if kind is NodeKind.OBJECT:
            return self.objects
        msg = f"{kind.value} is not a node table"
        raise ValueError(msg)

    def edges_of(self, kind: EdgeKind) -> Iterator[InterEdge]:
        return (e for e in self.edges if e.kind is kind)

    def children(self, kind: EdgeKind, parent_ids: set[int]) -> list[int]:
        return sorted(e.child_id for e in self.edges if e.kind is kind and e.parent_id in parent_ids)

    def parent_of(self, kind: EdgeKind, child_id: int) -> int | None:
        for e in self.edges:
            if e.kind is kind and e.child_id == child_id:
                return e.parent_id
        return None


@dataclass(slots=True, frozen=True, eq=False)
class FrameEntry:
    """One manifest row: file references plus the camera of a single RGB-D frame."""

    frame_id: int
    rgb_path: str
    depth_path: str
    detections_path: str
    pose: FloatArray
    intrinsics: Intrinsics
    depth_scale: float = 0.001


@dataclass(slots=True, frozen=True)
class SequenceManifest:
    frames: tuple[FrameEntry, ...]
    base_dir: str
    cloud_path: str | None = None
    location_masks: tuple[str, ...] = ()
    # Partition label of walls, floors and ceilings in the cloud; None when every label is an object.
    structure_id: int | None = None
