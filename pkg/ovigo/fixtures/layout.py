"""Ground-truth geometry of a synthetic multi-floor apartment and its sampled point cloud."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from shapely.geometry import MultiPoint

from ovigo.fixtures.catalog import CATALOG, RoomKind
from ovigo.fixtures.spec import FixtureSpec
from ovigo.models.geometry import Box3D, FloatArray, PointCloud, Polygon2D

CELL_PITCH = 1.5
JITTER = 0.05
PLANE_OFFSET = (0.002, 0.008)
SLAB_THICKNESS = 0.05

type Rect = tuple[float, float, float, float]


@dataclass(slots=True, frozen=True)
class GtObject:
    id: int
    tag: str
    box: Box3D
    floor: int
    room: int
    grouped: bool


@dataclass(slots=True, frozen=True)
class GtRoom:
    index: int
    floor: int
    kind: RoomKind
    rect: Rect

    def contains_xy(self, x: float, y: float, margin: float = 0.0) -> bool:
        x0, y0, x1, y1 = self.rect
        return x0 + margin <= x <= x1 - margin and y0 + margin <= y <= y1 - margin

    @property
    def center(self) -> tuple[float, float]:
        x0, y0, x1, y1 = self.rect
        return ((x0 + x1) / 2, (y0 + y1) / 2)


@dataclass(slots=True, frozen=True)
class GtLocation:
    room: int
    floor: int
    tag: str
    object_ids: tuple[int, ...]
    polygon: Polygon2D


@dataclass(slots=True)
class GtFloor:
    index: int
    z0: float
    zc: float
    width: float
    depth: float
    walls: list[Rect] = field(default_factory=list)

    def footprint(self, t: float) -> Rect:
        return (-t, -t, self.width + t, self.depth + t)


@dataclass(slots=True)
class SceneLayout:
    floors: list[GtFloor]
    rooms: list[GtRoom]
    objects: list[GtObject]
    locations: list[GtLocation]
    wall_thickness: float

    def structure_boxes(self, floor: int) -> list[Box3D]:
        f = self.floors[floor]
        x0, y0, x1, y1 = f.footprint(self.wall_thickness)
        boxes = [
            Box3D((x0, y0, f.z0 - SLAB_THICKNESS), (x1, y1, f.z0)),
            Box3D((x0, y0, f.zc), (x1, y1, f.zc + SLAB_THICKNESS)),
        ]
        boxes.extend(Box3D((wx0, wy0, f.z0), (wx1, wy1, f.zc)) for wx0, wy0, wx1, wy1 in f.walls)
        return boxes

    def objects_on(self, floor: int) -> list[GtObject]:
        return [o for o in self.objects if o.floor == floor]

    def room(self, index: int) -> GtRoom:
        return self.rooms[index - 1]


def _walls(width: float, depth: float, cuts: list[float], t: float, door: float) -> list[Rect]:
    walls: list[Rect] = [
        (-t, -t, width + t, 0.0),
        (-t, depth, width + t, depth + t),
        (-t, 0.0, 0.0, depth),
        (width, 0.0, width + t, depth),
    ]
    lo, hi = depth / 2 - door / 2, depth / 2 + door / 2
    for x in cuts:
        walls.append((x - t / 2, 0.0, x + t / 2, lo))
        walls.append((x - t / 2, hi, x + t / 2, depth))
    return walls


def _cell_centers(room: GtRoom) -> np.ndarray:
    cx, cy = room.center
    offsets = (np.arange(3) - 1) * CELL_PITCH
    # (row, col) -> (x, y); rows run along y.
    return np.array([[(cx + dx, cy + dy) for dx in offsets] for dy in offsets])


def _place_room(
    room: GtRoom, z0: float, rng: np.random.Generator, next_id: int
) -> tuple[list[GtObject], GtLocation | None]:
    kind = room.kind
    centers = _cell_centers(room)
    free = [(r, c) for r in range(3) for c in range(3)]
    objects: list[GtObject] = []
    location: GtLocation | None = None

    if kind.group:
        rows, cols = kind.block
        r0 = int(rng.integers(0, 3 - rows + 1))
        c0 = int(rng.integers(0, 3 - cols + 1))
        cells = [(r, c) for r in range(r0, r0 + rows) for c in range(c0, c0 + cols)]
        bx, by = np.mean([centers[r, c] for r, c in cells], axis=0)
        for piece in kind.group:
            sx, sy, sz = piece.size
            center = (float(bx) + piece.offset[0], float(by) + piece.offset[1], z0 + piece.base + sz / 2)
            box = Box3D.from_center_size(center, piece.size)
            objects.append(GtObject(next_id + len(objects), piece.tag, box, room.floor, room.index, grouped=True))
        free = [cell for cell in free if cell not in cells]
        corners = [
            (x, y)
            for o in objects
            for x in (o.box.min[0], o.box.max[0])
            for y in (o.box.min[1], o.box.max[1])
        ]
        hull = MultiPoint(corners).convex_hull
        location = GtLocation(
            room=room.index,
            floor=room.floor,
            tag=kind.location_tag,
            object_ids=tuple(o.id for o in objects),
            polygon=Polygon2D.from_shapely(hull),
        )

    order = rng.permutation(len(free))
    for (tag, size), slot in zip(kind.singletons, order, strict=False):
        r, c = free[int(slot)]
        jx, jy = rng.uniform(-JITTER, JITTER, size=2)
        x, y = centers[r, c]
        center = (float(x + jx), float(y + jy), z0 + size[2] / 2)
        objects.append(
            GtObject(next_id + len(objects), tag, Box3D.from_center_size(center, size), room.floor, room.index, False)
        )
    return objects, location


def build_layout(spec: FixtureSpec, rng: np.random.Generator) -> SceneLayout:
    t = spec.wall_thickness
    floors: list[GtFloor] = []
    rooms: list[GtRoom] = []
    objects: list[GtObject] = []
    locations: list[GtLocation] = []
    for fi, fspec in enumerate(spec.floors):
        z0 = fi * spec.floor_height
        width = float(sum(r.width for r in fspec.rooms))
        edges = np.cumsum([0.0, *[r.width for r in fspec.rooms]])
        cuts = [float(x) for x in edges[1:-1]]
        floor = GtFloor(index=fi, z0=z0, zc=z0 + spec.ceiling_height, width=width, depth=fspec.depth)
        floor.walls = _walls(width, fspec.depth, cuts, t, spec.door_width)
        floors.append(floor)
        last = len(fspec.rooms) - 1
        for ri, rspec in enumerate(fspec.rooms):
            x0 = float(edges[ri]) + (t / 2 if ri > 0 else 0.0)
            x1 = float(edges[ri + 1]) - (t / 2 if ri < last else 0.0)
            room = GtRoom(index=len(rooms) + 1, floor=fi, kind=CATALOG[rspec.kind], rect=(x0, 0.0, x1, fspec.depth))
            rooms.append(room)
            placed, location = _place_room(room, z0, rng, len(objects) + 1)
            objects.extend(placed)
            if location is not None:
                locations.append(location)
    return SceneLayout(floors=floors, rooms=rooms, objects=objects, locations=locations, wall_thickness=t)


def sample_box_surface(box: Box3D, spacing: float) -> FloatArray:
    """Regular grid on the five faces a camera or scanner can reach (no bottom face)."""
    lo = np.asarray(box.min)
    hi = np.asarray(box.max)
    counts = [max(2, math.ceil((hi[k] - lo[k]) / spacing) + 1) for k in range(3)]
    axes = [np.linspace(lo[k], hi[k], counts[k]) for k in range(3)]
    faces: list[np.ndarray] = []
    for k in range(3):
        a, b = [j for j in range(3) if j != k]
        ga, gb = np.meshgrid(axes[a], axes[b], indexing="ij")
        sides = (hi[k],) if k == 2 else (lo[k], hi[k])
        for value in sides:
            face = np.empty((ga.size, 3))
            face[:, a] = ga.ravel()
            face[:, b] = gb.ravel()
            face[:, k] = value
            faces.append(face)
    return np.vstack(faces)


def _uniform_box(rng: np.random.Generator, lo: tuple[float, ...], hi: tuple[float, ...], n: int) -> FloatArray:
    return rng.uniform(np.asarray(lo), np.asarray(hi), size=(n, 3))


def sample_cloud(layout: SceneLayout, spec: FixtureSpec, rng: np.random.Generator) -> PointCloud:
    """Structure points carry object_id 0; every furniture point carries its ground-truth object ID."""
    chunks: list[np.ndarray] = []
    ids: list[np.ndarray] = []
    t = layout.wall_thickness
    for floor in layout.floors:
        x0, y0, x1, y1 = floor.footprint(t)
        for z in (floor.z0, floor.zc):
            pts = _uniform_box(rng, (x0, y0, z + PLANE_OFFSET[0]), (x1, y1, z + PLANE_OFFSET[1]), spec.plane_points)
            chunks.append(pts)
            ids.append(np.zeros(len(pts), dtype=np.int64))
        for wx0, wy0, wx1, wy1 in floor.walls:
            volume = (wx1 - wx0) * (wy1 - wy0) * (floor.zc - floor.z0)
            n = max(1, round(volume * spec.wall_density))
            chunks.append(_uniform_box(rng, (wx0, wy0, floor.z0), (wx1, wy1, floor.zc), n))
            ids.append(np.zeros(n, dtype=np.int64))
    for obj in layout.objects:
        pts = sample_box_surface(obj.box, spec.surface_spacing)
        chunks.append(pts)
        ids.append(np.full(len(pts), obj.id, dtype=np.int64))
    points = np.vstack(chunks)
    if spec.noise > 0:
        points = points + rng.normal(0.0, spec.noise, size=points.shape)
    return PointCloud(points, np.concatenate(ids))
