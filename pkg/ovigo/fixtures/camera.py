"""Analytic pinhole rendering of the ground-truth boxes: depth, per-pixel object IDs and detections."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from ovigo.fixtures.layout import GtObject, GtRoom, SceneLayout
from ovigo.fixtures.spec import CameraSpec
from ovigo.models.geometry import Box3D, FloatArray, IntArray
from ovigo.models.scene import Detection, Intrinsics

logger = logging.getLogger(__name__)

MIN_VISIBILITY = 0.5
MIN_MASK_PIXELS = 30
NEAR_Z = 0.05
WALL_CLEARANCE = 0.3
FURNITURE_CLEARANCE = 0.25
AZIMUTHS = 16
DISTANCES = (2.5, 3.0, 3.5, 2.0, 4.0)
HEIGHTS = (1.6, 2.2)
DETECTION_SCORE = 0.9
NO_HIT = -1
STRUCTURE = 0


def intrinsics_of(camera: CameraSpec) -> Intrinsics:
    return Intrinsics(fx=camera.fx, fy=camera.fy, cx=camera.cx, cy=camera.cy)


def look_at(eye: FloatArray, target: FloatArray) -> FloatArray:
    """Camera-to-world pose (x right, y down, z forward) looking from *eye* at *target*."""
    forward = target - eye
    forward = forward / np.linalg.norm(forward)
    right = np.cross(forward, (0.0, 0.0, 1.0))
    right = right / np.linalg.norm(right)
    down = np.cross(forward, right)
    pose = np.eye(4)
    pose[:3, :3] = np.column_stack([right, down, forward])
    pose[:3, 3] = eye
    return pose


def pixel_rays(camera: CameraSpec, pose: FloatArray) -> FloatArray:
    # Unit camera-z length, so the ray parameter at a hit equals the depth.
    vs, us = np.mgrid[0 : camera.height, 0 : camera.width]
    local = np.column_stack(
        [
            (us.ravel() - camera.cx) / camera.fx,
            (vs.ravel() - camera.cy) / camera.fy,
            np.ones(us.size),
        ]
    )
    return local @ pose[:3, :3].T


def ray_box_hits(origin: FloatArray, dirs: FloatArray, lo: FloatArray, hi: FloatArray) -> FloatArray:
    """Entry distance of every ray into every box, inf where it misses; shape (rays, boxes)."""
    safe = np.where(np.abs(dirs) < 1e-12, np.copysign(1e-12, dirs), dirs)
    inv = 1.0 / safe
    t_near = np.full((dirs.shape[0], lo.shape[0]), -np.inf)
    t_far = np.full((dirs.shape[0], lo.shape[0]), np.inf)
    for axis in range(3):
        t1 = (lo[None, :, axis] - origin[axis]) * inv[:, axis : axis + 1]
        t2 = (hi[None, :, axis] - origin[axis]) * inv[:, axis : axis + 1]
        t_near = np.maximum(t_near, np.minimum(t1, t2))
        t_far = np.minimum(t_far, np.maximum(t1, t2))
    hit = (t_far >= t_near) & (t_near > 1e-6)
    return np.where(hit, t_near, np.inf)


@dataclass(slots=True, frozen=True, eq=False)
class RenderedView:
    pose: FloatArray
    depth_mm: np.ndarray
    # Object ID of the first surface per pixel; 0 for structure and -1 for nothing.
    labels: IntArray
    # Pixels each object would cover with nothing in front of it.
    silhouettes: dict[int, np.ndarray]

    def visibility(self, object_id: int) -> float:
        total = int(self.silhouettes[object_id].sum())
        if total == 0:
            return 0.0
        return float((self.labels == object_id).sum()) / total


class FloorRenderer:
    """Renders every box of one floor; objects keep their ground-truth IDs."""

    def __init__(self, layout: SceneLayout, floor: int, camera: CameraSpec) -> None:
        self.camera = camera
        self.objects = layout.objects_on(floor)
        structure = layout.structure_boxes(floor)
        boxes = [o.box for o in self.objects] + structure
        self._lo = np.array([b.min for b in boxes])
        self._hi = np.array([b.max for b in boxes])
        self._ids = np.array([o.id for o in self.objects] + [STRUCTURE] * len(structure), dtype=np.int64)

    def render(self, pose: FloatArray) -> RenderedView:
        cam = self.camera
        dirs = pixel_rays(cam, pose)
        t = ray_box_hits(pose[:3, 3], dirs, self._lo, self._hi)
        first = np.argmin(t, axis=1)
        depth = t[np.arange(t.shape[0]), first]
        hit = np.isfinite(depth)
        labels = np.where(hit, self._ids[first], NO_HIT).reshape(cam.height, cam.width)
        depth_mm = np.where(hit, np.rint(depth * 1000.0), 0).clip(0, 65535).astype(np.uint16)
        silhouettes = {
            o.id: np.isfinite(t[:, i]).reshape(cam.height, cam.width) for i, o in enumerate(self.objects)
        }
        return RenderedView(
            pose=pose,
            depth_mm=depth_mm.reshape(cam.height, cam.width),
            labels=labels,
            silhouettes=silhouettes,
        )


def fully_in_frame(box: Box3D, pose: FloatArray, camera: CameraSpec) -> bool:
    xs, ys, zs = zip(box.min, box.max, strict=True)
    corners = np.array([(x, y, z) for x in xs for y in ys for z in zs])
    local = (corners - pose[:3, 3]) @ pose[:3, :3]
    if np.any(local[:, 2] <= NEAR_Z):
        return False
    u = camera.fx * local[:, 0] / local[:, 2] + camera.cx
    v = camera.fy * local[:, 1] / local[:, 2] + camera.cy
    return bool(np.all((u >= 0) & (u <= camera.width - 1) & (v >= 0) & (v <= camera.height - 1)))


def _azimuth_order(room: GtRoom, center: tuple[float, float]) -> list[float]:
    x0, y0, x1, y1 = room.rect
    far = max(((x, y) for x in (x0, x1) for y in (y0, y1)), key=lambda c: math.dist(c, center))
    base = math.atan2(far[1] - center[1], far[0] - center[0])
    steps = sorted(range(AZIMUTHS), key=lambda k: (min(k, AZIMUTHS - k), k))
    return [base + 2 * math.pi * k / AZIMUTHS for k in steps]


def _blocked(x: float, y: float, objects: list[GtObject]) -> bool:
    pad = FURNITURE_CLEARANCE
    return any(
        o.box.min[0] - pad <= x <= o.box.max[0] + pad and o.box.min[1] - pad <= y <= o.box.max[1] + pad
        for o in objects
    )


def find_view(renderer: FloorRenderer, target: GtObject, room: GtRoom, z0: float) -> RenderedView | None:
    """First camera, in search order, that sees *target* whole and mostly unoccluded."""
    cx, cy, cz = target.box.center
    aim = np.array([cx, cy, cz])
    for azimuth in _azimuth_order(room, (cx, cy)):
        for distance in DISTANCES:
            x = cx + distance * math.cos(azimuth)
            y = cy + distance * math.sin(azimuth)
            if not room.contains_xy(x, y, WALL_CLEARANCE) or _blocked(x, y, renderer.objects):
                continue
            for height in HEIGHTS:
                pose = look_at(np.array([x, y, z0 + height]), aim)
                if not fully_in_frame(target.box, pose, renderer.camera):
                    continue
                view = renderer.render(pose)
                if view.visibility(target.id) >= MIN_VISIBILITY:
                    return view
    logger.warning("No camera position sees object %d (%s) well enough; skipping", target.id, target.tag)
    return None


def _box2d(mask: np.ndarray) -> tuple[int, int, int, int]:
    rows, cols = np.nonzero(mask)
    x0, y0 = int(cols.min()), int(rows.min())
    return (x0, y0, int(cols.max()) - x0 + 1, int(rows.max()) - y0 + 1)


def view_detections(view: RenderedView, renderer: FloorRenderer) -> list[Detection]:
    """A detection for every object seen whole with at least half of it unoccluded."""
    out: list[Detection] = []
    for obj in renderer.objects:
        if not fully_in_frame(obj.box, view.pose, renderer.camera) or view.visibility(obj.id) < MIN_VISIBILITY:
            continue
        mask = view.labels == obj.id
        if mask.sum() < MIN_MASK_PIXELS:
            continue
        out.append(Detection(tag=obj.tag, score=DETECTION_SCORE, box2d=_box2d(mask), mask=mask))
    return out


_PALETTE = np.array(
    [[200, 200, 200], [70, 70, 70], [31, 119, 180], [255, 127, 14], [44, 160, 44], [214, 39, 40], [148, 103, 189],
     [140, 86, 75], [227, 119, 194], [188, 189, 34], [23, 190, 207]],
    dtype=np.uint8,
)


def shade(view: RenderedView) -> np.ndarray:
    """Flat palette colors: empty space, structure, then objects by ID."""
    labels = view.labels
    index = np.where(labels == NO_HIT, 0, np.where(labels == STRUCTURE, 1, 2 + labels % (len(_PALETTE) - 2)))
    return _PALETTE[index]
