from __future__ import annotations

from dataclasses import dataclass
from typing import override

import numpy as np
from numpy.typing import NDArray
from shapely.geometry import Polygon

type FloatArray = NDArray[np.float64]
type IntArray = NDArray[np.int64]
type BoolArray = NDArray[np.bool_]
type Vec3 = tuple[float, float, float]


@dataclass(slots=True, frozen=True, eq=False)
class PointCloud:
    """N x 3 points in meters (z-up) with an optional per-point object label."""

    points: FloatArray
    object_id: IntArray | None = None

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=np.float64).reshape(-1, 3)
        if not np.all(np.isfinite(pts)):
            msg = "Point cloud contains non-finite coordinates"
            raise ValueError(msg)
        object.__setattr__(self, "points", pts)
        if self.object_id is not None:
            ids = np.asarray(self.object_id, dtype=np.int64).reshape(-1)
            if ids.shape[0] != pts.shape[0]:
                msg = f"object_id has {ids.shape[0]} labels for {pts.shape[0]} points"
                raise ValueError(msg)
            object.__setattr__(self, "object_id", ids)

    @classmethod
    def empty(cls) -> PointCloud:
        return cls(np.zeros((0, 3), dtype=np.float64))

    @classmethod
    def concat(cls, clouds: list[PointCloud]) -> PointCloud:
        if not clouds:
            return cls.empty()
        points = np.vstack([c.points for c in clouds])
        if all(c.object_id is not None for c in clouds):
            ids = np.concatenate([c.object_id for c in clouds if c.object_id is not None])
            return cls(points, ids)
        return cls(points)

    def __len__(self) -> int:
        return int(self.points.shape[0])

    @property
    def z(self) -> FloatArray:
        return self.points[:, 2]

    def select(self, keep: BoolArray | IntArray) -> PointCloud:
        ids = self.object_id[keep] if self.object_id is not None else None
        return PointCloud(self.points[keep], ids)

    def with_object_id(self, ids: IntArray) -> PointCloud:
        return PointCloud(self.points, ids)

    @override
    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PointCloud):
            return NotImplemented
        if not np.array_equal(self.points, other.points):
            return False
        if self.object_id is None or other.object_id is None:
            return self.object_id is None and other.object_id is None
        return np.array_equal(self.object_id, other.object_id)

    __hash__ = None  # type: ignore[assignment]


@dataclass(slots=True, frozen=True, eq=False)
class HeightHistogram:
    bin_size: float
    origin_z: float
    counts: IntArray

    def __post_init__(self) -> None:
        if self.bin_size <= 0:
            msg = "bin_size must be positive"
            raise ValueError(msg)
        counts = np.asarray(self.counts, dtype=np.int64).reshape(-1)
        if counts.shape[0] < 1 or np.any(counts < 0):
            msg = "counts must be a non-empty list of non-negative integers"
            raise ValueError(msg)
        object.__setattr__(self, "counts", counts)

    def bin_center(self, index: int) -> float:
        return self.origin_z + (index + 0.5) * self.bin_size

    def bin_low(self, index: int) -> float:
        return self.origin_z + index * self.bin_size

    def bin_high(self, index: int) -> float:
        return self.origin_z + (index + 1) * self.bin_size


@dataclass(slots=True, frozen=True)
class Peak:
    bin_index: int
    height: int
    z_center: float


@dataclass(slots=True, frozen=True)
class BevFrame:
    """Raster geometry shared by every BEV image and mask of one floor.

    Cell (row, col) covers x in [ox + col*mpp, ox + (col+1)*mpp) and
    y in [oy + row*mpp, oy + (row+1)*mpp).
    """

    h: int
    w: int
    meters_per_pixel: float
    origin_xy: tuple[float, float]

    def __post_init__(self) -> None:
        if self.meters_per_pixel <= 0:
            msg = "meters_per_pixel must be positive"
            raise ValueError(msg)
        if self.h < 1 or self.w < 1:
            msg = "frame must have at least one cell"
            raise ValueError(msg)

    @classmethod
    def covering(cls, xy: FloatArray, meters_per_pixel: float) -> BevFrame:
        ox, oy = float(xy[:, 0].min()), float(xy[:, 1].min())
        w = int(np.floor((xy[:, 0].max() - ox) / meters_per_pixel)) + 1
        h = int(np.floor((xy[:, 1].max() - oy) / meters_per_pixel)) + 1
        return cls(h=h, w=w, meters_per_pixel=meters_per_pixel, origin_xy=(ox, oy))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.h, self.w)

    @property
    def cell_area(self) -> float:
        return self.meters_per_pixel * self.meters_per_pixel

    def cells_of(self, xy: FloatArray) -> tuple[IntArray, IntArray, BoolArray]:
        """Return (rows, cols, inside) for metric xy coordinates."""
        cols = np.floor((xy[:, 0] - self.origin_xy[0]) / self.meters_per_pixel).astype(np.int64)
        rows = np.floor((xy[:, 1] - self.origin_xy[1]) / self.meters_per_pixel).astype(np.int64)
        inside = (rows >= 0) & (rows < self.h) & (cols >= 0) & (cols < self.w)
        return rows, cols, inside

    def cell_centers(self) -> tuple[FloatArray, FloatArray]:
        """Metric (x, y) grids of cell centers, each of shape (h, w)."""
        xs = self.origin_xy[0] + (np.arange(self.w) + 0.5) * self.meters_per_pixel
        ys = self.origin_xy[1] + (np.arange(self.h) + 0.5) * self.meters_per_pixel
        gx, gy = np.meshgrid(xs, ys)
        return gx, gy

    def to_pixel(self, x: float, y: float) -> tuple[float, float]:
        """Continuous (col, row) pixel coordinates of a metric point."""
        return (
            (x - self.origin_xy[0]) / self.meters_per_pixel,
            (y - self.origin_xy[1]) / self.meters_per_pixel,
        )


@dataclass(slots=True, frozen=True, eq=False)
class BevImage:
    values: FloatArray
    frame: BevFrame

    def __post_init__(self) -> None:
        if self.values.shape != self.frame.shape:
            msg = f"BEV values {self.values.shape} do not match frame {self.frame.shape}"
            raise ValueError(msg)
        if self.values.size and (self.values.min() < 0.0 or self.values.max() > 1.0):
            msg = "BEV values must lie in [0, 1]"
            raise ValueError(msg)


@dataclass(slots=True, frozen=True, eq=False)
class BinaryMask:
    values: BoolArray
    frame: BevFrame

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=bool)
        if values.shape != self.frame.shape:
            msg = f"mask {values.shape} does not match frame {self.frame.shape}"
            raise ValueError(msg)
        object.__setattr__(self, "values", values)

    @property
    def count(self) -> int:
        return int(self.values.sum())

    @property
    def area(self) -> float:
        return self.count * self.frame.cell_area

    def is_empty(self) -> bool:
        return not bool(self.values.any())

    def centroid(self) -> tuple[float, float]:
        rows, cols = np.nonzero(self.values)
        mpp = self.frame.meters_per_pixel
        return (
            self.frame.origin_xy[0] + (float(cols.mean()) + 0.5) * mpp,
            self.frame.origin_xy[1] + (float(rows.mean()) + 0.5) * mpp,
        )

    def contains_xy(self, xy: FloatArray) -> BoolArray:
        rows, cols, inside = self.frame.cells_of(xy)
        hit = np.zeros(xy.shape[0], dtype=bool)
        hit[inside] = self.values[rows[inside], cols[inside]]
        return hit

    @override
    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BinaryMask):
            return NotImplemented
        return self.frame == other.frame and np.array_equal(self.values, other.values)

    __hash__ = None  # type: ignore[assignment]


@dataclass(slots=True, frozen=True, eq=False)
class DistanceField:
    """Per-pixel Euclidean distance (in pixels) to the nearest wall pixel."""

    values: FloatArray
    frame: BevFrame


@dataclass(slots=True, frozen=True)
class Polygon2D:
    vertices: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        if len(self.vertices) < 3:
            msg = "polygon needs at least three vertices"
            raise ValueError(msg)

    @classmethod
    def from_shapely(cls, poly: Polygon) -> Polygon2D:
        # Drop the closing vertex; rings are implicitly closed.
        coords = list(poly.exterior.coords)[:-1]
        return cls(tuple((float(x), float(y)) for x, y in coords))

    def to_shapely(self) -> Polygon:
        return Polygon(self.vertices)

    @property
    def area(self) -> float:
        return float(self.to_shapely().area)

    @property
    def perimeter(self) -> float:
        return float(self.to_shapely().length)


@dataclass(slots=True, frozen=True)
class Box3D:
    min: Vec3
    max: Vec3

    def __post_init__(self) -> None:
        if any(lo > hi for lo, hi in zip(self.min, self.max, strict=True)):
            msg = f"box min {self.min} exceeds max {self.max}"
            raise ValueError(msg)

    @classmethod
    def from_points(cls, points: FloatArray) -> Box3D:
        lo = points.min(axis=0)
        hi = points.max(axis=0)
        return cls(
            (float(lo[0]), float(lo[1]), float(lo[2])),
            (float(hi[0]), float(hi[1]), float(hi[2])),
        )

    @classmethod
    def from_center_size(cls, center: Vec3, size: Vec3) -> Box3D:
        half = [s / 2.0 for s in size]
        return cls(
            (center[0] - half[0], center[1] - half[1], center[2] - half[2]),
            (center[0] + half[0], center[1] + half[1], center[2] + half[2]),
        )

    @property
    def center(self) -> Vec3:
        return (
            (self.min[0] + self.max[0]) / 2.0,
            (self.min[1] + self.max[1]) / 2.0,
            (self.min[2] + self.max[2]) / 2.0,
        )

    @property
    def size(self) -> Vec3:
        return (self.max[0] - self.min[0], self.max[1] - self.min[1], self.max[2] - self.min[2])

    @property
    def volume(self) -> float:
        sx, sy, sz = self.size
        return sx * sy * sz

    def union(self, other: Box3D) -> Box3D:
        return Box3D(
            (min(self.min[0], other.min[0]), min(self.min[1], other.min[1]), min(self.min[2], other.min[2])),
            (max(self.max[0], other.max[0]), max(self.max[1], other.max[1]), max(self.max[2], other.max[2])),
        )

    def contains(self, points: FloatArray) -> BoolArray:
        lo = np.asarray(self.min)
        hi = np.asarray(self.max)
        return np.all((points >= lo) & (points <= hi), axis=1)

    def translated(self, offset: Vec3) -> Box3D:
        return Box3D(
            (self.min[0] + offset[0], self.min[1] + offset[1], self.min[2] + offset[2]),
            (self.max[0] + offset[0], self.max[1] + offset[1], self.max[2] + offset[2]),
        )
