"""BEV rasterization and the distance-transform watershed used for room segmentation."""

from __future__ import annotations

import numpy as np
from scipy import ndimage
from skimage.filters import threshold_otsu
from skimage.segmentation import watershed as skimage_watershed

from ovigo.models.errors import DegenerateField, EmptyInput, FrameMismatch, NoSeeds, NoWalls
from ovigo.models.geometry import BevFrame, BevImage, BinaryMask, DistanceField, IntArray, PointCloud

OTSU_BINS = 256


def project_bev(cloud: PointCloud, meters_per_pixel: float, frame: BevFrame | None = None) -> BevImage:
    """Per-cell maximum height, min-max normalized over occupied cells; empty cells are 0."""
    if len(cloud) == 0:
        raise EmptyInput("Cannot project an empty cloud")
    xy = cloud.points[:, :2]
    frame = frame or BevFrame.covering(xy, meters_per_pixel)
    rows, cols, inside = frame.cells_of(xy)

    top = np.full(frame.h * frame.w, -np.inf)
    np.maximum.at(top, rows[inside] * frame.w + cols[inside], cloud.z[inside])
    occupied = np.isfinite(top)
    values = np.zeros_like(top)
    if occupied.any():
        lo, hi = top[occupied].min(), top[occupied].max()
        if hi > lo:
            values[occupied] = (top[occupied] - lo) / (hi - lo)
    return BevImage(values=values.reshape(frame.shape), frame=frame)


def wall_mask(bev: BevImage, delta_wall: float) -> BinaryMask:
    return BinaryMask(bev.values > delta_wall, bev.frame)


def euclidean_distance_field(mask: BinaryMask) -> DistanceField:
    if mask.is_empty():
        raise NoWalls("Wall mask has no positive pixels")
    # EDT measures distance to the nearest zero, so invert the wall mask.
    values = ndimage.distance_transform_edt(~mask.values)
    return DistanceField(values=np.asarray(values, dtype=np.float64), frame=mask.frame)


def otsu_level(values: np.ndarray) -> float:
    if values.size == 0 or float(values.min()) == float(values.max()):
        raise DegenerateField("Otsu threshold needs at least two distinct values")
    return float(threshold_otsu(values, nbins=OTSU_BINS))


def otsu_threshold(field: DistanceField) -> BinaryMask:
    """Region seeds: pixels strictly above the Otsu level of the field."""
    return BinaryMask(field.values > otsu_level(field.values), field.frame)


def label_seeds(seeds: BinaryMask, min_pixels: int = 1) -> IntArray:
    """8-connected seed components numbered 1..k in raster order; small components are dropped."""
    labels, count = ndimage.label(seeds.values, structure=np.ones((3, 3), dtype=bool))
    if count:
        sizes = np.bincount(labels.ravel(), minlength=count + 1)
        keep = np.flatnonzero(sizes >= min_pixels)
        keep = keep[keep > 0]
        remap = np.zeros(count + 1, dtype=np.int64)
        remap[keep] = np.arange(1, keep.shape[0] + 1)
        labels = remap[labels]
    if not np.any(labels):
        raise NoSeeds("No seed component survived")
    return np.asarray(labels, dtype=np.int64)


def watershed(edf: DistanceField, seeds: IntArray, barrier: BinaryMask) -> IntArray:
    """Flood seed labels across non-barrier pixels, deepest EDF first.

    Barrier pixels and pixels unreachable from any seed stay 0.
    """
    if seeds.shape != edf.values.shape or barrier.frame.shape != edf.values.shape:
        raise FrameMismatch("Seed, barrier and distance grids must share a shape")
    markers = np.where(barrier.values, 0, seeds).astype(np.int64)
    if not np.any(markers):
        raise NoSeeds("Watershed needs at least one seed outside the barrier")
    labels = skimage_watershed(-edf.values, markers=markers, mask=~barrier.values, connectivity=1)
    return np.asarray(labels, dtype=np.int64)
