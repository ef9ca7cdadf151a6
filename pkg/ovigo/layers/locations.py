from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from ovigo.geometry.clustering import dbscan
from ovigo.geometry.polygons import (
    alpha_shape,
    convex_hull,
    mask_outline,
    points_in_polygon,
    polygon_compactness,
    rasterize_polygon,
)
from ovigo.models.errors import DegenerateCluster, EmptyBand, EmptyInput, MissingPartition
from ovigo.models.geometry import BevFrame, BinaryMask, Box3D, IntArray, PointCloud, Polygon2D
from ovigo.models.scene import FloorSlab, HeightBand, LocationNode, ObjectNode, RoomNode

logger = logging.getLogger(__name__)


def height_band_filter(
    cloud: PointCloud, band: HeightBand, bounds: tuple[float, float] | None = None
) -> PointCloud:
    """Keep points whose relative height lies within the band.

    Bounds default to the cloud's own lowest and highest points.
    """
    if len(cloud) == 0:
        raise EmptyInput("Cannot band-filter an empty cloud")
    b_min, b_max = bounds if bounds is not None else (float(cloud.z.min()), float(cloud.z.max()))
    span = b_max - b_min
    lo = b_min + band.alpha_min * span
    hi = b_min + band.alpha_max * span
    kept = cloud.select((cloud.z >= lo) & (cloud.z <= hi))
    if len(kept) == 0:
        raise EmptyBand(f"No points between z={lo:.3f} and z={hi:.3f}")
    return kept


def reassign_whole_objects(labels: IntArray, object_id: IntArray) -> IntArray:
    """Move every object's points to the cluster holding most of them; ties go to the lower cluster."""
    out = labels.copy()
    for obj in np.unique(object_id):
        member = object_id == obj
        clustered = labels[member]
        clustered = clustered[clustered >= 0]
        if clustered.size == 0:
            continue
        values, counts = np.unique(clustered, return_counts=True)
        out[member] = values[np.argmax(counts)]
    return out


@dataclass(slots=True, frozen=True)
class LocationCluster:
    label: int
    object_ids: tuple[int, ...]
    cloud: PointCloud


def cluster_locations(
    floor_cloud: PointCloud,
    band: HeightBand,
    eps: float = 0.5,
    min_pts: int = 10,
    min_objects: int = 2,
    *,
    bounds: tuple[float, float] | None = None,
    structure_id: int | None = None,
) -> list[LocationCluster]:
    """Band filter, cluster, reassign whole objects, then drop clusters with fewer than *min_objects*.

    Points labelled *structure_id* are left out; with None every labelled point counts as an object.
    """
    if floor_cloud.object_id is None:
        raise MissingPartition("Geometric location detection needs per-point object IDs")
    try:
        filtered = height_band_filter(floor_cloud, band, bounds)
    except EmptyBand:
        logger.info("Height band is empty; no locations")
        return []
    ids = filtered.object_id
    assert ids is not None
    keep = ids != structure_id if structure_id is not None else np.ones(len(ids), dtype=bool)
    objects = filtered.select(keep)
    if len(objects) == 0:
        return []
    object_ids = ids[keep]
    labels = reassign_whole_objects(dbscan(objects.points, eps, min_pts), object_ids)

    clusters: list[LocationCluster] = []
    for label in sorted(set(labels.tolist()) - {-1}):
        member = labels == label
        members = tuple(int(i) for i in np.unique(object_ids[member]))
        if len(members) < min_objects:
            logger.debug("Dropping cluster %d with %d objects", label, len(members))
            continue
        clusters.append(LocationCluster(label=label, object_ids=members, cloud=objects.select(member)))
    return clusters


def keep_polygon(poly: Polygon2D, compactness_min: float, min_area: float) -> bool:
    return poly.area >= min_area and polygon_compactness(poly) >= compactness_min


def detect_locations_geometric(
    floor_cloud: PointCloud,
    band: HeightBand,
    eps: float = 0.5,
    min_pts: int = 10,
    min_objects: int = 2,
    compactness_min: float = 0.3,
    min_area: float = 0.25,
    *,
    alpha: float = 0.5,
    bounds: tuple[float, float] | None = None,
    structure_id: int | None = None,
) -> list[Polygon2D]:
    """Location outlines from object clusters; small or elongated outlines are discarded."""
    polygons: list[Polygon2D] = []
    clusters = cluster_locations(floor_cloud, band, eps, min_pts, min_objects, bounds=bounds, structure_id=structure_id)
    for cluster in clusters:
        try:
            shapes = alpha_shape(cluster.cloud.points[:, :2], alpha)
        except DegenerateCluster as exc:
            logger.debug("Cluster %d has no outline: %s", cluster.label, exc.message)
            continue
        for poly in shapes:
            if keep_polygon(poly, compactness_min, min_area):
                polygons.append(poly)
            else:
                logger.debug("Discarding outline of area %.2f m^2 in cluster %d", poly.area, cluster.label)
    return polygons


def object_partition(objects: Sequence[ObjectNode], slab: FloorSlab) -> PointCloud:
    """Object-layer clouds labelled by node ID, for scenes without an annotated partition."""
    clouds: list[PointCloud] = []
    for node in objects:
        z = node.cloud.z
        inside = node.cloud.select((z >= slab.z_low) & (z <= slab.z_high))
        if len(inside):
            clouds.append(PointCloud(inside.points, np.full(len(inside), node.id, dtype=np.int64)))
    if not clouds:
        return PointCloud(np.zeros((0, 3)), np.zeros(0, dtype=np.int64))
    return PointCloud.concat(clouds)


def assign_room(mask: BinaryMask, rooms: Sequence[RoomNode]) -> int | None:
    """Room with the largest mask overlap, else the nearest room by mask centroid."""
    if not rooms:
        return None
    overlaps = [int(np.count_nonzero(mask.values & r.mask.values)) for r in rooms]
    best = max(range(len(rooms)), key=lambda i: (overlaps[i], -rooms[i].id))
    if overlaps[best] > 0:
        return rooms[best].id
    cx, cy = mask.centroid()
    nearest = min(rooms, key=lambda r: (np.hypot(r.mask.centroid()[0] - cx, r.mask.centroid()[1] - cy), r.id))
    logger.warning("Location at (%.2f, %.2f) overlaps no room; attaching to nearest room %d", cx, cy, nearest.id)
    return nearest.id


def _location_node(
    loc_id: int,
    polygon: Polygon2D,
    mask: BinaryMask,
    slab: FloorSlab,
    band: HeightBand,
    rooms: Sequence[RoomNode],
) -> LocationNode | None:
    if mask.is_empty():
        logger.warning("Location outline on floor %d covers no BEV cell; skipped", slab.index)
        return None
    room_id = assign_room(mask, rooms)
    if room_id is None:
        logger.warning("Floor %d has no rooms; location skipped", slab.index)
        return None
    try:
        banded = height_band_filter(slab.cloud, band, (slab.z_low, slab.z_high))
        cloud = banded.select(mask.contains_xy(banded.points[:, :2]))
    except (EmptyInput, EmptyBand):
        cloud = PointCloud.empty()
    if len(cloud):
        bbox = Box3D.from_points(cloud.points)
    else:
        xs = [v[0] for v in polygon.vertices]
        ys = [v[1] for v in polygon.vertices]
        span = slab.z_high - slab.z_low
        bbox = Box3D(
            (min(xs), min(ys), slab.z_low + band.alpha_min * span),
            (max(xs), max(ys), slab.z_low + band.alpha_max * span),
        )
    return LocationNode(
        id=loc_id,
        room_id=room_id,
        polygon=polygon,
        mask=mask,
        cloud=cloud,
        bbox=bbox,
        floor_index=slab.index,
    )


def locations_from_polygons(
    polygons: Sequence[Polygon2D],
    slab: FloorSlab,
    frame: BevFrame,
    rooms: Sequence[RoomNode],
    band: HeightBand,
    *,
    first_id: int = 1,
) -> list[LocationNode]:
    out: list[LocationNode] = []
    for poly in polygons:
        node = _location_node(first_id + len(out), poly, rasterize_polygon(poly, frame), slab, band, rooms)
        if node is not None:
            out.append(node)
    return out


def locations_from_masks(
    masks: Sequence[BinaryMask],
    slab: FloorSlab,
    rooms: Sequence[RoomNode],
    objects: Sequence[ObjectNode],
    band: HeightBand,
    *,
    first_id: int = 1,
) -> list[LocationNode]:
    """Locations from externally detected masks.

    The outline is the hull of the objects lying entirely inside the mask, or the
    mask's own outline when no object does.
    """
    out: list[LocationNode] = []
    for mask in masks:
        if mask.is_empty():
            logger.warning("Skipping an empty location mask on floor %d", slab.index)
            continue
        inside: list[np.ndarray] = []
        for node in objects:
            z = node.cloud.z
            on_floor = node.cloud.points[(z >= slab.z_low) & (z <= slab.z_high)]
            if on_floor.shape[0] and mask.contains_xy(on_floor[:, :2]).all():
                inside.append(on_floor[:, :2])
        polygon = convex_hull(np.vstack(inside)) if inside else None
        if polygon is None:
            polygon = mask_outline(mask)
        node = _location_node(first_id + len(out), polygon, mask, slab, band, rooms)
        if node is not None:
            out.append(node)
    return out


def polygon_coverage(poly: Polygon2D, cloud: PointCloud) -> float:
    """Fraction of the cloud whose xy falls inside the polygon."""
    if len(cloud) == 0:
        return 0.0
    return float(points_in_polygon(poly, cloud.points[:, :2]).mean())
