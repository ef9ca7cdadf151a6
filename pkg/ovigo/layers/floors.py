from __future__ import annotations

import logging

import numpy as np

from ovigo.geometry.clustering import dbscan
from ovigo.geometry.histogram import build_height_histogram, find_peaks
from ovigo.models.errors import NoFloors, UnpairedBoundary
from ovigo.models.geometry import BevFrame, BinaryMask, Box3D, Peak, PointCloud
from ovigo.models.scene import FloorNode, FloorSlab

logger = logging.getLogger(__name__)


def floor_tag(index: int) -> str:
    return f"floor {index}"


def _boundary_peaks(peaks: list[Peak], eps: float, min_pts: int) -> list[Peak]:
    """Cluster peak heights and keep the two tallest peaks of each cluster, sorted by z."""
    labels = dbscan([p.z_center for p in peaks], eps, min_pts)
    kept: list[Peak] = []
    for label in sorted(set(labels.tolist()) - {-1}):
        members = [p for p, lab in zip(peaks, labels.tolist(), strict=True) if lab == label]
        members.sort(key=lambda p: (-p.height, p.z_center))
        kept.extend(members[:2])
    return sorted(kept, key=lambda p: p.z_center)


def segment_floors(
    cloud: PointCloud,
    bin_h: float = 0.01,
    delta_f: float = 0.2,
    p_h: float = 0.9,
    *,
    eps: float = 0.5,
    min_pts: int = 1,
    force_extend: bool = False,
) -> list[FloorSlab]:
    """Split the cloud into floor slabs bounded by consecutive pairs of dense height peaks."""
    hist = build_height_histogram(cloud, bin_h)
    peaks = _boundary_peaks(find_peaks(hist, delta_f, p_h), eps, min_pts)
    if not peaks:
        raise NoFloors("No height peaks survived clustering")
    logger.debug("Floor boundary peaks at z=%s", [round(p.z_center, 3) for p in peaks])

    bounds = [(hist.bin_low(p.bin_index), hist.bin_high(p.bin_index)) for p in peaks]
    if len(bounds) % 2:
        if not force_extend:
            raise UnpairedBoundary(
                f"{len(bounds)} boundary peaks cannot be paired into floors",
                peaks=[round(p.z_center, 4) for p in peaks],
            )
        top = max(float(cloud.z.max()), bounds[-1][1])
        logger.warning("Odd boundary count; pairing the last peak with the cloud top at z=%.3f", top)
        bounds.append((top, top))

    z = cloud.z
    taken = np.zeros(len(cloud), dtype=bool)
    slabs: list[FloorSlab] = []
    for index in range(len(bounds) // 2):
        z_low = bounds[2 * index][0]
        z_high = bounds[2 * index + 1][1]
        # A point on a shared boundary stays with the lower slab.
        member = (z >= z_low) & (z <= z_high) & ~taken
        taken |= member
        slab = FloorSlab(index=index, z_low=z_low, z_high=z_high, cloud=cloud.select(member), tag=floor_tag(index))
        slabs.append(slab)
    return slabs


def floor_frame(slab: FloorSlab, meters_per_pixel: float) -> BevFrame:
    """BEV raster covering the slab; every room and location mask of the floor lives in it."""
    return BevFrame.covering(slab.cloud.points[:, :2], meters_per_pixel)


def floor_node(slab: FloorSlab, frame: BevFrame) -> FloorNode:
    rows, cols, inside = frame.cells_of(slab.cloud.points[:, :2])
    occupancy = np.zeros(frame.shape, dtype=bool)
    occupancy[rows[inside], cols[inside]] = True
    lo = Box3D.from_points(slab.cloud.points)
    bbox = Box3D((lo.min[0], lo.min[1], slab.z_low), (lo.max[0], lo.max[1], slab.z_high))
    return FloorNode(
        id=slab.index,
        z_low=slab.z_low,
        z_high=slab.z_high,
        cloud=slab.cloud,
        bbox=bbox,
        mask=BinaryMask(occupancy, frame),
        tag=slab.tag,
    )
