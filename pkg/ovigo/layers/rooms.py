from __future__ import annotations

import logging

import numpy as np

from ovigo.geometry.raster import (
    euclidean_distance_field,
    label_seeds,
    otsu_threshold,
    project_bev,
    wall_mask,
    watershed,
)
from ovigo.layers.floors import floor_frame
from ovigo.models.errors import EmptyInput
from ovigo.models.geometry import BevFrame, BinaryMask, Box3D
from ovigo.models.scene import FloorSlab, RoomNode

logger = logging.getLogger(__name__)


def mask_box(mask: BinaryMask, z_low: float, z_high: float) -> Box3D:
    """Metric xy extent of the mask's cells crossed with a height range."""
    rows, cols = np.nonzero(mask.values)
    f = mask.frame
    mpp = f.meters_per_pixel
    return Box3D(
        (f.origin_xy[0] + int(cols.min()) * mpp, f.origin_xy[1] + int(rows.min()) * mpp, z_low),
        (f.origin_xy[0] + (int(cols.max()) + 1) * mpp, f.origin_xy[1] + (int(rows.max()) + 1) * mpp, z_high),
    )


def segment_rooms(
    floor: FloorSlab,
    delta_wall: float = 0.5,
    meters_per_pixel: float = 0.05,
    *,
    ceiling_margin: float = 0.15,
    min_seed_pixels: int = 4,
    min_room_area: float = 1.0,
    frame: BevFrame | None = None,
    first_id: int = 1,
) -> list[RoomNode]:
    """Watershed room masks of one floor; rooms come back untagged with consecutive IDs."""
    if not 0.0 < delta_wall < 1.0:
        msg = f"delta_wall must lie in (0, 1), got {delta_wall}"
        raise ValueError(msg)
    if len(floor.cloud) == 0:
        raise EmptyInput(f"Floor {floor.index} has no points")
    frame = frame or floor_frame(floor, meters_per_pixel)
    below_ceiling = floor.cloud.select(floor.cloud.z < floor.z_high - ceiling_margin)
    if len(below_ceiling) == 0:
        raise EmptyInput(f"Floor {floor.index} has no points below its ceiling margin")

    bev = project_bev(below_ceiling, frame.meters_per_pixel, frame)
    walls = wall_mask(bev, delta_wall)
    edf = euclidean_distance_field(walls)
    markers = label_seeds(otsu_threshold(edf), min_seed_pixels)
    labels = watershed(edf, markers, walls)

    xy = floor.cloud.points[:, :2]
    rooms: list[RoomNode] = []
    for label in range(1, int(labels.max()) + 1):
        mask = BinaryMask(labels == label, frame)
        if mask.is_empty():
            continue
        if mask.area < min_room_area:
            logger.info("Floor %d: dropping %.2f m^2 region below the minimum room area", floor.index, mask.area)
            continue
        rooms.append(
            RoomNode(
                id=first_id + len(rooms),
                floor_index=floor.index,
                mask=mask,
                cloud=floor.cloud.select(mask.contains_xy(xy)),
                bbox=mask_box(mask, floor.z_low, floor.z_high),
            )
        )
    logger.debug("Floor %d: %d rooms from %d seeds", floor.index, len(rooms), int(markers.max()))
    return rooms
