from __future__ import annotations

import numpy as np

from ovigo.graph.build import build_graph
from ovigo.models.geometry import BevFrame, BinaryMask, Box3D, PointCloud, Polygon2D
from ovigo.models.scene import FloorNode, LocationNode, ObjectNode, RoomNode, SceneGraph

FRAME = BevFrame(h=40, w=80, meters_per_pixel=0.1, origin_xy=(0.0, 0.0))


def box_points(box: Box3D, step: float = 0.1) -> np.ndarray:
    axes = [np.arange(lo, hi + 1e-9, step) for lo, hi in zip(box.min, box.max, strict=True)]
    gx, gy, gz = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([gx.ravel(), gy.ravel(), gz.ravel()])


def make_object(
    node_id: int, tag: str, box: Box3D, *, room_id: int | None = None, location_id: int | None = None
) -> ObjectNode:
    return ObjectNode(
        id=node_id,
        cloud=PointCloud(box_points(box)),
        bbox=box,
        tags={tag: 1},
        room_id=room_id,
        location_id=location_id,
    )


def rect_mask(x0: float, y0: float, x1: float, y1: float, frame: BevFrame = FRAME) -> BinaryMask:
    gx, gy = frame.cell_centers()
    return BinaryMask((gx >= x0) & (gx < x1) & (gy >= y0) & (gy < y1), frame)


def make_floor(node_id: int = 0, frame: BevFrame = FRAME, z_low: float = 0.0, z_high: float = 3.0) -> FloorNode:
    return FloorNode(
        id=node_id,
        z_low=z_low,
        z_high=z_high,
        cloud=PointCloud(np.array([[0.5, 0.5, z_low + 0.01], [7.5, 3.5, z_high - 0.01]])),
        bbox=Box3D((0.0, 0.0, z_low), (8.0, 4.0, z_high)),
        mask=rect_mask(0.0, 0.0, 8.0, 4.0, frame),
        tag=f"floor {node_id}",
    )


def make_room(node_id: int, x0: float, x1: float, tag: str = "", floor_index: int = 0) -> RoomNode:
    return RoomNode(
        id=node_id,
        floor_index=floor_index,
        mask=rect_mask(x0, 0.0, x1, 4.0),
        cloud=PointCloud(np.array([[(x0 + x1) / 2, 2.0, 0.01], [(x0 + x1) / 2, 2.0, 2.9]])),
        bbox=Box3D((x0, 0.0, 0.0), (x1, 4.0, 3.0)),
        tag=tag,
    )


def make_location(
    node_id: int, room_id: int, x0: float, y0: float, x1: float, y1: float, tag: str = ""
) -> LocationNode:
    polygon = Polygon2D(((x0, y0), (x1, y0), (x1, y1), (x0, y1)))
    return LocationNode(
        id=node_id,
        room_id=room_id,
        polygon=polygon,
        mask=rect_mask(x0, y0, x1, y1),
        cloud=PointCloud.empty(),
        bbox=Box3D((x0, y0, 0.15), (x1, y1, 2.5)),
        tag=tag,
    )


def two_room_graph() -> SceneGraph:
    """Living room (x 0..4) with a seating area, kitchen (x 4..8) without one."""
    floor = make_floor()
    rooms = [make_room(1, 0.0, 4.0, tag="living room"), make_room(2, 4.0, 8.0, tag="kitchen")]
    locations = [make_location(1, 1, 0.5, 0.5, 3.0, 2.5, tag="seating area")]
    objects = [
        make_object(1, "sofa", Box3D((0.6, 0.6, 0.0), (2.6, 1.4, 0.8))),
        make_object(2, "pillow", Box3D((0.8, 0.8, 0.8), (1.2, 1.2, 1.0))),
        make_object(3, "coffee table", Box3D((1.0, 1.7, 0.0), (2.0, 2.3, 0.4))),
        make_object(4, "lamp", Box3D((3.3, 3.3, 0.0), (3.6, 3.6, 1.2))),
        make_object(5, "stove", Box3D((4.5, 0.5, 0.0), (5.0, 1.0, 0.9))),
        make_object(6, "vase", Box3D((6.0, 2.0, 0.0), (6.2, 2.2, 0.4))),
        make_object(7, "vase", Box3D((7.0, 3.0, 0.0), (7.2, 3.2, 0.4))),
    ]
    return build_graph([floor], rooms, locations, objects, building_tag="house", config={"binH": 0.01})
