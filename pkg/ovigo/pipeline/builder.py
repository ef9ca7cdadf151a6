# Scene construction: RGB-D sequence in, tagged hierarchical scene graph out.
#
# Stages run in a fixed order, each consuming the previous one's output:
#   load       read depth frames and detections (thread pool, one task per frame)
#              and the scene cloud, or accumulate it from depth when absent.
#   floors     height-histogram floor slabs, one BEV frame per floor.
#   rooms      watershed rooms (thread pool, one task per floor); IDs are then
#              renumbered globally in floor order.
#   objects    per-frame fragments (thread pool) merged in frame order.
#   locations  geometric detector or ingested masks, per floor.
#   graph      containment edges.
#   tagging    LLM room and location tags, or fallback tags without a client.
#
# Worker results are collected in submission order, so the graph does not depend
# on scheduling. Any OvigoError becomes an Err(StageError) naming its stage.

from __future__ import annotations

import logging
import os
from collections.abc import Callable, Iterable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from typing import TypeVar

import numpy as np
from result import Err, Ok, Result

from ovigo.config.schema import PipelineConfig
from ovigo.graph.build import build_graph
from ovigo.layers.floors import floor_frame, floor_node, segment_floors
from ovigo.layers.locations import (
    detect_locations_geometric,
    locations_from_masks,
    locations_from_polygons,
    object_partition,
)
from ovigo.layers.objects import aggregate_objects, backproject_pixels, frame_fragments
from ovigo.layers.rooms import segment_rooms
from ovigo.layers.tagging import tag_graph
from ovigo.models.enums import LocationSource
from ovigo.models.errors import EmptyBand, EmptyInput, MissingPartition, OvigoError, StageError
from ovigo.models.geometry import BevFrame, PointCloud
from ovigo.models.scene import (
    FloorSlab,
    FrameDetections,
    LocationNode,
    ObjectFragment,
    ObjectNode,
    RoomNode,
    SceneGraph,
    SequenceManifest,
)
from ovigo.reasoning.client import ChatClient
from ovigo.services.cloud_io import read_point_cloud
from ovigo.services.frames import load_frame
from ovigo.services.fs import DEFAULT_FS, FileSystem
from ovigo.services.location_masks import load_location_mask_files

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

type LoadedFrame = tuple[np.ndarray, FrameDetections]
type StageCallback = Callable[[str], None]


def worker_count(threads: int | None) -> int:
    return max(1, threads if threads is not None else (os.cpu_count() or 1))


def _ordered_map(fn: Callable[[T], R], items: Iterable[T], workers: int) -> list[R]:
    items = list(items)
    if workers == 1 or len(items) < 2:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))


def accumulate_cloud(frames: Iterable[LoadedFrame], voxel: float) -> PointCloud:
    """Back-project every valid depth pixel and keep one point per voxel, first seen wins."""
    chunks: list[np.ndarray] = []
    for depth, det in frames:
        keep = depth > 0
        if keep.any():
            chunks.append(backproject_pixels(depth, keep, det.intrinsics, det.pose, det.depth_scale))
    if not chunks:
        raise EmptyInput("No frame has valid depth to accumulate")
    points = np.vstack(chunks)
    keys = np.floor(points / voxel).astype(np.int64)
    _, first = np.unique(keys, axis=0, return_index=True)
    return PointCloud(points[np.sort(first)])


def _load(
    manifest: SequenceManifest, config: PipelineConfig, fs: FileSystem, workers: int
) -> tuple[list[LoadedFrame], PointCloud]:
    frames = _ordered_map(lambda entry: load_frame(entry, fs), manifest.frames, workers)
    if manifest.cloud_path is not None:
        cloud = read_point_cloud(manifest.cloud_path, fs)
    else:
        cloud = accumulate_cloud(frames, config.meters_per_pixel / 2)
        logger.info("Accumulated %d points from %d depth frames", len(cloud), len(frames))
    if len(cloud) == 0:
        raise EmptyInput("Scene cloud is empty")
    return frames, cloud


def _rooms(slabs: list[FloorSlab], frames: dict[int, BevFrame], config: PipelineConfig, workers: int) -> list[RoomNode]:
    def one(slab: FloorSlab) -> list[RoomNode]:
        return segment_rooms(
            slab,
            config.delta_wall,
            config.meters_per_pixel,
            ceiling_margin=config.ceiling_margin,
            min_seed_pixels=config.min_seed_pixels,
            min_room_area=config.min_room_area,
            frame=frames[slab.index],
        )

    rooms: list[RoomNode] = []
    for per_floor in _ordered_map(one, slabs, workers):
        rooms.extend(replace(room, id=len(rooms) + 1) for room in per_floor)
    return rooms


def _objects(frames: list[LoadedFrame], config: PipelineConfig, workers: int) -> list[ObjectNode]:
    def one(loaded: LoadedFrame) -> list[ObjectFragment]:
        depth, det = loaded
        return frame_fragments(
            det, depth, min_score=config.min_detection_score, min_points=config.min_fragment_points
        )

    fragments = [frag for per_frame in _ordered_map(one, frames, workers) for frag in per_frame]
    logger.info("Merging %d fragments from %d frames", len(fragments), len(frames))
    return aggregate_objects(
        fragments,
        config.spatial_iou_min,
        config.overlap_min,
        tag_similarity_min=config.tag_similarity_min,
    )


def _geometric_locations(
    slab: FloorSlab,
    frame: BevFrame,
    rooms: list[RoomNode],
    objects: list[ObjectNode],
    config: PipelineConfig,
    first_id: int,
    *,
    structure_id: int | None = None,
) -> list[LocationNode]:
    if slab.cloud.object_id is not None:
        cloud = slab.cloud
    else:
        cloud, structure_id = object_partition(objects, slab), None
    try:
        polygons = detect_locations_geometric(
            cloud,
            config.band,
            config.location_eps,
            config.location_min_pts,
            config.min_objects,
            config.compactness_min,
            config.min_location_area,
            alpha=config.alpha,
            bounds=(slab.z_low, slab.z_high),
            structure_id=structure_id,
        )
    except (EmptyInput, EmptyBand, MissingPartition) as exc:
        logger.warning("Floor %d: no locations detected (%s)", slab.index, exc.message)
        return []
    return locations_from_polygons(polygons, slab, frame, rooms, config.band, first_id=first_id)


def _locations(
    manifest: SequenceManifest,
    slabs: list[FloorSlab],
    frames: dict[int, BevFrame],
    rooms: list[RoomNode],
    objects: list[ObjectNode],
    config: PipelineConfig,
    fs: FileSystem,
) -> list[LocationNode]:
    masks = (
        load_location_mask_files(manifest.location_masks, frames, fs)
        if config.location_source is LocationSource.MASKS
        else {}
    )
    out: list[LocationNode] = []
    for slab in slabs:
        floor_rooms = [r for r in rooms if r.floor_index == slab.index]
        first_id = len(out) + 1
        if config.location_source is LocationSource.MASKS:
            out.extend(
                locations_from_masks(
                    masks.get(slab.index, []), slab, floor_rooms, objects, config.band, first_id=first_id
                )
            )
        else:
            out.extend(
                _geometric_locations(
                    slab,
                    frames[slab.index],
                    floor_rooms,
                    objects,
                    config,
                    first_id,
                    structure_id=manifest.structure_id,
                )
            )
    return out


def build_scene(
    manifest: SequenceManifest,
    config: PipelineConfig,
    llm: ChatClient | None = None,
    fs: FileSystem = DEFAULT_FS,
    *,
    on_stage: StageCallback | None = None,
) -> Result[SceneGraph, StageError]:
    workers = worker_count(config.threads)
    stage = "load"

    def enter(name: str) -> None:
        nonlocal stage
        stage = name
        logger.debug("Stage %s", name)
        if on_stage is not None:
            on_stage(name)

    try:
        enter("load")
        frames, cloud = _load(manifest, config, fs, workers)

        enter("floors")
        slabs = segment_floors(
            cloud,
            config.bin_h,
            config.delta_f,
            config.p_h,
            eps=config.floor_eps,
            min_pts=config.floor_min_pts,
            force_extend=config.force_extend,
        )
        bev_frames = {slab.index: floor_frame(slab, config.meters_per_pixel) for slab in slabs}
        floors = [floor_node(slab, bev_frames[slab.index]) for slab in slabs]
        logger.info("Found %d floors", len(floors))

        enter("rooms")
        rooms = _rooms(slabs, bev_frames, config, workers)
        logger.info("Found %d rooms", len(rooms))

        enter("objects")
        objects = _objects(frames, config, workers)
        logger.info("Found %d objects", len(objects))

        enter("locations")
        locations = _locations(manifest, slabs, bev_frames, rooms, objects, config, fs)
        logger.info("Found %d locations", len(locations))

        enter("graph")
        graph = build_graph(
            floors, rooms, locations, objects, building_tag=config.building_tag, config=config.to_dict()
        )

        enter("tagging")
        graph = tag_graph(graph, llm)
    except OvigoError as exc:
        return Err(StageError.from_exception(stage, exc))
    return Ok(graph)
