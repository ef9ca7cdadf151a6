"""Synthetic apartment fixture: RGB-D sequence, scene cloud, ground truth and a scripted transcript.

Everything is derived from one seed. The generator builds the scene graph
from its own output with the scripted policy standing in for the language
model, so the transcript it records replays exactly when the same files are
later fed to ``build-graph`` and ``ground``.
"""

from __future__ import annotations

import io
import json
import logging
import math
import os
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np
from PIL import Image
from result import Err, Ok, Result

from ovigo.config.defaults import default_config
from ovigo.config.schema import PipelineConfig
from ovigo.evaluation.benchmark import benchmark_to_jsonl
from ovigo.fixtures.camera import (
    STRUCTURE,
    FloorRenderer,
    RenderedView,
    find_view,
    intrinsics_of,
    shade,
    view_detections,
)
from ovigo.fixtures.layout import GtObject, SceneLayout, build_layout, sample_cloud
from ovigo.fixtures.policy import FixturePolicy, QueryPlan
from ovigo.fixtures.spec import FixtureSpec
from ovigo.geometry.iou import box3d_iou_or_zero
from ovigo.geometry.polygons import rasterize_polygon
from ovigo.models.enums import EdgeKind, Relation
from ovigo.models.errors import DegenerateViewpoint, OvigoError, StageError
from ovigo.models.evaluation import BenchmarkItem
from ovigo.models.geometry import Box3D, Polygon2D
from ovigo.models.scene import FrameDetections, ObjectNode, SceneGraph
from ovigo.pipeline.builder import build_scene
from ovigo.reasoning.client import PolicyChatClient, RecordingChatClient
from ovigo.reasoning.edges import semantic_relation
from ovigo.reasoning.pipeline import run_pipeline
from ovigo.services.cloud_io import write_point_cloud
from ovigo.services.frames import detections_to_dict, encode_depth_png, intrinsics_to_dict, load_sequence
from ovigo.services.fs import DEFAULT_FS, FileSystem
from ovigo.services.location_masks import location_masks_to_dict

logger = logging.getLogger(__name__)

DEPTH_SCALE = 0.001
MATCH_IOU = 0.5
MANIFEST = "manifest.json"
CLOUD = "scene.ply"
BENCHMARK = "benchmark.jsonl"
TRANSCRIPT = "transcript.jsonl"

_SIDE_PHRASES = {
    Relation.LEFT: "on the left",
    Relation.RIGHT: "on the right",
    Relation.FRONT: "in front",
    Relation.BACK: "at the back",
}


@dataclass(slots=True)
class FixtureReport:
    out_dir: str
    frames: int = 0
    skipped_views: list[int] = field(default_factory=list)
    gt_objects: int = 0
    graph_counts: dict[str, int] = field(default_factory=dict)
    queries: int = 0
    transcript_entries: int = 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "out_dir": self.out_dir,
            "frames": self.frames,
            "skipped_views": self.skipped_views,
            "gt_objects": self.gt_objects,
            "graph": self.graph_counts,
            "queries": self.queries,
            "transcript_entries": self.transcript_entries,
        }


def _json(data: Any) -> str:
    return json.dumps(data, indent=1, sort_keys=True) + "\n"


def _rgb_png(view: RenderedView) -> bytes:
    buffer = io.BytesIO()
    Image.fromarray(shade(view)).save(buffer, format="PNG")
    return buffer.getvalue()


def _box_dict(box: Box3D) -> dict[str, list[float]]:
    return {"min": list(box.min), "max": list(box.max)}


def _write_frames(
    layout: SceneLayout, spec: FixtureSpec, out_dir: str, fs: FileSystem, report: FixtureReport
) -> list[dict[str, Any]]:
    intrinsics = intrinsics_of(spec.camera)
    entries: list[dict[str, Any]] = []
    for floor in layout.floors:
        renderer = FloorRenderer(layout, floor.index, spec.camera)
        for target in renderer.objects:
            view = find_view(renderer, target, layout.room(target.room), floor.z0)
            if view is None:
                report.skipped_views.append(target.id)
                continue
            frame_id = len(entries)
            names = {
                "rgb_path": f"frames/rgb_{frame_id:03d}.png",
                "depth_path": f"frames/depth_{frame_id:03d}.png",
                "detections_path": f"frames/det_{frame_id:03d}.json",
            }
            detections = FrameDetections(
                frame_id=frame_id,
                intrinsics=intrinsics,
                pose=view.pose,
                depth_scale=DEPTH_SCALE,
                detections=view_detections(view, renderer),
            )
            fs.write_bytes(os.path.join(out_dir, names["rgb_path"]), _rgb_png(view))
            fs.write_bytes(os.path.join(out_dir, names["depth_path"]), encode_depth_png(view.depth_mm))
            fs.write_text(os.path.join(out_dir, names["detections_path"]), json.dumps(detections_to_dict(detections)))
            entries.append(
                {
                    "frame_id": frame_id,
                    **names,
                    "pose": view.pose.tolist(),
                    "intrinsics": intrinsics_to_dict(intrinsics),
                    "depth_scale": DEPTH_SCALE,
                }
            )
    report.frames = len(entries)
    return entries


def _rect_polygon(rect: tuple[float, float, float, float]) -> Polygon2D:
    x0, y0, x1, y1 = rect
    return Polygon2D(((x0, y0), (x1, y0), (x1, y1), (x0, y1)))


def _write_ground_truth(layout: SceneLayout, graph: SceneGraph, out_dir: str, fs: FileSystem) -> None:
    objects = [
        {"id": o.id, "tag": o.tag, "floor": o.floor, "room": o.room, "bbox": _box_dict(o.box)} for o in layout.objects
    ]
    fs.write_text(os.path.join(out_dir, "gt", "objects.json"), _json(objects))
    for floor_id, floor in sorted(graph.floors.items()):
        frame = floor.frame
        rooms = [rasterize_polygon(_rect_polygon(r.rect), frame) for r in layout.rooms if r.floor == floor_id]
        locations = [rasterize_polygon(loc.polygon, frame) for loc in layout.locations if loc.floor == floor_id]
        fs.write_text(
            os.path.join(out_dir, "gt", f"rooms_floor{floor_id}.json"),
            _json(location_masks_to_dict(floor_id, frame, rooms)),
        )
        fs.write_text(
            os.path.join(out_dir, "gt", f"locations_floor{floor_id}.json"),
            _json(location_masks_to_dict(floor_id, frame, locations)),
        )


def match_nodes(layout: SceneLayout, graph: SceneGraph) -> dict[int, tuple[int, float]]:
    """Ground-truth object ID -> (best node ID, its 3D box IoU)."""
    out: dict[int, tuple[int, float]] = {}
    for obj in layout.objects:
        scored = [(box3d_iou_or_zero(node.bbox, obj.box), -node.id) for node in graph.objects.values()]
        if scored:
            iou, neg_id = max(scored)
            out[obj.id] = (-neg_id, iou)
    return out


def _object_labels(layout: SceneLayout, graph: SceneGraph) -> dict[str, Any]:
    """Each node labelled with the tag of the ground-truth object its box overlaps most."""
    labels: dict[str, str] = {}
    for node in graph.objects.values():
        best = max(layout.objects, key=lambda o: (box3d_iou_or_zero(node.bbox, o.box), -o.id))
        labels[str(node.id)] = best.tag
    return {"label_set": sorted({o.tag for o in layout.objects}), "objects": labels}


def _side_phrase(node: ObjectNode, twin: ObjectNode, viewpoint: tuple[float, float]) -> str | None:
    try:
        labels = semantic_relation(node.bbox, twin.bbox, viewpoint)
    except DegenerateViewpoint:
        return None
    for relation, phrase in _SIDE_PHRASES.items():
        if relation in labels:
            return phrase
    return None


def plan_query(graph: SceneGraph, node_id: int) -> QueryPlan | None:
    """An unambiguous query for one node, or None when it cannot be phrased."""
    node = graph.objects[node_id]
    if node.room_id is None:
        return None
    room = graph.rooms[node.room_id]
    floor_id = graph.parent_of(EdgeKind.FR, room.id)
    if floor_id is None:
        return None
    tag = node.primary_tag
    peers = [graph.objects[i] for i in graph.children(EdgeKind.RO, {room.id}) if i != node_id]
    twins = [p for p in peers if p.primary_tag == tag]
    viewpoint = room.mask.centroid()
    side = ""
    if len(twins) > 1:
        return None
    if twins:
        phrase = _side_phrase(node, twins[0], viewpoint)
        if phrase is None or phrase == _side_phrase(twins[0], node, viewpoint):
            return None
        side = f" {phrase}"

    reachable = [p for p in peers if p.primary_tag != tag and p.location_id in (None, node.location_id)]
    anchor = min(reachable, key=lambda p: (math.dist(p.bbox.center, node.bbox.center), p.id), default=None)
    text = f"the {tag}{side} in the {room.tag}"
    if anchor is not None:
        text += f" near the {anchor.primary_tag}"
    return QueryPlan(
        text=text,
        floor_id=floor_id,
        room_id=room.id,
        location_id=node.location_id,
        target_tag=tag,
        object_id=node.id,
        anchor_id=None if anchor is None else anchor.id,
    )


def _benchmark(
    layout: SceneLayout,
    graph: SceneGraph,
    matches: dict[int, tuple[int, float]],
    spec: FixtureSpec,
    rng: np.random.Generator,
    policy: FixturePolicy,
    llm: RecordingChatClient,
) -> list[BenchmarkItem]:
    items: list[BenchmarkItem] = []
    seen: set[str] = set()
    order = rng.permutation(len(layout.objects))
    for index in order:
        if len(items) >= spec.queries:
            break
        obj: GtObject = layout.objects[int(index)]
        node_id, iou = matches.get(obj.id, (0, 0.0))
        if iou <= MATCH_IOU:
            continue
        plan = plan_query(graph, node_id)
        if plan is None or plan.text in seen:
            continue
        if not items:
            plan = replace(plan, wrap_ground=True)
        policy.add(plan)
        outcome = run_pipeline(graph, plan.text, llm)
        if isinstance(outcome, Err):
            logger.warning("Fixture query %r failed: %s", plan.text, outcome.err_value.describe())
            continue
        if outcome.ok_value.object_id != plan.object_id:
            logger.warning("Fixture query %r grounded to %d", plan.text, outcome.ok_value.object_id)
            continue
        seen.add(plan.text)
        items.append(BenchmarkItem(query=plan.text, gt_box=obj.box))
    return items


def generate_fixture(
    spec: FixtureSpec,
    out_dir: str,
    fs: FileSystem = DEFAULT_FS,
    *,
    config: PipelineConfig | None = None,
) -> Result[FixtureReport, StageError]:
    """Write a complete fixture under *out_dir* and report what was produced."""
    out_dir = fs.expanduser(out_dir)
    config = config or default_config()
    report = FixtureReport(out_dir=out_dir)
    stage = "layout"
    try:
        rng = np.random.default_rng(spec.seed)
        layout = build_layout(spec, rng)
        cloud = sample_cloud(layout, spec, rng)
        report.gt_objects = len(layout.objects)
        fs.makedirs(out_dir)
        write_point_cloud(cloud, os.path.join(out_dir, CLOUD), fs)

        stage = "render"
        frames = _write_frames(layout, spec, out_dir, fs, report)
        manifest = {
            "frames": frames,
            "cloud_path": CLOUD,
            "location_masks": [f"gt/locations_floor{f.index}.json" for f in layout.floors],
            "structure_id": STRUCTURE,
            "fixture": spec.to_dict(),
            "config": config.to_dict(),
        }
        manifest_path = os.path.join(out_dir, MANIFEST)
        fs.write_text(manifest_path, _json(manifest))

        stage = "build"
        policy = FixturePolicy()
        llm = RecordingChatClient(PolicyChatClient(policy))
        built = build_scene(load_sequence(manifest_path, fs), config, llm, fs)
        if isinstance(built, Err):
            return built
        graph = built.ok_value
        report.graph_counts = {
            "floors": len(graph.floors),
            "rooms": len(graph.rooms),
            "locations": len(graph.locations),
            "objects": len(graph.objects),
        }

        stage = "ground-truth"
        _write_ground_truth(layout, graph, out_dir, fs)
        matches = match_nodes(layout, graph)
        fs.write_text(os.path.join(out_dir, "gt", "object_labels.json"), _json(_object_labels(layout, graph)))

        stage = "queries"
        items = _benchmark(layout, graph, matches, spec, rng, policy, llm)
        fs.write_text(os.path.join(out_dir, BENCHMARK), benchmark_to_jsonl(items))
        fs.write_text(os.path.join(out_dir, TRANSCRIPT), llm.to_jsonl(timings=False))
        report.queries = len(items)
        report.transcript_entries = len(llm.entries)
    except OvigoError as exc:
        return Err(StageError.from_exception(stage, exc))
    logger.info("Fixture written to %s: %d frames, %d queries", out_dir, report.frames, report.queries)
    return Ok(report)
