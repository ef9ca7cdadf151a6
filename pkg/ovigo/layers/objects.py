from __future__ import annotations

import logging
from collections import Counter
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np

from ovigo.geometry.iou import box3d_iou_or_zero
from ovigo.models.errors import EmptyFragment
from ovigo.models.geometry import Box3D, FloatArray, PointCloud
from ovigo.models.scene import Detection, FrameDetections, Intrinsics, ObjectFragment, ObjectNode
from ovigo.services.similarity import tag_similarity

logger = logging.getLogger(__name__)

type TagSimilarity = Callable[[str, str], float]


def depth_to_camera(us: FloatArray, vs: FloatArray, depth_m: FloatArray, intrinsics: Intrinsics) -> FloatArray:
    """Pixel coordinates plus metric depth to camera-frame points (x right, y down, z forward)."""
    x = (us - intrinsics.cx) * depth_m / intrinsics.fx
    y = (vs - intrinsics.cy) * depth_m / intrinsics.fy
    return np.column_stack([x, y, depth_m])


def camera_to_world(points: FloatArray, pose: FloatArray) -> FloatArray:
    return points @ pose[:3, :3].T + pose[:3, 3]


def backproject_pixels(
    depth: np.ndarray, keep: np.ndarray, intrinsics: Intrinsics, pose: FloatArray, depth_scale: float
) -> FloatArray:
    valid = keep & (depth > 0)
    vs, us = np.nonzero(valid)
    depth_m = depth[vs, us].astype(np.float64) * depth_scale
    cam = depth_to_camera(us.astype(np.float64), vs.astype(np.float64), depth_m, intrinsics)
    return camera_to_world(cam, pose)


def backproject_detection(
    det: Detection,
    depth: np.ndarray,
    intrinsics: Intrinsics,
    pose: FloatArray,
    depth_scale: float,
    *,
    frame_id: int = 0,
) -> ObjectFragment:
    """Lift a detection mask into world space; zero-depth pixels are skipped."""
    points = backproject_pixels(depth, det.mask, intrinsics, pose, depth_scale)
    if points.shape[0] == 0:
        raise EmptyFragment(f"Detection '{det.tag}' in frame {frame_id} has no valid depth", frame_id=frame_id)
    return ObjectFragment(frame_id=frame_id, tag=det.tag, cloud=PointCloud(points), bbox=Box3D.from_points(points))


def frame_fragments(
    frame: FrameDetections, depth: np.ndarray, *, min_score: float = 0.3, min_points: int = 20
) -> list[ObjectFragment]:
    """Fragments of one frame in detection order; weak detections and depth noise are dropped."""
    out: list[ObjectFragment] = []
    for index, det in enumerate(frame.detections):
        if det.score < min_score:
            continue
        try:
            frag = backproject_detection(
                det, depth, frame.intrinsics, frame.pose, frame.depth_scale, frame_id=frame.frame_id
            )
        except EmptyFragment:
            logger.debug("Frame %d detection %d has no valid depth", frame.frame_id, index)
            continue
        if len(frag.cloud) < min_points:
            logger.debug("Frame %d detection %d: %d points, dropped", frame.frame_id, index, len(frag.cloud))
            continue
        out.append(frag)
    return out


@dataclass(slots=True)
class _NodeBuilder:
    id: int
    clouds: list[PointCloud]
    bbox: Box3D
    tags: Counter[str] = field(default_factory=Counter)

    def absorb(self, frag: ObjectFragment) -> None:
        self.clouds.append(frag.cloud)
        self.bbox = self.bbox.union(frag.bbox)
        self.tags[frag.tag] += 1

    def freeze(self) -> ObjectNode:
        return ObjectNode(id=self.id, cloud=PointCloud.concat(self.clouds), bbox=self.bbox, tags=dict(self.tags))


def _tags_agree(frag_tag: str, node: _NodeBuilder, similarity: TagSimilarity | None, similarity_min: float) -> bool:
    if not node.tags or frag_tag in node.tags:
        return True
    if similarity is None:
        return False
    return max(similarity(frag_tag, t) for t in node.tags) >= similarity_min


def aggregate_objects(
    fragments: Sequence[ObjectFragment],
    spatial_iou_min: float = 0.25,
    overlap_min: float = 0.5,
    *,
    tag_similarity_min: float | None = None,
    similarity: TagSimilarity = tag_similarity,
    first_id: int = 1,
) -> list[ObjectNode]:
    """Greedy sequential merge of fragments into object nodes.

    A fragment joins a node when they agree spatially (box IoU or containment of
    its points in the node box) and semantically (same tag). Among several
    candidates the highest IoU wins, then the lower ID. Setting
    *tag_similarity_min* relaxes the tag rule to trigram similarity.
    """
    relaxed = similarity if tag_similarity_min is not None else None
    threshold = tag_similarity_min if tag_similarity_min is not None else 1.0
    nodes: list[_NodeBuilder] = []
    for frag in fragments:
        best: tuple[float, int] | None = None
        for idx, node in enumerate(nodes):
            if not _tags_agree(frag.tag, node, relaxed, threshold):
                continue
            iou = box3d_iou_or_zero(frag.bbox, node.bbox)
            inside = float(node.bbox.contains(frag.cloud.points).mean())
            if iou < spatial_iou_min and inside < overlap_min:
                continue
            if best is None or iou > best[0]:
                best = (iou, idx)
        if best is None:
            node = _NodeBuilder(id=first_id + len(nodes), clouds=[], bbox=frag.bbox)
            node.absorb(frag)
            nodes.append(node)
        else:
            nodes[best[1]].absorb(frag)
    return [n.freeze() for n in nodes]
