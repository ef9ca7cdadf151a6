"""On-demand spatial edges between selected target and anchor objects."""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass

from ovigo.models.enums import Relation
from ovigo.models.errors import DegenerateViewpoint, EmptySelection
from ovigo.models.geometry import Box3D
from ovigo.models.reasoning import EnrichedGroup, MetricEdge, SemanticEdge
from ovigo.models.scene import ObjectNode

logger = logging.getLogger(__name__)

VERTICAL_MARGIN = 0.5
SIDE_LIMIT_DEG = 45.0
BACK_LIMIT_DEG = 135.0

RELATION_PHRASES: dict[Relation, str] = {
    Relation.LEFT: "left of",
    Relation.RIGHT: "right of",
    Relation.FRONT: "in front of",
    Relation.BACK: "behind",
    Relation.ABOVE: "above",
    Relation.BELOW: "below",
}


@dataclass(slots=True)
class EdgeStats:
    """Counts target/anchor pairs actually evaluated."""

    pairs: int = 0


def _vertical(target: Box3D, anchor: Box3D, margin: float) -> Relation | None:
    tx, ty, tz = target.center
    inside_xy = (
        anchor.min[0] - margin <= tx <= anchor.max[0] + margin
        and anchor.min[1] - margin <= ty <= anchor.max[1] + margin
    )
    if not inside_xy:
        return None
    if tz > anchor.max[2]:
        return Relation.ABOVE
    if tz < anchor.min[2]:
        return Relation.BELOW
    return None


def horizontal_angle(target: Box3D, anchor: Box3D, viewpoint: tuple[float, float]) -> float | None:
    """Signed angle in degrees of (target - anchor) against the viewpoint->anchor direction.

    0 means the target lies beyond the anchor, 180 between viewer and anchor;
    positive angles are counter-clockwise (left).
    """
    tx, ty, _ = target.center
    ax, ay, _ = anchor.center
    ux, uy = ax - viewpoint[0], ay - viewpoint[1]
    if math.hypot(ux, uy) < 1e-9:
        raise DegenerateViewpoint("Viewpoint coincides with the anchor center", viewpoint=viewpoint)
    dx, dy = tx - ax, ty - ay
    if math.hypot(dx, dy) < 1e-12:
        return None
    return math.degrees(math.atan2(ux * dy - uy * dx, ux * dx + uy * dy))


def semantic_relation(
    target: Box3D, anchor: Box3D, viewpoint: tuple[float, float], *, margin: float = VERTICAL_MARGIN
) -> frozenset[Relation]:
    labels: set[Relation] = set()
    vertical = _vertical(target, anchor, margin)
    if vertical is not None:
        labels.add(vertical)
    theta = horizontal_angle(target, anchor, viewpoint)
    if theta is not None:
        if abs(theta) < SIDE_LIMIT_DEG:
            labels.add(Relation.FRONT)
        elif abs(theta) > BACK_LIMIT_DEG:
            labels.add(Relation.BACK)
        elif SIDE_LIMIT_DEG < theta < BACK_LIMIT_DEG:
            labels.add(Relation.LEFT)
        elif -BACK_LIMIT_DEG < theta < -SIDE_LIMIT_DEG:
            labels.add(Relation.RIGHT)
    return frozenset(labels)


def format_meters(distance: float) -> str:
    return f"{distance:.1f}".rstrip("0").rstrip(".")


def _ref(node: ObjectNode) -> str:
    return f"object {node.primary_tag} with id {node.id}"


def metric_edge(target: ObjectNode, anchor: ObjectNode) -> MetricEdge:
    distance = round(math.dist(target.bbox.center, anchor.bbox.center), 1)
    text = f"{_ref(target)} is in {format_meters(distance)} meters of {_ref(anchor)}"
    return MetricEdge(target_id=target.id, anchor_id=anchor.id, distance=distance, text=text)


def semantic_sentence(edge: SemanticEdge, target: ObjectNode, anchor: ObjectNode) -> str:
    phrase = " and ".join(RELATION_PHRASES[Relation(label)] for label in edge.sorted_labels())
    return f"{_ref(target)} is {phrase} {_ref(anchor)}"


def enrich_subgraph(
    room_id: int,
    targets: Sequence[ObjectNode],
    anchors: Sequence[ObjectNode],
    viewpoint: tuple[float, float],
    *,
    margin: float = VERTICAL_MARGIN,
    stats: EdgeStats | None = None,
) -> EnrichedGroup:
    """Edges for target x anchor pairs only, in (target_id, anchor_id) order."""
    if not targets:
        raise EmptySelection(f"Room {room_id} group has no targets", room_id=room_id)
    overlap = {t.id for t in targets} & {a.id for a in anchors}
    if overlap:
        msg = f"objects {sorted(overlap)} are both targets and anchors"
        raise ValueError(msg)
    ordered_targets = sorted(targets, key=lambda n: n.id)
    ordered_anchors = sorted(anchors, key=lambda n: n.id)
    group = EnrichedGroup(room_id=room_id, targets=ordered_targets, anchors=ordered_anchors)
    for target in ordered_targets:
        for anchor in ordered_anchors:
            if stats is not None:
                stats.pairs += 1
            group.metric_edges.append(metric_edge(target, anchor))
            try:
                labels = semantic_relation(target.bbox, anchor.bbox, viewpoint, margin=margin)
            except DegenerateViewpoint:
                logger.warning("Viewpoint sits on anchor %d; no semantic edge to target %d", anchor.id, target.id)
                continue
            if labels:
                group.semantic_edges.append(SemanticEdge(target_id=target.id, anchor_id=anchor.id, labels=labels))
    return group
