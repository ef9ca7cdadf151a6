from __future__ import annotations

from collections.abc import Iterable

from ovigo.models.enums import NodeKind
from ovigo.models.reasoning import EnrichedGroup
from ovigo.models.scene import ObjectNode, SceneGraph
from ovigo.reasoning.edges import semantic_sentence


def node_tag(graph: SceneGraph, kind: NodeKind, node_id: int) -> str:
    node = graph.layer(kind)[node_id]
    return node.primary_tag if isinstance(node, ObjectNode) else node.tag


def textualize_layer(graph: SceneGraph, kind: NodeKind, ids: Iterable[int] | None = None) -> str:
    """``<id>: <tag>`` per entity, sorted by ID; objects show their primary tag."""
    table = graph.layer(kind)
    chosen = sorted(table) if ids is None else sorted(i for i in set(ids) if i in table)
    return "\n".join(f"{i}: {node_tag(graph, kind, i)}" for i in chosen)


def object_line(node: ObjectNode) -> str:
    x, y, z = node.bbox.center
    return f"{node.id}: {node.primary_tag} [{x:.1f}, {y:.1f}, {z:.1f}]"


def textualize_objects(nodes: Iterable[ObjectNode]) -> str:
    return "\n".join(object_line(n) for n in sorted(nodes, key=lambda n: n.id))


def textualize_group(group: EnrichedGroup) -> str:
    by_id = {n.id: n for n in group.nodes}
    lines = [f"Group in room {group.room_id}", "Nodes:", textualize_objects(group.nodes), "Edges:"]
    sentences: list[tuple[int, int, int, str]] = [
        (e.target_id, e.anchor_id, 0, semantic_sentence(e, by_id[e.target_id], by_id[e.anchor_id]))
        for e in group.semantic_edges
    ]
    sentences.extend((e.target_id, e.anchor_id, 1, e.text) for e in group.metric_edges)
    if sentences:
        lines.extend(s[3] for s in sorted(sentences))
    else:
        lines.append("(none)")
    return "\n".join(lines)
