from __future__ import annotations

from ovigo.graph.textualize import node_tag, object_line, textualize_group, textualize_layer
from ovigo.models.enums import NodeKind, Relation
from ovigo.models.reasoning import EnrichedGroup, MetricEdge, SemanticEdge
from tests.factories import two_room_graph


class TestTextualizeLayer:
    def test_rooms(self) -> None:
        assert textualize_layer(two_room_graph(), NodeKind.ROOM) == "1: living room\n2: kitchen"

    def test_subset_sorted_and_unknown_ids_dropped(self) -> None:
        text = textualize_layer(two_room_graph(), NodeKind.OBJECT, [7, 5, 99])
        assert text == "5: stove\n7: vase"

    def test_floors(self) -> None:
        assert textualize_layer(two_room_graph(), NodeKind.FLOOR) == "0: floor 0"

    def test_node_tag_uses_primary_tag(self) -> None:
        assert node_tag(two_room_graph(), NodeKind.OBJECT, 3) == "coffee table"


class TestObjectLines:
    def test_box_center_one_decimal(self) -> None:
        graph = two_room_graph()
        assert object_line(graph.objects[6]) == "6: vase [6.1, 2.1, 0.2]"

    def test_group_lists_nodes_then_edges(self) -> None:
        graph = two_room_graph()
        group = EnrichedGroup(
            room_id=2,
            targets=[graph.objects[7], graph.objects[6]],
            anchors=[graph.objects[5]],
            metric_edges=[MetricEdge(6, 5, 1.8, "object vase with id 6 is in 1.8 meters of object stove with id 5")],
            semantic_edges=[SemanticEdge(6, 5, frozenset({Relation.RIGHT}))],
        )
        lines = textualize_group(group).splitlines()
        assert lines[:2] == ["Group in room 2", "Nodes:"]
        assert lines[2].startswith("5: stove")
        assert lines[4].startswith("7: vase")
        assert lines[5] == "Edges:"
        assert lines[6].startswith("object vase with id 6 is")
        assert "right" in lines[6]
        assert lines[7].endswith("meters of object stove with id 5")

    def test_group_without_edges(self) -> None:
        graph = two_room_graph()
        group = EnrichedGroup(room_id=1, targets=[graph.objects[4]], anchors=[])
        assert textualize_group(group).splitlines()[-1] == "(none)"
