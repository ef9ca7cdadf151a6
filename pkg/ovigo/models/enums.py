from __future__ import annotations

from enum import Enum


class NodeKind(str, Enum):
    BUILDING = "building"
    FLOOR = "floor"
    ROOM = "room"
    LOCATION = "location"
    OBJECT = "object"

    @property
    def plural(self) -> str:
        return _PLURALS[self]


_PLURALS: dict[NodeKind, str] = {
    NodeKind.BUILDING: "buildings",
    NodeKind.FLOOR: "floors",
    NodeKind.ROOM: "rooms",
    NodeKind.LOCATION: "locations",
    NodeKind.OBJECT: "objects",
}


class EdgeKind(str, Enum):
    """Inter-layer containment edges, named by parent and child layer initials."""

    BF = "BF"
    FR = "FR"
    RL = "RL"
    RO = "RO"
    LO = "LO"

    @property
    def parent(self) -> NodeKind:
        return _EDGE_ENDS[self][0]

    @property
    def child(self) -> NodeKind:
        return _EDGE_ENDS[self][1]


_EDGE_ENDS: dict[EdgeKind, tuple[NodeKind, NodeKind]] = {
    EdgeKind.BF: (NodeKind.BUILDING, NodeKind.FLOOR),
    EdgeKind.FR: (NodeKind.FLOOR, NodeKind.ROOM),
    EdgeKind.RL: (NodeKind.ROOM, NodeKind.LOCATION),
    EdgeKind.RO: (NodeKind.ROOM, NodeKind.OBJECT),
    EdgeKind.LO: (NodeKind.LOCATION, NodeKind.OBJECT),
}


class Relation(str, Enum):
    LEFT = "left"
    RIGHT = "right"
    BACK = "back"
    FRONT = "front"
    ABOVE = "above"
    BELOW = "below"


class LocationSource(str, Enum):
    GEOMETRIC = "geometric"
    MASKS = "masks"


class MatchOrder(str, Enum):
    """Processing order of predictions in greedy mask matching."""

    BEST_IOU = "best-iou"
    INPUT = "input"


class ExportKind(str, Enum):
    BEV_PNG = "bev-png"
    GRAPH_DOT = "graph-dot"
    LOC_INPUT = "loc-input"


class ChatRole(str, Enum):
    SYSTEM = "system"
    USER = "user"
    ASSISTANT = "assistant"
