from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from ovigo.models.enums import ChatRole, Relation
from ovigo.models.geometry import Box3D
from ovigo.models.scene import ObjectNode


@dataclass(slots=True, frozen=True)
class ChatMessage:
    role: ChatRole
    content: str

    def to_dict(self) -> dict[str, str]:
        return {"role": self.role.value, "content": self.content}

    @classmethod
    def system(cls, content: str) -> ChatMessage:
        return cls(ChatRole.SYSTEM, content)

    @classmethod
    def user(cls, content: str) -> ChatMessage:
        return cls(ChatRole.USER, content)


@dataclass(slots=True, frozen=True)
class TranscriptEntry:
    stage: str
    request_digest: str
    messages: tuple[ChatMessage, ...]
    response_text: str
    elapsed_s: float

    def to_dict(self, *, timings: bool = True) -> dict[str, Any]:
        payload: dict[str, Any] = {
            "stage": self.stage,
            "request_digest": self.request_digest,
            "messages": [m.to_dict() for m in self.messages],
            "response_text": self.response_text,
        }
        if timings:
            payload["elapsed_s"] = round(self.elapsed_s, 6)
        return payload


@dataclass(slots=True, frozen=True)
class GroundingQuery:
    text: str

    def __post_init__(self) -> None:
        if not self.text.strip():
            msg = "grounding query must be non-empty"
            raise ValueError(msg)


@dataclass(slots=True, frozen=True)
class GroundingResult:
    object_id: int
    bbox: Box3D
    reasoning: str
    explanation: str
    raw_response: str

    def to_dict(self) -> dict[str, Any]:
        return {
            "object_id": self.object_id,
            "bbox": {"min": list(self.bbox.min), "max": list(self.bbox.max)},
            "reasoning": self.reasoning,
            "explanation": self.explanation,
            "raw_response": self.raw_response,
        }


@dataclass(slots=True, frozen=True)
class SemanticEdge:
    target_id: int
    anchor_id: int
    labels: frozenset[Relation]

    def sorted_labels(self) -> list[str]:
        return sorted(r.value for r in self.labels)


@dataclass(slots=True, frozen=True)
class MetricEdge:
    target_id: int
    anchor_id: int
    distance: float
    text: str


@dataclass(slots=True)
class EnrichedGroup:
    """Object-layer subgraph handed to the grounding prompt."""

    room_id: int
    targets: list[ObjectNode]
    anchors: list[ObjectNode]
    metric_edges: list[MetricEdge] = field(default_factory=list)
    semantic_edges: list[SemanticEdge] = field(default_factory=list)

    @property
    def nodes(self) -> list[ObjectNode]:
        return sorted([*self.targets, *self.anchors], key=lambda n: n.id)

    @property
    def node_ids(self) -> set[int]:
        return {n.id for n in self.targets} | {n.id for n in self.anchors}
