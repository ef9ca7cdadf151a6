from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from ovigo.models.geometry import Box3D


@dataclass(slots=True, frozen=True)
class MatchReport:
    tp: int
    fp: int
    fn: int
    delta: float

    @property
    def precision(self) -> float:
        total = self.tp + self.fp
        return self.tp / total if total else 0.0

    @property
    def recall(self) -> float:
        total = self.tp + self.fn
        return self.tp / total if total else 0.0

    @property
    def f1(self) -> float:
        # Nothing predicted and nothing expected counts as a perfect match.
        if self.tp + self.fp + self.fn == 0:
            return 1.0
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r > 0 else 0.0

    def to_dict(self) -> dict[str, Any]:
        return {
            "delta": self.delta,
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
        }


@dataclass(slots=True, frozen=True)
class BenchmarkItem:
    query: str
    gt_box: Box3D


@dataclass(slots=True, frozen=True)
class QueryOutcome:
    query: str
    object_id: int | None
    pred_box: Box3D | None
    iou: float
    error: str | None = None

    def to_dict(self) -> dict[str, Any]:
        box = self.pred_box
        return {
            "query": self.query,
            "object_id": self.object_id,
            "pred_box": None if box is None else {"min": list(box.min), "max": list(box.max)},
            "iou": self.iou,
            "error": self.error,
        }


@dataclass(slots=True)
class BenchmarkReport:
    outcomes: list[QueryOutcome]
    accuracy: dict[float, float]
    config: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "config": self.config,
            "accuracy": {f"{t:g}": acc for t, acc in sorted(self.accuracy.items())},
            "queries": [o.to_dict() for o in self.outcomes],
        }


@dataclass(slots=True, frozen=True)
class TopkReport:
    auc: float
    curve: tuple[float, ...]

    def at(self, k: int) -> float:
        """top_k accuracy in percent; k beyond the label set saturates."""
        idx = min(k, len(self.curve)) - 1
        return 100.0 * self.curve[idx]
