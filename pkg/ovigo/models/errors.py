from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any


class ErrorCode(str, Enum):
    EMPTY_INPUT = "empty_input"
    NO_PEAKS = "no_peaks"
    NO_WALLS = "no_walls"
    DEGENERATE_FIELD = "degenerate_field"
    NO_SEEDS = "no_seeds"
    DEGENERATE_CLUSTER = "degenerate_cluster"
    DEGENERATE_POLYGON = "degenerate_polygon"
    UNDEFINED_IOU = "undefined_iou"
    NO_FLOORS = "no_floors"
    UNPAIRED_BOUNDARY = "unpaired_boundary"
    EMPTY_BAND = "empty_band"
    MISSING_PARTITION = "missing_partition"
    FRAME_MISMATCH = "frame_mismatch"
    PARSE_ERROR = "parse_error"
    EMPTY_FRAGMENT = "empty_fragment"
    EMPTY_HIERARCHY = "empty_hierarchy"
    DEGENERATE_VIEWPOINT = "degenerate_viewpoint"
    EMPTY_SELECTION = "empty_selection"
    SELECTION_ERROR = "selection_error"
    GROUNDING_ERROR = "grounding_error"
    REPAIR_FAILED = "repair_failed"
    UNEXPECTED_REQUEST = "unexpected_request"
    CHAT_TRANSPORT = "chat_transport"
    EMPTY_BENCHMARK = "empty_benchmark"
    LABEL_SET_ERROR = "label_set_error"
    USAGE_ERROR = "usage_error"
    CONFIG_ERROR = "config_error"
    FIXTURE_SPEC = "fixture_spec"
    MISSING_FILE = "missing_file"
    INTERNAL = "internal"

    @property
    def exit_code(self) -> int:
        return 2 if self in _INPUT_ERRORS else 1


_INPUT_ERRORS = frozenset(
    {
        ErrorCode.PARSE_ERROR,
        ErrorCode.FRAME_MISMATCH,
        ErrorCode.USAGE_ERROR,
        ErrorCode.CONFIG_ERROR,
        ErrorCode.FIXTURE_SPEC,
        ErrorCode.MISSING_FILE,
    }
)


class OvigoError(Exception):
    code: ErrorCode = ErrorCode.INTERNAL

    def __init__(self, message: str, **context: Any) -> None:
        super().__init__(message)
        self.message = message
        self.context: dict[str, Any] = context


class EmptyInput(OvigoError):
    code = ErrorCode.EMPTY_INPUT


class NoPeaks(OvigoError):
    code = ErrorCode.NO_PEAKS


class NoWalls(OvigoError):
    code = ErrorCode.NO_WALLS


class DegenerateField(OvigoError):
    code = ErrorCode.DEGENERATE_FIELD


class NoSeeds(OvigoError):
    code = ErrorCode.NO_SEEDS


class DegenerateCluster(OvigoError):
    code = ErrorCode.DEGENERATE_CLUSTER


class DegeneratePolygon(OvigoError):
    code = ErrorCode.DEGENERATE_POLYGON


class UndefinedIoU(OvigoError):
    code = ErrorCode.UNDEFINED_IOU


class NoFloors(OvigoError):
    code = ErrorCode.NO_FLOORS


class UnpairedBoundary(OvigoError):
    code = ErrorCode.UNPAIRED_BOUNDARY


class EmptyBand(OvigoError):
    code = ErrorCode.EMPTY_BAND


class MissingPartition(OvigoError):
    code = ErrorCode.MISSING_PARTITION


class FrameMismatch(OvigoError):
    code = ErrorCode.FRAME_MISMATCH


class ParseError(OvigoError):
    code = ErrorCode.PARSE_ERROR


class EmptyFragment(OvigoError):
    code = ErrorCode.EMPTY_FRAGMENT


class EmptyHierarchy(OvigoError):
    code = ErrorCode.EMPTY_HIERARCHY


class DegenerateViewpoint(OvigoError):
    code = ErrorCode.DEGENERATE_VIEWPOINT


class EmptySelection(OvigoError):
    code = ErrorCode.EMPTY_SELECTION


class SelectionError(OvigoError):
    code = ErrorCode.SELECTION_ERROR


class GroundingError(OvigoError):
    code = ErrorCode.GROUNDING_ERROR


class RepairFailed(OvigoError):
    code = ErrorCode.REPAIR_FAILED

    def __init__(self, message: str, raw: str, repaired: str) -> None:
        super().__init__(message, raw=raw, repaired=repaired)
        self.raw = raw
        self.repaired = repaired


class ChatError(OvigoError):
    """Base for failures of a chat-completion exchange."""

    code = ErrorCode.CHAT_TRANSPORT


class UnexpectedRequest(ChatError):
    code = ErrorCode.UNEXPECTED_REQUEST


class ChatTransportError(ChatError):
    code = ErrorCode.CHAT_TRANSPORT


class EmptyBenchmark(OvigoError):
    code = ErrorCode.EMPTY_BENCHMARK


class LabelSetError(OvigoError):
    code = ErrorCode.LABEL_SET_ERROR


class UsageError(OvigoError):
    code = ErrorCode.USAGE_ERROR


class FixtureSpecError(OvigoError):
    code = ErrorCode.FIXTURE_SPEC


class MissingFile(OvigoError):
    code = ErrorCode.MISSING_FILE


@dataclass(slots=True, frozen=True)
class StageError:
    code: ErrorCode
    stage: str
    message: str
    context: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_exception(cls, stage: str, exc: Exception) -> StageError:
        if isinstance(exc, OvigoError):
            return cls(code=exc.code, stage=stage, message=exc.message, context=dict(exc.context))
        return cls(code=ErrorCode.INTERNAL, stage=stage, message=f"Unhandled failure: {exc}")

    def describe(self) -> str:
        extra = ", ".join(f"{k}={v}" for k, v in sorted(self.context.items()) if k not in ("raw", "repaired"))
        suffix = f" ({extra})" if extra else ""
        return f"[{self.stage}] {self.code.value}: {self.message}{suffix}"
