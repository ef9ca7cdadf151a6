from __future__ import annotations

import json
import logging
from collections.abc import Iterable, Sequence
from typing import Any

from result import Err

from ovigo.evaluation.metrics import ACC_THRESHOLDS, acc_at_iou
from ovigo.geometry.iou import box3d_iou_or_zero
from ovigo.models.errors import EmptyBenchmark, MissingFile, ParseError
from ovigo.models.evaluation import BenchmarkItem, BenchmarkReport, QueryOutcome
from ovigo.models.geometry import Box3D
from ovigo.models.scene import SceneGraph
from ovigo.reasoning.client import ChatClient
from ovigo.reasoning.edges import VERTICAL_MARGIN
from ovigo.reasoning.pipeline import run_pipeline
from ovigo.services.fs import DEFAULT_FS, FileSystem

logger = logging.getLogger(__name__)


def _box_from(raw: Any, where: str) -> Box3D:
    try:
        lo, hi = raw["min"], raw["max"]
        return Box3D((float(lo[0]), float(lo[1]), float(lo[2])), (float(hi[0]), float(hi[1]), float(hi[2])))
    except (KeyError, TypeError, IndexError, ValueError) as exc:
        raise ParseError(f"{where}: gt_box must be {{min: [x, y, z], max: [x, y, z]}} ({exc})", path=where) from exc


def parse_benchmark(text: str, source: str = "<benchmark>") -> list[BenchmarkItem]:
    items: list[BenchmarkItem] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        where = f"{source}:{lineno}"
        try:
            row = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{where}: malformed JSON ({exc.msg})", path=source, line=lineno) from exc
        query = row.get("query") if isinstance(row, dict) else None
        if not isinstance(query, str) or not query.strip():
            raise ParseError(f"{where}: query must be a non-empty string", path=source, line=lineno)
        items.append(BenchmarkItem(query=query, gt_box=_box_from(row.get("gt_box"), where)))
    return items


def read_benchmark(path: str, fs: FileSystem = DEFAULT_FS) -> list[BenchmarkItem]:
    path = fs.expanduser(path)
    if not fs.exists(path):
        raise MissingFile(f"Benchmark file {path} does not exist", path=path)
    return parse_benchmark(fs.read_text(path), path)


def benchmark_to_jsonl(items: Iterable[BenchmarkItem]) -> str:
    rows = (
        {"query": it.query, "gt_box": {"min": list(it.gt_box.min), "max": list(it.gt_box.max)}} for it in items
    )
    return "".join(json.dumps(r, sort_keys=True) + "\n" for r in rows)


def run_benchmark(
    graph: SceneGraph,
    items: Sequence[BenchmarkItem],
    llm: ChatClient,
    *,
    thresholds: Iterable[float] = ACC_THRESHOLDS,
    margin: float = VERTICAL_MARGIN,
    config: dict[str, Any] | None = None,
) -> BenchmarkReport:
    """Ground every query; a failing query is scored as a miss and the run continues."""
    if not items:
        raise EmptyBenchmark("Benchmark has no queries")
    outcomes: list[QueryOutcome] = []
    for item in items:
        outcome = run_pipeline(graph, item.query, llm, margin=margin)
        if isinstance(outcome, Err):
            err = outcome.err_value
            logger.warning("Query %r failed: %s", item.query, err.describe())
            outcomes.append(QueryOutcome(item.query, None, None, 0.0, error=err.describe()))
            continue
        result = outcome.ok_value
        iou = box3d_iou_or_zero(result.bbox, item.gt_box)
        outcomes.append(QueryOutcome(item.query, result.object_id, result.bbox, iou))
    accuracy = acc_at_iou([o.pred_box for o in outcomes], [it.gt_box for it in items], thresholds)
    return BenchmarkReport(outcomes=outcomes, accuracy=accuracy, config=dict(config or {}))
