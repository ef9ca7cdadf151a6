from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence

import numpy as np

from ovigo.geometry.iou import box3d_iou_or_zero, mask_iou
from ovigo.models.enums import MatchOrder
from ovigo.models.errors import EmptyBenchmark, LabelSetError, UndefinedIoU
from ovigo.models.evaluation import MatchReport, TopkReport
from ovigo.models.geometry import BinaryMask, Box3D
from ovigo.services.similarity import normalize_label, similarity_matrix

ACC_THRESHOLDS: tuple[float, ...] = (0.1, 0.25, 0.5, 0.75)
F1_DELTAS: tuple[float, ...] = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
TOPK_GRID: tuple[int, ...] = (5, 10, 25, 100, 250, 500)


def _iou_matrix(pred: Sequence[BinaryMask], gt: Sequence[BinaryMask]) -> np.ndarray:
    table = np.zeros((len(pred), len(gt)), dtype=np.float64)
    for i, p in enumerate(pred):
        for j, g in enumerate(gt):
            try:
                table[i, j] = mask_iou(p, g)
            except UndefinedIoU:
                table[i, j] = 0.0
    return table


def match_masks(
    pred: Sequence[BinaryMask],
    gt: Sequence[BinaryMask],
    delta: float,
    *,
    order: MatchOrder = MatchOrder.BEST_IOU,
) -> MatchReport:
    """Greedy one-to-one matching; a prediction is a TP when its best remaining IoU exceeds *delta*."""
    if not 0.0 < delta < 1.0:
        msg = f"delta must lie in (0, 1), got {delta}"
        raise ValueError(msg)
    table = _iou_matrix(pred, gt)
    indices = list(range(len(pred)))
    if order is MatchOrder.BEST_IOU and len(gt):
        best = table.max(axis=1)
        indices.sort(key=lambda i: (-best[i], i))

    remaining = np.ones(len(gt), dtype=bool)
    tp = fp = 0
    for i in indices:
        if not remaining.any():
            fp += 1
            continue
        scores = np.where(remaining, table[i], -1.0)
        j = int(np.argmax(scores))
        if scores[j] > delta:
            tp += 1
            remaining[j] = False
        else:
            fp += 1
    return MatchReport(tp=tp, fp=fp, fn=int(remaining.sum()), delta=delta)


def f1_sweep(
    pred: Sequence[BinaryMask],
    gt: Sequence[BinaryMask],
    deltas: Iterable[float] = F1_DELTAS,
    *,
    order: MatchOrder = MatchOrder.BEST_IOU,
) -> list[MatchReport]:
    return [match_masks(pred, gt, d, order=order) for d in deltas]


def acc_at_iou(
    pred_boxes: Sequence[Box3D | None],
    gt_boxes: Sequence[Box3D],
    thresholds: Iterable[float] = ACC_THRESHOLDS,
) -> dict[float, float]:
    if not gt_boxes:
        raise EmptyBenchmark("No benchmark queries to score")
    if len(pred_boxes) != len(gt_boxes):
        msg = f"{len(pred_boxes)} predictions for {len(gt_boxes)} ground-truth boxes"
        raise ValueError(msg)
    ious = np.array([0.0 if p is None else box3d_iou_or_zero(p, g) for p, g in zip(pred_boxes, gt_boxes, strict=True)])
    return {float(t): float((ious > t).mean()) for t in thresholds}


def rank_labels(label_set: Sequence[str], tags: Mapping[str, int] | Iterable[str]) -> list[str]:
    """Order every label by its best trigram similarity to any of the object's tags."""
    labels = sorted({normalize_label(label) for label in label_set})
    tag_list = sorted({normalize_label(t) for t in tags})
    if not labels:
        return []
    if not tag_list:
        return labels
    scores = similarity_matrix(labels, tag_list).max(axis=1)
    return [label for _, label in sorted(zip(scores, labels, strict=True), key=lambda sl: (-sl[0], sl[1]))]


def topk_curve(
    rankings: Sequence[Sequence[str]], gt_labels: Sequence[str], label_set: Sequence[str]
) -> tuple[float, ...]:
    """top_k accuracy for k = 1..K, K being the label set size."""
    labels = {normalize_label(label) for label in label_set}
    if not rankings:
        raise EmptyBenchmark("No objects to rank")
    if len(rankings) != len(gt_labels):
        msg = f"{len(rankings)} rankings for {len(gt_labels)} labels"
        raise ValueError(msg)
    size = len(labels)
    hits = np.zeros(size, dtype=np.float64)
    for ranking, gt in zip(rankings, gt_labels, strict=True):
        label = normalize_label(gt)
        if label not in labels:
            raise LabelSetError(f"Ground-truth label {gt!r} is not in the label set", label=gt)
        ranked = [normalize_label(r) for r in ranking]
        if label in ranked:
            rank = ranked.index(label)
            if rank < size:
                hits[rank:] += 1
    return tuple(float(h) for h in hits / len(rankings))


def auc_topk(rankings: Sequence[Sequence[str]], gt_labels: Sequence[str], label_set: Sequence[str]) -> TopkReport:
    curve = topk_curve(rankings, gt_labels, label_set)
    return TopkReport(auc=100.0 * float(np.mean(curve)), curve=curve)
