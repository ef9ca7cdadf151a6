from __future__ import annotations

import numpy as np

from ovigo.models.errors import FrameMismatch, UndefinedIoU
from ovigo.models.geometry import BinaryMask, Box3D


def mask_iou(a: BinaryMask, b: BinaryMask) -> float:
    if a.values.shape != b.values.shape:
        raise FrameMismatch(f"Mask shapes differ: {a.values.shape} vs {b.values.shape}")
    union = int(np.count_nonzero(a.values | b.values))
    if union == 0:
        raise UndefinedIoU("IoU of two empty masks is undefined")
    return int(np.count_nonzero(a.values & b.values)) / union


def box3d_iou(a: Box3D, b: Box3D) -> float:
    """Volume IoU of axis-aligned boxes."""
    inter = 1.0
    for lo_a, hi_a, lo_b, hi_b in zip(a.min, a.max, b.min, b.max, strict=True):
        inter *= max(0.0, min(hi_a, hi_b) - max(lo_a, lo_b))
    union = a.volume + b.volume - inter
    if union <= 0:
        raise UndefinedIoU("IoU of two zero-volume boxes is undefined")
    return inter / union


def box3d_iou_or_zero(a: Box3D, b: Box3D) -> float:
    try:
        return box3d_iou(a, b)
    except UndefinedIoU:
        return 0.0
