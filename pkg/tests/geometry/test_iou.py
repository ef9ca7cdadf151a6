from __future__ import annotations

import numpy as np
import pytest

from ovigo.geometry.iou import box3d_iou, box3d_iou_or_zero, mask_iou
from ovigo.models.errors import FrameMismatch, UndefinedIoU
from ovigo.models.geometry import BevFrame, BinaryMask, Box3D
from tests.factories import FRAME, rect_mask


class TestMaskIou:
    def test_half_overlap(self) -> None:
        a = rect_mask(0.0, 0.0, 2.0, 1.0)
        b = rect_mask(1.0, 0.0, 3.0, 1.0)
        assert mask_iou(a, b) == pytest.approx(1 / 3)

    def test_identical(self) -> None:
        a = rect_mask(0.0, 0.0, 2.0, 1.0)
        assert mask_iou(a, a) == 1.0

    def test_both_empty(self) -> None:
        empty = BinaryMask(np.zeros(FRAME.shape, dtype=bool), FRAME)
        with pytest.raises(UndefinedIoU):
            mask_iou(empty, empty)

    def test_shape_mismatch(self) -> None:
        other = BevFrame(h=2, w=2, meters_per_pixel=0.1, origin_xy=(0.0, 0.0))
        with pytest.raises(FrameMismatch):
            mask_iou(rect_mask(0.0, 0.0, 1.0, 1.0), BinaryMask(np.ones((2, 2), dtype=bool), other))


class TestBoxIou:
    def test_partial_overlap(self) -> None:
        a = Box3D((0.0, 0.0, 0.0), (2.0, 1.0, 1.0))
        b = Box3D((1.0, 0.0, 0.0), (3.0, 1.0, 1.0))
        assert box3d_iou(a, b) == pytest.approx(1 / 3)

    def test_symmetric(self) -> None:
        a = Box3D((0.0, 0.0, 0.0), (1.0, 2.0, 3.0))
        b = Box3D((0.5, 0.5, 0.5), (2.0, 2.0, 2.0))
        assert box3d_iou(a, b) == pytest.approx(box3d_iou(b, a))

    def test_disjoint(self) -> None:
        a = Box3D((0.0, 0.0, 0.0), (1.0, 1.0, 1.0))
        assert box3d_iou(a, a.translated((5.0, 0.0, 0.0))) == 0.0

    def test_degenerate_boxes(self) -> None:
        flat = Box3D((0.0, 0.0, 0.0), (1.0, 1.0, 0.0))
        with pytest.raises(UndefinedIoU):
            box3d_iou(flat, flat)
        assert box3d_iou_or_zero(flat, flat) == 0.0
