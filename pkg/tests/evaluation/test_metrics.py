from __future__ import annotations

import numpy as np
import pytest

from ovigo.evaluation.metrics import acc_at_iou, auc_topk, f1_sweep, match_masks, rank_labels, topk_curve
from ovigo.models.enums import MatchOrder
from ovigo.models.errors import EmptyBenchmark, LabelSetError
from ovigo.models.geometry import BevFrame, BinaryMask, Box3D

STRIP = BevFrame(h=1, w=20, meters_per_pixel=0.1, origin_xy=(0.0, 0.0))


def _cells(*ranges: tuple[int, int]) -> BinaryMask:
    values = np.zeros((1, 20), dtype=bool)
    for lo, hi in ranges:
        values[0, lo:hi] = True
    return BinaryMask(values, STRIP)


GT = [_cells((0, 10)), _cells((10, 20))]
# Overlaps both ground-truth masks: 6/14 with the first, 4/16 with the second.
SPREAD = _cells((0, 6), (10, 14))
TIGHT = _cells((0, 9))


class TestMatchMasks:
    def test_perfect_match(self) -> None:
        report = match_masks(GT, GT, 0.5)
        assert (report.tp, report.fp, report.fn) == (2, 0, 0)
        assert report.f1 == 1.0

    def test_best_iou_order_frees_the_contested_mask(self) -> None:
        report = match_masks([SPREAD, TIGHT], GT, 0.2)
        assert (report.tp, report.fp, report.fn) == (2, 0, 0)

    def test_input_order_is_greedy(self) -> None:
        report = match_masks([SPREAD, TIGHT], GT, 0.2, order=MatchOrder.INPUT)
        assert (report.tp, report.fp, report.fn) == (1, 1, 1)
        assert report.precision == 0.5
        assert report.recall == 0.5

    def test_threshold_is_strict(self) -> None:
        report = match_masks([_cells((0, 5))], [GT[0]], 0.5)
        assert report.tp == 0

    def test_extra_predictions_are_false_positives(self) -> None:
        report = match_masks([TIGHT, TIGHT, _cells((15, 20))], [GT[0]], 0.5)
        assert (report.tp, report.fp, report.fn) == (1, 2, 0)

    def test_nothing_on_either_side(self) -> None:
        report = match_masks([], [], 0.5)
        assert report.f1 == 1.0

    def test_no_predictions(self) -> None:
        report = match_masks([], GT, 0.5)
        assert (report.fn, report.f1) == (2, 0.0)

    @pytest.mark.parametrize("delta", [0.0, 1.0])
    def test_delta_range(self, delta: float) -> None:
        with pytest.raises(ValueError, match="delta"):
            match_masks(GT, GT, delta)

    def test_sweep_is_monotone(self) -> None:
        reports = f1_sweep([SPREAD, TIGHT], GT)
        assert [r.delta for r in reports] == pytest.approx([0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9])
        tps = [r.tp for r in reports]
        assert tps == sorted(tps, reverse=True)

    def test_report_dict(self) -> None:
        data = match_masks(GT, GT, 0.5).to_dict()
        assert data["f1"] == 1.0
        assert data["delta"] == 0.5


class TestAccAtIou:
    def test_fraction_above_each_threshold(self) -> None:
        gt = Box3D((0.0, 0.0, 0.0), (2.0, 1.0, 1.0))
        half = Box3D((1.0, 0.0, 0.0), (3.0, 1.0, 1.0))
        acc = acc_at_iou([gt, None, half], [gt, gt, gt])
        assert acc[0.25] == pytest.approx(2 / 3)
        assert acc[0.5] == pytest.approx(1 / 3)

    def test_empty(self) -> None:
        with pytest.raises(EmptyBenchmark):
            acc_at_iou([], [])

    def test_length_mismatch(self) -> None:
        box = Box3D((0.0, 0.0, 0.0), (1.0, 1.0, 1.0))
        with pytest.raises(ValueError, match="predictions"):
            acc_at_iou([box], [box, box])


class TestLabelRanking:
    def test_exact_tag_first_then_alphabetical(self) -> None:
        assert rank_labels(["zebra", "Sofa", "chair"], {"chair": 2}) == ["chair", "sofa", "zebra"]

    def test_no_tags_keeps_alphabetical(self) -> None:
        assert rank_labels(["b", "a"], []) == ["a", "b"]

    def test_curve_and_auc(self) -> None:
        report = auc_topk([["a", "b", "c"], ["b", "a", "c"]], ["a", "a"], ["a", "b", "c"])
        assert report.curve == (0.5, 1.0, 1.0)
        assert report.auc == pytest.approx(250 / 3)
        assert report.at(1) == 50.0
        assert report.at(100) == 100.0

    def test_label_outside_set(self) -> None:
        with pytest.raises(LabelSetError):
            topk_curve([["a"]], ["z"], ["a"])

    def test_no_rankings(self) -> None:
        with pytest.raises(EmptyBenchmark):
            topk_curve([], [], ["a"])
