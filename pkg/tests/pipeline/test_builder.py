from __future__ import annotations

import threading
import time

import numpy as np
import pytest
from result import Err

from ovigo.config.defaults import default_config
from ovigo.models.errors import EmptyInput, ErrorCode
from ovigo.models.scene import FrameDetections, FrameEntry, Intrinsics, SequenceManifest
from ovigo.pipeline.builder import _ordered_map, accumulate_cloud, build_scene, worker_count
from tests.fs_mock import MemoryFileSystem

K = Intrinsics(fx=100.0, fy=100.0, cx=0.0, cy=0.0)


def _frame(depth_value: int, frame_id: int = 0) -> tuple[np.ndarray, FrameDetections]:
    depth = np.full((2, 2), depth_value, dtype=np.uint16)
    return depth, FrameDetections(frame_id=frame_id, intrinsics=K, pose=np.eye(4), depth_scale=0.001)


class TestWorkers:
    @pytest.mark.parametrize(("threads", "expected"), [(4, 4), (1, 1), (0, 1)])
    def test_explicit(self, threads: int, expected: int) -> None:
        assert worker_count(threads) == expected

    def test_default_uses_cores(self) -> None:
        assert worker_count(None) >= 1

    def test_results_in_submission_order(self) -> None:
        def slow_first(n: int) -> tuple[int, str]:
            time.sleep(0.02 if n == 0 else 0.0)
            return n, threading.current_thread().name

        results = _ordered_map(slow_first, range(6), workers=3)
        assert [n for n, _ in results] == list(range(6))


class TestAccumulateCloud:
    def test_voxel_keeps_first_point(self) -> None:
        cloud = accumulate_cloud([_frame(1000), _frame(1000, 1)], voxel=0.05)
        assert cloud.points.tolist() == [[0.0, 0.0, 1.0]]

    def test_fine_voxel_keeps_every_pixel(self) -> None:
        cloud = accumulate_cloud([_frame(1000)], voxel=0.005)
        assert len(cloud) == 4

    def test_zero_depth_frames_skipped(self) -> None:
        cloud = accumulate_cloud([_frame(0), _frame(2000, 1)], voxel=0.005)
        assert np.allclose(cloud.z, 2.0)

    def test_nothing_valid(self) -> None:
        with pytest.raises(EmptyInput):
            accumulate_cloud([_frame(0)], voxel=0.05)


class TestBuildSceneErrors:
    def test_missing_depth_names_load_stage(self) -> None:
        entry = FrameEntry(
            frame_id=3,
            rgb_path="/seq/rgb.png",
            depth_path="/seq/depth.png",
            detections_path="/seq/det.json",
            pose=np.eye(4),
            intrinsics=K,
        )
        stages: list[str] = []
        result = build_scene(
            SequenceManifest(frames=(entry,), base_dir="/seq"),
            default_config(),
            fs=MemoryFileSystem(),
            on_stage=stages.append,
        )
        assert isinstance(result, Err)
        assert result.err_value.code is ErrorCode.MISSING_FILE
        assert result.err_value.stage == "load"
        assert result.err_value.context["frame_id"] == 3
        assert stages == ["load"]

    def test_no_frames_and_no_cloud(self) -> None:
        result = build_scene(SequenceManifest(frames=(), base_dir="/"), default_config(), fs=MemoryFileSystem())
        assert isinstance(result, Err)
        assert result.err_value.code is ErrorCode.EMPTY_INPUT
