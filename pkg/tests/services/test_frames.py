from __future__ import annotations

import json
import logging

import numpy as np
import pytest

from ovigo.models.errors import FrameMismatch, MissingFile, ParseError
from ovigo.models.scene import Detection, FrameDetections, Intrinsics
from ovigo.services.frames import detections_to_dict, encode_depth_png, load_frame, load_sequence
from tests.fs_mock import MemoryFileSystem

K = Intrinsics(fx=100.0, fy=100.0, cx=2.0, cy=2.0)
POSE = np.eye(4)


def _mask(rows: slice, cols: slice) -> np.ndarray:
    mask = np.zeros((4, 6), dtype=bool)
    mask[rows, cols] = True
    return mask


def _frame_row(frame_id: int) -> dict:
    return {
        "frame_id": frame_id,
        "rgb_path": f"rgb/{frame_id}.jpg",
        "depth_path": f"depth/{frame_id}.png",
        "detections_path": f"det/{frame_id}.json",
        "pose": POSE.tolist(),
        "intrinsics": {"fx": 100, "fy": 100, "cx": 2, "cy": 2},
    }


def _sequence(*, det_frame_id: int = 1, box: tuple[int, int, int, int] = (1, 0, 2, 2)) -> MemoryFileSystem:
    fs = MemoryFileSystem()
    manifest = {"frames": [_frame_row(1), _frame_row(0)], "cloud_path": "scene.ply", "location_masks": ["m0.json"]}
    fs.add_file("/seq/manifest.json", json.dumps(manifest))
    depth = np.full((4, 6), 1500, dtype=np.uint16)
    for frame_id in (0, 1):
        fs.add_file(f"/seq/depth/{frame_id}.png", encode_depth_png(depth))
    detections = FrameDetections(
        frame_id=det_frame_id,
        intrinsics=K,
        pose=POSE,
        depth_scale=0.001,
        detections=[Detection(tag="chair", score=0.9, box2d=box, mask=_mask(slice(0, 2), slice(1, 3)))],
    )
    fs.add_file("/seq/det/1.json", json.dumps(detections_to_dict(detections)))
    return fs


class TestLoadSequence:
    def test_paths_resolve_against_manifest(self) -> None:
        manifest = load_sequence("/seq/manifest.json", _sequence())
        assert [f.frame_id for f in manifest.frames] == [0, 1]
        assert manifest.frames[1].depth_path == "/seq/depth/1.png"
        assert manifest.cloud_path == "/seq/scene.ply"
        assert manifest.location_masks == ("/seq/m0.json",)
        assert manifest.frames[0].depth_scale == pytest.approx(0.001)

    def test_missing_manifest(self) -> None:
        with pytest.raises(MissingFile):
            load_sequence("/seq/manifest.json", MemoryFileSystem())

    def test_bad_pose_bottom_row(self) -> None:
        row = _frame_row(0)
        row["pose"] = [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 1, 1]]
        fs = MemoryFileSystem().add_file("/m.json", json.dumps({"frames": [row]}))
        with pytest.raises(ParseError) as info:
            load_sequence("/m.json", fs)
        assert info.value.context["path"] == "$.frames[0].pose"

    def test_missing_field(self) -> None:
        row = _frame_row(0)
        del row["depth_path"]
        fs = MemoryFileSystem().add_file("/m.json", json.dumps({"frames": [row]}))
        with pytest.raises(ParseError, match="depth_path"):
            load_sequence("/m.json", fs)

    def test_frames_must_be_list(self) -> None:
        fs = MemoryFileSystem().add_file("/m.json", json.dumps({"frames": {}}))
        with pytest.raises(ParseError):
            load_sequence("/m.json", fs)

    def test_structure_label_defaults_to_none(self) -> None:
        assert load_sequence("/seq/manifest.json", _sequence()).structure_id is None
        fs = MemoryFileSystem().add_file("/m.json", json.dumps({"frames": [_frame_row(0)], "structure_id": 0}))
        assert load_sequence("/m.json", fs).structure_id == 0

    def test_structure_label_must_be_integer(self) -> None:
        fs = MemoryFileSystem().add_file("/m.json", json.dumps({"frames": [], "structure_id": "walls"}))
        with pytest.raises(ParseError, match="structure_id"):
            load_sequence("/m.json", fs)


class TestLoadFrame:
    def test_depth_and_detections(self) -> None:
        fs = _sequence()
        entry = load_sequence("/seq/manifest.json", fs).frames[1]
        depth, frame = load_frame(entry, fs)
        assert depth.shape == (4, 6)
        assert int(depth[0, 0]) == 1500
        assert frame.frame_id == 1
        assert frame.intrinsics == K
        (det,) = frame.detections
        assert det.tag == "chair"
        assert np.array_equal(det.mask, _mask(slice(0, 2), slice(1, 3)))

    def test_frame_id_mismatch(self) -> None:
        fs = _sequence(det_frame_id=5)
        entry = load_sequence("/seq/manifest.json", fs).frames[1]
        with pytest.raises(FrameMismatch):
            load_frame(entry, fs)

    def test_missing_depth(self) -> None:
        fs = _sequence()
        entry = load_sequence("/seq/manifest.json", fs).frames[1]
        fs._files.pop("/seq/depth/1.png")
        with pytest.raises(MissingFile) as info:
            load_frame(entry, fs)
        assert info.value.context["frame_id"] == 1

    def test_missing_detections(self) -> None:
        fs = _sequence()
        entry = load_sequence("/seq/manifest.json", fs).frames[0]
        with pytest.raises(MissingFile):
            load_frame(entry, fs)

    def test_mask_spill_is_clipped(self, caplog: pytest.LogCaptureFixture) -> None:
        fs = _sequence(box=(1, 0, 1, 1))
        entry = load_sequence("/seq/manifest.json", fs).frames[1]
        with caplog.at_level(logging.WARNING, logger="ovigo.services.frames"):
            _, frame = load_frame(entry, fs)
        assert frame.detections[0].mask.sum() == 1
        assert bool(frame.detections[0].mask[0, 1])
        assert "spills" in caplog.text
