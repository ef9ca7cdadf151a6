from __future__ import annotations

import io
import json
import logging
import os
from typing import Any

import numpy as np
from PIL import Image

from ovigo.models.errors import FrameMismatch, MissingFile, ParseError
from ovigo.models.geometry import FloatArray
from ovigo.models.scene import Detection, FrameDetections, FrameEntry, Intrinsics, SequenceManifest
from ovigo.services.fs import DEFAULT_FS, FileSystem, resolve
from ovigo.services.rle import decode_rle, encode_rle

logger = logging.getLogger(__name__)

DEFAULT_DEPTH_SCALE = 0.001


def _load_json(path: str, fs: FileSystem, what: str) -> Any:
    if not fs.exists(path):
        raise MissingFile(f"{what} {path} does not exist", path=path)
    text = fs.read_text(path)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{what} {path} is not valid JSON at offset {exc.pos}", path=path, offset=exc.pos) from exc


def _require(obj: Any, key: str, where: str) -> Any:
    if not isinstance(obj, dict) or key not in obj:
        raise ParseError(f"{where}.{key} is required", path=f"{where}.{key}")
    return obj[key]


def parse_pose(raw: Any, where: str) -> FloatArray:
    try:
        pose = np.asarray(raw, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{where} must be a 4x4 numeric matrix", path=where) from exc
    if pose.shape != (4, 4) or not np.all(np.isfinite(pose)):
        raise ParseError(f"{where} must be a finite 4x4 matrix", path=where)
    if not np.allclose(pose[3], (0.0, 0.0, 0.0, 1.0)):
        raise ParseError(f"{where} bottom row must be (0, 0, 0, 1)", path=where)
    return pose


def parse_intrinsics(raw: Any, where: str) -> Intrinsics:
    try:
        return Intrinsics(
            fx=float(_require(raw, "fx", where)),
            fy=float(_require(raw, "fy", where)),
            cx=float(_require(raw, "cx", where)),
            cy=float(_require(raw, "cy", where)),
        )
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{where}: {exc}", path=where) from exc


def intrinsics_to_dict(k: Intrinsics) -> dict[str, float]:
    return {"fx": k.fx, "fy": k.fy, "cx": k.cx, "cy": k.cy}


def load_sequence(manifest_path: str, fs: FileSystem = DEFAULT_FS) -> SequenceManifest:
    """Parse a sequence manifest; relative paths resolve against its directory."""
    manifest_path = fs.expanduser(manifest_path)
    payload = _load_json(manifest_path, fs, "Manifest")
    base_dir = os.path.dirname(manifest_path)
    raw_frames = _require(payload, "frames", "$")
    if not isinstance(raw_frames, list):
        raise ParseError("$.frames must be a list", path="$.frames")

    frames: list[FrameEntry] = []
    for i, raw in enumerate(raw_frames):
        where = f"$.frames[{i}]"
        try:
            frame_id = int(_require(raw, "frame_id", where))
            depth_scale = float(raw.get("depth_scale", DEFAULT_DEPTH_SCALE))
        except (TypeError, ValueError) as exc:
            raise ParseError(f"{where}: {exc}", path=where) from exc
        frames.append(
            FrameEntry(
                frame_id=frame_id,
                rgb_path=resolve(base_dir, str(_require(raw, "rgb_path", where))),
                depth_path=resolve(base_dir, str(_require(raw, "depth_path", where))),
                detections_path=resolve(base_dir, str(_require(raw, "detections_path", where))),
                pose=parse_pose(_require(raw, "pose", where), f"{where}.pose"),
                intrinsics=parse_intrinsics(_require(raw, "intrinsics", where), f"{where}.intrinsics"),
                depth_scale=depth_scale,
            )
        )
    frames.sort(key=lambda f: f.frame_id)

    cloud_path = payload.get("cloud_path")
    masks = payload.get("location_masks", [])
    if not isinstance(masks, list):
        raise ParseError("$.location_masks must be a list of paths", path="$.location_masks")
    structure_id = payload.get("structure_id")
    if structure_id is not None and (isinstance(structure_id, bool) or not isinstance(structure_id, int)):
        raise ParseError("$.structure_id must be an integer label or null", path="$.structure_id")
    return SequenceManifest(
        frames=tuple(frames),
        base_dir=base_dir,
        cloud_path=resolve(base_dir, str(cloud_path)) if cloud_path else None,
        location_masks=tuple(resolve(base_dir, str(m)) for m in masks),
        structure_id=structure_id,
    )


def read_depth_png(path: str, fs: FileSystem = DEFAULT_FS) -> np.ndarray:
    """Raw 16-bit depth units; callers multiply by the frame's depth_scale."""
    try:
        with Image.open(io.BytesIO(fs.read_bytes(path))) as img:
            depth = np.asarray(img)
    except OSError as exc:
        raise ParseError(f"Depth image {path} is not a readable PNG: {exc}", path=path) from exc
    if depth.ndim != 2:
        raise ParseError(f"Depth image {path} must be single-channel", path=path)
    return depth.astype(np.uint16)


def encode_depth_png(depth: np.ndarray) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(np.asarray(depth, dtype=np.uint16)).save(buf, format="PNG")
    return buf.getvalue()


def parse_detections(payload: Any, entry: FrameEntry, shape: tuple[int, int], source: str) -> FrameDetections:
    """Decode one frame's detection document against the depth image grid.

    Pose and intrinsics default to the manifest row when the document omits them.
    """
    doc_id = _require(payload, "frame_id", "$")
    if isinstance(doc_id, bool) or not isinstance(doc_id, int):
        raise ParseError(f"{source}: $.frame_id must be an integer", path="$.frame_id")
    if doc_id != entry.frame_id:
        raise FrameMismatch(
            f"Detections {source} belong to frame {doc_id}, manifest says {entry.frame_id}",
            path=source,
            frame_id=entry.frame_id,
        )
    pose = parse_pose(payload["pose"], "$.pose") if "pose" in payload else entry.pose
    intrinsics = entry.intrinsics
    if "intrinsics" in payload:
        intrinsics = parse_intrinsics(payload["intrinsics"], "$.intrinsics")
    depth_scale = float(payload.get("depth_scale", entry.depth_scale))

    raw_dets = _require(payload, "detections", "$")
    if not isinstance(raw_dets, list):
        raise ParseError(f"{source}: $.detections must be a list", path="$.detections")
    h, w = shape
    detections: list[Detection] = []
    for i, raw in enumerate(raw_dets):
        where = f"$.detections[{i}]"
        box = _require(raw, "box2d", where)
        if not (isinstance(box, list) and len(box) == 4):
            raise ParseError(f"{source}: {where}.box2d must be [x, y, w, h]", path=f"{where}.box2d")
        x, y, bw, bh = (int(v) for v in box)
        mask = decode_rle(_require(raw, "mask", where), h, w, where=f"{where}.mask")
        inside = np.zeros_like(mask)
        inside[max(y, 0) : max(y + bh, 0), max(x, 0) : max(x + bw, 0)] = True
        if np.any(mask & ~inside):
            logger.warning("Frame %d detection %d: mask spills outside its box; clipping", entry.frame_id, i)
            mask &= inside
        detections.append(
            Detection(
                tag=str(_require(raw, "tag", where)),
                score=float(_require(raw, "score", where)),
                box2d=(x, y, bw, bh),
                mask=mask,
            )
        )
    return FrameDetections(
        frame_id=entry.frame_id,
        intrinsics=intrinsics,
        pose=pose,
        depth_scale=depth_scale,
        detections=detections,
    )


def load_frame(entry: FrameEntry, fs: FileSystem = DEFAULT_FS) -> tuple[np.ndarray, FrameDetections]:
    """Read the depth image and detections of one manifest row."""
    if not fs.exists(entry.depth_path):
        raise MissingFile(
            f"Depth image for frame {entry.frame_id} is missing: {entry.depth_path}",
            frame_id=entry.frame_id,
            path=entry.depth_path,
        )
    depth = read_depth_png(entry.depth_path, fs)
    payload = _load_json(entry.detections_path, fs, f"Detections of frame {entry.frame_id}")
    return depth, parse_detections(payload, entry, depth.shape, entry.detections_path)


def detections_to_dict(frame: FrameDetections) -> dict[str, Any]:
    return {
        "frame_id": frame.frame_id,
        "intrinsics": intrinsics_to_dict(frame.intrinsics),
        "pose": frame.pose.tolist(),
        "depth_scale": frame.depth_scale,
        "detections": [
            {"tag": d.tag, "score": d.score, "box2d": list(d.box2d), "mask": encode_rle(d.mask)}
            for d in frame.detections
        ],
    }
