from __future__ import annotations

import json
import math
from typing import Any

from ovigo.models.errors import FrameMismatch, MissingFile, ParseError
from ovigo.models.geometry import BevFrame, BinaryMask
from ovigo.services.fs import DEFAULT_FS, FileSystem
from ovigo.services.rle import decode_rle, encode_rle


def frame_to_dict(frame: BevFrame) -> dict[str, Any]:
    return {
        "h": frame.h,
        "w": frame.w,
        "meters_per_pixel": frame.meters_per_pixel,
        "origin_xy": [frame.origin_xy[0], frame.origin_xy[1]],
    }


def frame_from_dict(raw: Any, where: str = "$.frame") -> BevFrame:
    try:
        origin = raw["origin_xy"]
        return BevFrame(
            h=int(raw["h"]),
            w=int(raw["w"]),
            meters_per_pixel=float(raw["meters_per_pixel"]),
            origin_xy=(float(origin[0]), float(origin[1])),
        )
    except (KeyError, IndexError, TypeError, ValueError) as exc:
        raise ParseError(f"{where} is not a valid BEV frame: {exc}", path=where) from exc


def _same_frame(a: BevFrame, b: BevFrame) -> bool:
    return (
        a.shape == b.shape
        and math.isclose(a.meters_per_pixel, b.meters_per_pixel, rel_tol=1e-9)
        and math.isclose(a.origin_xy[0], b.origin_xy[0], abs_tol=1e-6)
        and math.isclose(a.origin_xy[1], b.origin_xy[1], abs_tol=1e-6)
    )


def parse_location_masks(payload: Any, floor_index: int, frame: BevFrame | None = None) -> list[BinaryMask]:
    if not isinstance(payload, dict):
        raise ParseError("Location mask file must be a JSON object", path="$")
    if payload.get("floor") != floor_index:
        raise FrameMismatch(
            f"Location masks are for floor {payload.get('floor')}, expected floor {floor_index}",
            floor=floor_index,
        )
    file_frame = frame_from_dict(payload.get("frame"))
    if frame is not None and not _same_frame(file_frame, frame):
        raise FrameMismatch(
            f"Location mask frame {file_frame.shape} does not match floor {floor_index} frame {frame.shape}",
            floor=floor_index,
        )
    masks = payload.get("masks")
    if not isinstance(masks, list):
        raise ParseError("$.masks must be a list", path="$.masks")
    target = frame or file_frame
    return [
        BinaryMask(decode_rle(rows, target.h, target.w, where=f"$.masks[{i}]"), target) for i, rows in enumerate(masks)
    ]


def _read_payload(path: str, fs: FileSystem) -> Any:
    if not fs.exists(path):
        raise MissingFile(f"Location mask file {path} does not exist", path=path)
    try:
        return json.loads(fs.read_text(path))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path} is not valid JSON at offset {exc.pos}", path=path, offset=exc.pos) from exc


def ingest_location_masks(
    path: str, floor_index: int, frame: BevFrame | None = None, fs: FileSystem = DEFAULT_FS
) -> list[BinaryMask]:
    """Load externally produced location masks for one floor and check them against its BEV frame."""
    return parse_location_masks(_read_payload(path, fs), floor_index, frame)


def location_masks_to_dict(floor_index: int, frame: BevFrame, masks: list[BinaryMask]) -> dict[str, Any]:
    return {"floor": floor_index, "frame": frame_to_dict(frame), "masks": [encode_rle(m.values) for m in masks]}


def load_location_mask_files(
    paths: list[str] | tuple[str, ...], frames: dict[int, BevFrame], fs: FileSystem = DEFAULT_FS
) -> dict[int, list[BinaryMask]]:
    """Read mask files, each naming its own floor, and group the masks by floor index."""
    out: dict[int, list[BinaryMask]] = {}
    for path in paths:
        payload = _read_payload(path, fs)
        floor = payload.get("floor") if isinstance(payload, dict) else None
        if isinstance(floor, bool) or not isinstance(floor, int):
            raise ParseError(f"{path}: $.floor must be an integer", path=path)
        if floor not in frames:
            raise FrameMismatch(f"{path} targets floor {floor}, which the scene does not have", floor=floor)
        out.setdefault(floor, []).extend(parse_location_masks(payload, floor, frames[floor]))
    return out
