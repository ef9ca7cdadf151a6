from __future__ import annotations

import io

import numpy as np
from plyfile import PlyData, PlyElement

from ovigo.models.errors import MissingFile, ParseError
from ovigo.models.geometry import PointCloud
from ovigo.services.fs import DEFAULT_FS, FileSystem

PLY_SUFFIX = ".ply"


def read_point_cloud(path: str, fs: FileSystem = DEFAULT_FS) -> PointCloud:
    """Read a PLY file or a whitespace ``x y z [object_id]`` text file."""
    if not fs.exists(path):
        raise MissingFile(f"Point cloud {path} does not exist", path=path)
    data = fs.read_bytes(path)
    if path.lower().endswith(PLY_SUFFIX) or data[:3] == b"ply":
        return parse_ply(data, path)
    return parse_xyz_text(data.decode("utf-8"), path)


def write_point_cloud(cloud: PointCloud, path: str, fs: FileSystem = DEFAULT_FS, *, text: bool = False) -> None:
    if path.lower().endswith(PLY_SUFFIX):
        fs.write_bytes(path, encode_ply(cloud, ascii_format=text))
    else:
        fs.write_text(path, encode_xyz_text(cloud))


def parse_ply(data: bytes, source: str = "<bytes>") -> PointCloud:
    try:
        ply = PlyData.read(io.BytesIO(data))
        vertex = ply["vertex"]
    except Exception as exc:  # noqa: BLE001
        raise ParseError(f"Malformed PLY: {exc}", path=source) from exc

    names = {p.name for p in vertex.properties}
    missing = {"x", "y", "z"} - names
    if missing:
        raise ParseError(f"PLY vertex element lacks {sorted(missing)}", path=source)
    points = np.column_stack([np.asarray(vertex[axis], dtype=np.float64) for axis in ("x", "y", "z")])
    ids = np.asarray(vertex["object_id"], dtype=np.int64) if "object_id" in names else None
    try:
        return PointCloud(points, ids)
    except ValueError as exc:
        raise ParseError(str(exc), path=source) from exc


def encode_ply(cloud: PointCloud, *, ascii_format: bool = False) -> bytes:
    fields: list[tuple[str, str]] = [("x", "f8"), ("y", "f8"), ("z", "f8")]
    if cloud.object_id is not None:
        fields.append(("object_id", "u4"))
    vertex = np.empty(len(cloud), dtype=fields)
    vertex["x"] = cloud.points[:, 0]
    vertex["y"] = cloud.points[:, 1]
    vertex["z"] = cloud.points[:, 2]
    if cloud.object_id is not None:
        vertex["object_id"] = cloud.object_id.astype(np.uint32)
    buf = io.BytesIO()
    PlyData([PlyElement.describe(vertex, "vertex")], text=ascii_format, byte_order="<").write(buf)
    return buf.getvalue()


def parse_xyz_text(text: str, source: str = "<text>") -> PointCloud:
    rows: list[list[float]] = []
    width: int | None = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        parts = stripped.split()
        if len(parts) not in (3, 4) or (width is not None and len(parts) != width):
            raise ParseError(f"Line {lineno} must hold 3 or 4 consistent columns", path=source, line=lineno)
        width = len(parts)
        try:
            rows.append([float(p) for p in parts])
        except ValueError as exc:
            raise ParseError(f"Line {lineno}: {exc}", path=source, line=lineno) from exc
    if not rows:
        return PointCloud.empty()
    arr = np.asarray(rows, dtype=np.float64)
    ids = arr[:, 3].astype(np.int64) if width == 4 else None
    try:
        return PointCloud(arr[:, :3], ids)
    except ValueError as exc:
        raise ParseError(str(exc), path=source) from exc


def encode_xyz_text(cloud: PointCloud) -> str:
    lines: list[str] = []
    for i, (x, y, z) in enumerate(cloud.points.tolist()):
        if cloud.object_id is not None:
            lines.append(f"{x!r} {y!r} {z!r} {int(cloud.object_id[i])}")
        else:
            lines.append(f"{x!r} {y!r} {z!r}")
    return "\n".join(lines) + ("\n" if lines else "")
