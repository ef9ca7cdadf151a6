from __future__ import annotations

import math
from collections.abc import Sequence

import numpy as np
import shapely
from scipy.spatial import Delaunay
from shapely.geometry import MultiPolygon, Polygon, box
from shapely.ops import unary_union

from ovigo.models.errors import DegenerateCluster, DegeneratePolygon
from ovigo.models.geometry import BevFrame, BinaryMask, FloatArray, Polygon2D


def _as_points(points2d: FloatArray | Sequence[tuple[float, float]]) -> FloatArray:
    pts = np.unique(np.asarray(points2d, dtype=np.float64).reshape(-1, 2), axis=0)
    if pts.shape[0] < 3:
        raise DegenerateCluster(f"Alpha shape needs 3 distinct points, got {pts.shape[0]}")
    centered = pts - pts.mean(axis=0)
    if np.linalg.matrix_rank(centered, tol=1e-9) < 2:
        raise DegenerateCluster("Alpha shape input is collinear")
    return pts


def _polygons_of(geom: shapely.Geometry) -> list[Polygon]:
    if isinstance(geom, Polygon):
        return [geom] if not geom.is_empty else []
    if isinstance(geom, MultiPolygon):
        return list(geom.geoms)
    return [g for g in getattr(geom, "geoms", []) if isinstance(g, Polygon)]


def alpha_shape(points2d: FloatArray | Sequence[tuple[float, float]], alpha: float) -> list[Polygon2D]:
    """Concave hull from Delaunay triangles with circumradius below 1/alpha.

    ``alpha == 0`` keeps every triangle (the convex hull). A point left uncovered
    by the filter pulls in its tightest incident triangle so the result covers
    the whole input.
    """
    if alpha < 0:
        msg = "alpha must be non-negative"
        raise ValueError(msg)
    pts = _as_points(points2d)
    tri = Delaunay(pts)
    simplices = tri.simplices
    corners = pts[simplices]
    a = np.linalg.norm(corners[:, 0] - corners[:, 1], axis=1)
    b = np.linalg.norm(corners[:, 1] - corners[:, 2], axis=1)
    c = np.linalg.norm(corners[:, 2] - corners[:, 0], axis=1)
    e1 = corners[:, 1] - corners[:, 0]
    e2 = corners[:, 2] - corners[:, 0]
    area = 0.5 * np.abs(e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
    with np.errstate(divide="ignore", invalid="ignore"):
        radius = np.where(area > 0, a * b * c / (4.0 * area), np.inf)

    keep = np.ones(len(simplices), dtype=bool) if alpha == 0 else radius < 1.0 / alpha
    covered = np.zeros(pts.shape[0], dtype=bool)
    covered[simplices[keep].ravel()] = True
    for p in np.flatnonzero(~covered):
        incident = np.flatnonzero((simplices == p).any(axis=1) & (area > 0))
        if incident.size:
            keep[incident[np.argmin(radius[incident])]] = True

    triangles = [Polygon(corners[i]) for i in np.flatnonzero(keep & (area > 0))]
    merged = _polygons_of(unary_union(triangles))
    merged.sort(key=lambda p: (p.bounds[0], p.bounds[1]))
    return [Polygon2D.from_shapely(p) for p in merged]


def polygon_compactness(poly: Polygon2D) -> float:
    """Isoperimetric ratio 4*pi*S / PR**2."""
    perimeter = poly.perimeter
    if perimeter <= 0:
        raise DegeneratePolygon("Polygon has zero perimeter")
    return 4.0 * math.pi * poly.area / (perimeter * perimeter)


def rasterize_polygon(poly: Polygon2D, frame: BevFrame) -> BinaryMask:
    """Cells whose center lies inside the polygon."""
    gx, gy = frame.cell_centers()
    inside = shapely.contains_xy(poly.to_shapely(), gx, gy)
    return BinaryMask(np.asarray(inside, dtype=bool), frame)


def points_in_polygon(poly: Polygon2D, xy: FloatArray) -> np.ndarray:
    """Boundary-inclusive point-in-polygon test."""
    geom = poly.to_shapely()
    return np.asarray(shapely.intersects_xy(geom, xy[:, 0], xy[:, 1]), dtype=bool)


def convex_hull(xy: FloatArray) -> Polygon2D | None:
    hull = shapely.MultiPoint(np.asarray(xy, dtype=np.float64)).convex_hull
    return Polygon2D.from_shapely(hull) if isinstance(hull, Polygon) else None


def mask_outline(mask: BinaryMask) -> Polygon2D:
    """Exterior of the largest connected piece of the mask, in metric coordinates."""
    if mask.is_empty():
        raise DegeneratePolygon("Cannot outline an empty mask")
    f = mask.frame
    mpp = f.meters_per_pixel
    ox, oy = f.origin_xy
    rows, cols = np.nonzero(mask.values)
    cells = [
        box(ox + c * mpp, oy + r * mpp, ox + (c + 1) * mpp, oy + (r + 1) * mpp)
        for r, c in zip(rows.tolist(), cols.tolist(), strict=True)
    ]
    pieces = _polygons_of(unary_union(cells))
    largest = max(pieces, key=lambda p: p.area)
    return Polygon2D.from_shapely(Polygon(largest.exterior).simplify(mpp * 1e-3))
