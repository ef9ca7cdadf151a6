"""Static exports: BEV overview PNGs and a Graphviz DOT rendering of the hierarchy."""

from __future__ import annotations

import io
import json

import numpy as np
from PIL import Image
from skimage.segmentation import find_boundaries

from ovigo.geometry.polygons import rasterize_polygon
from ovigo.geometry.raster import project_bev
from ovigo.layers.locations import height_band_filter
from ovigo.models.enums import EdgeKind
from ovigo.models.scene import HeightBand, SceneGraph

_PALETTE = np.array(
    [
        (141, 211, 199),
        (255, 255, 179),
        (190, 186, 218),
        (251, 128, 114),
        (128, 177, 211),
        (253, 180, 98),
        (179, 222, 105),
        (252, 205, 229),
    ],
    dtype=np.uint8,
)


def _png(pixels: np.ndarray) -> bytes:
    buffer = io.BytesIO()
    # Row 0 holds the lowest y; flip so north is up.
    Image.fromarray(np.ascontiguousarray(np.flipud(pixels))).save(buffer, format="PNG")
    return buffer.getvalue()


def render_bev_png(graph: SceneGraph, floor_id: int) -> bytes:
    """Room regions in palette colors over the floor occupancy, with room and location outlines."""
    floor = graph.floors[floor_id]
    frame = floor.frame
    image = np.full((*frame.shape, 3), 255, dtype=np.uint8)
    image[floor.mask.values] = (200, 200, 200)

    labels = np.zeros(frame.shape, dtype=np.int64)
    rooms = [r for r in graph.rooms.values() if graph.parent_of(EdgeKind.FR, r.id) == floor_id]
    for i, room in enumerate(rooms):
        image[room.mask.values] = _PALETTE[i % len(_PALETTE)]
        labels[room.mask.values] = room.id
    image[find_boundaries(labels, mode="inner") & (labels > 0)] = (60, 60, 60)

    for loc in graph.locations.values():
        if loc.floor_index != floor_id:
            continue
        region = rasterize_polygon(loc.polygon, frame).values
        image[find_boundaries(region, mode="inner") & region] = (200, 30, 30)
    return _png(image)


def render_loc_input_png(graph: SceneGraph, floor_id: int, band: HeightBand) -> bytes:
    """Grayscale height-band BEV of one floor, the image a neural location detector consumes."""
    floor = graph.floors[floor_id]
    banded = height_band_filter(floor.cloud, band, bounds=(floor.z_low, floor.z_high))
    bev = project_bev(banded, floor.frame.meters_per_pixel, floor.frame)
    return _png(np.round(bev.values * 255).astype(np.uint8))


def _label(text: str) -> str:
    return json.dumps(text)


def graph_to_dot(graph: SceneGraph) -> str:
    lines = ["digraph scene {", "  rankdir=TB;", f"  b0 [shape=house, label={_label(graph.building_tag)}];"]
    for f in graph.floors.values():
        lines.append(f"  f{f.id} [shape=box, label={_label(f.tag)}];")
    for r in graph.rooms.values():
        lines.append(f"  r{r.id} [shape=box, style=rounded, label={_label(f'{r.id}: {r.tag}')}];")
    for loc in graph.locations.values():
        lines.append(f"  l{loc.id} [shape=ellipse, label={_label(f'{loc.id}: {loc.tag}')}];")
    for o in graph.objects.values():
        lines.append(f"  o{o.id} [shape=plaintext, label={_label(f'{o.id}: {o.primary_tag}')}];")
    prefix = {EdgeKind.BF: ("b", "f"), EdgeKind.FR: ("f", "r"), EdgeKind.RL: ("r", "l"), EdgeKind.LO: ("l", "o")}
    for edge in graph.edges:
        if edge.kind is EdgeKind.RO:
            # Objects inside a location hang off the location instead.
            if graph.objects[edge.child_id].location_id is not None:
                continue
            lines.append(f"  r{edge.parent_id} -> o{edge.child_id};")
            continue
        p, c = prefix[edge.kind]
        lines.append(f"  {p}{edge.parent_id} -> {c}{edge.child_id};")
    lines.append("}")
    return "\n".join(lines) + "\n"
