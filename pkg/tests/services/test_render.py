from __future__ import annotations

import io
from dataclasses import replace

import numpy as np
from PIL import Image

from ovigo.models.geometry import Box3D, PointCloud
from ovigo.models.scene import HeightBand
from ovigo.services.render import graph_to_dot, render_bev_png, render_loc_input_png
from tests.factories import box_points, two_room_graph


class TestBevPng:
    def test_size_matches_frame(self) -> None:
        image = Image.open(io.BytesIO(render_bev_png(two_room_graph(), 0)))
        assert image.size == (80, 40)
        assert image.mode == "RGB"


class TestLocInputPng:
    def test_grayscale_of_floor_frame(self) -> None:
        graph = two_room_graph()
        floor = graph.floors[0]
        ground = box_points(Box3D((0.0, 0.0, 0.0), (8.0, 4.0, 0.0)))
        table = box_points(Box3D((1.0, 1.0, 0.5), (2.0, 2.0, 0.8)))
        dense = PointCloud(np.vstack([ground, table]))
        graph = replace(graph, floors={0: replace(floor, cloud=dense)})
        image = Image.open(io.BytesIO(render_loc_input_png(graph, 0, HeightBand(0.0, 0.5))))
        assert image.mode == "L"
        assert image.size == (80, 40)
        assert np.asarray(image).max() == 255


class TestDot:
    def test_hierarchy_edges(self) -> None:
        dot = graph_to_dot(two_room_graph())
        assert dot.startswith("digraph scene {")
        assert "b0 -> f0;" in dot
        assert "f0 -> r1;" in dot
        assert "r1 -> l1;" in dot
        assert "l1 -> o1;" in dot
        assert "r1 -> o4;" in dot
        assert "r1 -> o1;" not in dot

    def test_labels_quoted(self) -> None:
        dot = graph_to_dot(two_room_graph())
        assert 'label="house"' in dot
        assert 'label="2: kitchen"' in dot
