from __future__ import annotations

import numpy as np
import pytest

from ovigo.layers.locations import (
    assign_room,
    cluster_locations,
    detect_locations_geometric,
    height_band_filter,
    locations_from_masks,
    locations_from_polygons,
    object_partition,
    polygon_coverage,
    reassign_whole_objects,
)
from ovigo.models.errors import EmptyBand, EmptyInput, MissingPartition
from ovigo.models.geometry import BinaryMask, Box3D, PointCloud, Polygon2D
from ovigo.models.scene import FloorSlab, HeightBand
from tests.factories import FRAME, box_points, make_object, make_room, rect_mask

BAND = HeightBand(0.05, 0.4)
TABLE = Box3D((1.0, 1.0, 0.0), (2.0, 2.0, 0.8))
CHAIR = Box3D((2.2, 1.0, 0.0), (2.6, 1.4, 0.5))
LAMP = Box3D((6.0, 3.0, 0.0), (6.3, 3.3, 1.2))


def _labelled_cloud() -> PointCloud:
    gx, gy = np.meshgrid(np.arange(0.0, 8.0, 0.2), np.arange(0.0, 4.0, 0.2))
    flat = np.column_stack([gx.ravel(), gy.ravel()])
    structure = np.vstack(
        [np.column_stack([flat, np.zeros(len(flat))]), np.column_stack([flat, np.full(len(flat), 3.0)])]
    )
    parts = [structure] + [box_points(b) for b in (TABLE, CHAIR, LAMP)]
    ids = [np.zeros(len(structure))] + [np.full(len(box_points(b)), i) for i, b in enumerate((TABLE, CHAIR, LAMP), 1)]
    return PointCloud(np.vstack(parts), np.concatenate(ids).astype(np.int64))


def _slab(cloud: PointCloud) -> FloorSlab:
    return FloorSlab(index=0, z_low=0.0, z_high=3.0, cloud=cloud, tag="floor 0")


def _rooms() -> list:
    return [make_room(1, 0.0, 4.0), make_room(2, 4.0, 8.0)]


class TestHeightBandFilter:
    def test_relative_to_bounds(self) -> None:
        cloud = PointCloud(np.array([[0, 0, 0.0], [0, 0, 0.5], [0, 0, 1.0], [0, 0, 2.0]], dtype=float))
        kept = height_band_filter(cloud, HeightBand(0.2, 0.6))
        assert kept.z.tolist() == [0.5, 1.0]

    def test_explicit_bounds(self) -> None:
        cloud = PointCloud(np.array([[0, 0, 0.5], [0, 0, 1.5]], dtype=float))
        kept = height_band_filter(cloud, HeightBand(0.0, 0.5), bounds=(0.0, 2.0))
        assert kept.z.tolist() == [0.5]

    def test_empty_band(self) -> None:
        cloud = PointCloud(np.array([[0, 0, 0.0], [0, 0, 2.0]], dtype=float))
        with pytest.raises(EmptyBand):
            height_band_filter(cloud, HeightBand(0.3, 0.6))

    def test_empty_cloud(self) -> None:
        with pytest.raises(EmptyInput):
            height_band_filter(PointCloud.empty(), BAND)


class TestReassignWholeObjects:
    def test_object_follows_majority(self) -> None:
        labels = np.array([0, 0, 1, -1, -1])
        ids = np.array([5, 5, 5, 5, 6])
        assert reassign_whole_objects(labels, ids).tolist() == [0, 0, 0, 0, -1]

    def test_tie_goes_to_lower_cluster(self) -> None:
        assert reassign_whole_objects(np.array([1, 0]), np.array([7, 7])).tolist() == [0, 0]


class TestClusterLocations:
    def test_groups_nearby_objects(self) -> None:
        clusters = cluster_locations(_labelled_cloud(), BAND, bounds=(0.0, 3.0))
        assert [c.object_ids for c in clusters] == [(1, 2)]

    def test_min_objects_one_keeps_singletons(self) -> None:
        clusters = cluster_locations(_labelled_cloud(), BAND, min_objects=1, bounds=(0.0, 3.0))
        assert sorted(c.object_ids for c in clusters) == [(1, 2), (3,)]

    def test_cluster_cloud_stays_in_band(self) -> None:
        (cluster,) = cluster_locations(_labelled_cloud(), BAND, bounds=(0.0, 3.0))
        assert cluster.cloud.z.min() >= 0.15 - 1e-9
        assert cluster.cloud.z.max() <= 1.2 + 1e-9

    def test_needs_partition(self) -> None:
        with pytest.raises(MissingPartition):
            cluster_locations(PointCloud(_labelled_cloud().points), BAND)

    def test_empty_band_gives_nothing(self) -> None:
        assert cluster_locations(_labelled_cloud(), HeightBand(0.95, 0.99), bounds=(0.0, 3.0)) == []

    def test_label_zero_is_an_ordinary_object(self) -> None:
        parts = [box_points(TABLE), box_points(CHAIR)]
        ids = np.concatenate([np.zeros(len(parts[0])), np.ones(len(parts[1]))]).astype(np.int64)
        cloud = PointCloud(np.vstack(parts), ids)
        assert [c.object_ids for c in cluster_locations(cloud, BAND, bounds=(0.0, 3.0))] == [(0, 1)]
        assert cluster_locations(cloud, BAND, bounds=(0.0, 3.0), structure_id=0) == []

    def test_structure_label_keeps_walls_out(self) -> None:
        base = _labelled_cloud()
        assert base.object_id is not None
        wall = box_points(Box3D((0.6, 0.0, 0.0), (0.8, 4.0, 3.0)))
        cloud = PointCloud(np.vstack([base.points, wall]), np.concatenate([base.object_id, np.full(len(wall), 9)]))
        merged = cluster_locations(cloud, BAND, bounds=(0.0, 3.0))
        assert [c.object_ids for c in merged] == [(1, 2, 9)]
        kept = cluster_locations(cloud, BAND, bounds=(0.0, 3.0), structure_id=9)
        assert [c.object_ids for c in kept] == [(1, 2)]


class TestDetectLocationsGeometric:
    def test_one_outline_around_table_and_chair(self) -> None:
        (poly,) = detect_locations_geometric(_labelled_cloud(), BAND, bounds=(0.0, 3.0))
        shape = poly.to_shapely()
        assert shape.contains(shape.centroid)
        assert shape.bounds[0] == pytest.approx(1.0)
        assert shape.bounds[2] == pytest.approx(2.6)

    def test_compactness_filter(self) -> None:
        assert detect_locations_geometric(_labelled_cloud(), BAND, compactness_min=0.99, bounds=(0.0, 3.0)) == []

    def test_area_filter(self) -> None:
        assert detect_locations_geometric(_labelled_cloud(), BAND, min_area=50.0, bounds=(0.0, 3.0)) == []


class TestAssignRoom:
    def test_tie_goes_to_lower_id(self) -> None:
        assert assign_room(rect_mask(3.0, 1.0, 5.0, 2.0), _rooms()) == 1

    def test_largest_overlap(self) -> None:
        assert assign_room(rect_mask(3.5, 1.0, 6.0, 2.0), _rooms()) == 2

    def test_nearest_when_disjoint(self) -> None:
        assert assign_room(rect_mask(0.0, 0.0, 1.0, 1.0), [make_room(2, 4.0, 8.0)]) == 2

    def test_no_rooms(self) -> None:
        assert assign_room(rect_mask(0.0, 0.0, 1.0, 1.0), []) is None


class TestLocationNodes:
    def test_from_polygons(self) -> None:
        poly = Polygon2D(((1.0, 1.0), (2.6, 1.0), (2.6, 2.0), (1.0, 2.0)))
        (loc,) = locations_from_polygons([poly], _slab(_labelled_cloud()), FRAME, _rooms(), BAND, first_id=4)
        assert loc.id == 4
        assert loc.room_id == 1
        assert loc.floor_index == 0
        assert loc.mask.count > 0
        assert loc.bbox.min[2] >= 0.15 - 1e-9

    def test_empty_outline_bbox_spans_band(self) -> None:
        poly = Polygon2D(((5.0, 0.5), (5.5, 0.5), (5.5, 1.0), (5.0, 1.0)))
        slab = _slab(PointCloud(np.array([[0.0, 0.0, 0.0], [0.0, 0.0, 3.0]])))
        (loc,) = locations_from_polygons([poly], slab, FRAME, _rooms(), BAND)
        assert loc.room_id == 2
        assert len(loc.cloud) == 0
        assert loc.bbox.min[2] == pytest.approx(0.15)
        assert loc.bbox.max[2] == pytest.approx(1.2)

    def test_from_masks_uses_contained_objects(self) -> None:
        objects = [make_object(1, "table", TABLE), make_object(3, "lamp", LAMP)]
        masks = [rect_mask(0.5, 0.5, 3.0, 2.5), rect_mask(5.0, 0.5, 6.0, 1.5)]
        first, second = locations_from_masks(masks, _slab(_labelled_cloud()), _rooms(), objects, BAND)
        assert first.polygon.area == pytest.approx(1.0)
        assert first.room_id == 1
        assert second.polygon.area == pytest.approx(masks[1].area)
        assert second.room_id == 2

    def test_empty_masks_skipped(self) -> None:
        empty = BinaryMask(np.zeros(FRAME.shape, dtype=bool), FRAME)
        assert locations_from_masks([empty], _slab(_labelled_cloud()), _rooms(), [], BAND) == []


class TestObjectPartition:
    def test_labels_points_with_node_ids(self) -> None:
        objects = [make_object(4, "table", TABLE), make_object(9, "lamp", LAMP)]
        cloud = object_partition(objects, _slab(_labelled_cloud()))
        assert cloud.object_id is not None
        assert set(np.unique(cloud.object_id).tolist()) == {4, 9}

    def test_no_objects(self) -> None:
        cloud = object_partition([], _slab(_labelled_cloud()))
        assert len(cloud) == 0
        assert cloud.object_id is not None


class TestPolygonCoverage:
    def test_fraction_inside(self) -> None:
        poly = Polygon2D(((0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)))
        cloud = PointCloud(np.array([[0.5, 0.5, 0.0], [2.0, 2.0, 0.0]]))
        assert polygon_coverage(poly, cloud) == 0.5
        assert polygon_coverage(poly, PointCloud.empty()) == 0.0
