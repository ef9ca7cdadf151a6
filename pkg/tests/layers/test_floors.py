from __future__ import annotations

import numpy as np
import pytest

from ovigo.layers.floors import floor_frame, floor_node, segment_floors
from ovigo.models.errors import EmptyInput, NoFloors, UnpairedBoundary
from ovigo.models.geometry import PointCloud


def _plane(z: float, n: int = 20) -> np.ndarray:
    xs, ys = np.meshgrid(np.linspace(0.0, 4.0, n), np.linspace(0.0, 3.0, n))
    return np.column_stack([xs.ravel(), ys.ravel(), np.full(n * n, z)])


def _cloud(*planes: tuple[float, int], extra: list[list[float]] | None = None) -> PointCloud:
    parts = [_plane(z, n) for z, n in planes]
    if extra:
        parts.append(np.array(extra, dtype=np.float64))
    return PointCloud(np.vstack(parts))


class TestSegmentFloors:
    def test_two_storeys(self) -> None:
        cloud = _cloud((0.005, 20), (2.995, 20), (3.205, 20), (6.195, 20), extra=[[1.0, 1.0, 1.0], [1.0, 1.0, 4.5]])
        slabs = segment_floors(cloud)
        assert [s.index for s in slabs] == [0, 1]
        assert slabs[0].z_low == pytest.approx(0.0)
        assert slabs[0].z_high == pytest.approx(3.0)
        assert slabs[1].z_low == pytest.approx(3.2)
        assert slabs[1].z_high == pytest.approx(6.2)
        assert [s.tag for s in slabs] == ["floor 0", "floor 1"]
        assert np.any(np.isclose(slabs[0].cloud.z, 1.0))
        assert np.any(np.isclose(slabs[1].cloud.z, 4.5))

    def test_slabs_do_not_share_points(self) -> None:
        cloud = _cloud((0.005, 20), (2.995, 20), (3.205, 20), (6.195, 20))
        slabs = segment_floors(cloud)
        assert sum(len(s.cloud) for s in slabs) == len(cloud)

    def test_keeps_two_tallest_peaks_per_cluster(self) -> None:
        cloud = _cloud((0.005, 25), (0.205, 20), (0.405, 22), (5.005, 25), (5.205, 25))
        slabs = segment_floors(cloud, delta_f=0.05, p_h=0.5)
        assert len(slabs) == 2
        assert slabs[0].z_high == pytest.approx(0.41)
        assert slabs[1].z_low == pytest.approx(5.0)

    def test_odd_boundaries_rejected(self) -> None:
        cloud = _cloud((0.005, 20), (2.995, 20), (6.195, 20))
        with pytest.raises(UnpairedBoundary) as info:
            segment_floors(cloud)
        assert len(info.value.context["peaks"]) == 3

    def test_force_extend_pairs_with_cloud_top(self) -> None:
        cloud = _cloud((0.005, 20), (2.995, 20), (6.195, 20))
        slabs = segment_floors(cloud, force_extend=True)
        assert len(slabs) == 2
        assert slabs[1].z_high == pytest.approx(6.2)

    def test_all_peaks_noise(self) -> None:
        cloud = _cloud((0.005, 20), (5.005, 20))
        with pytest.raises(NoFloors):
            segment_floors(cloud, min_pts=2)

    def test_empty_cloud(self) -> None:
        with pytest.raises(EmptyInput):
            segment_floors(PointCloud.empty())


class TestNoisyScan:
    PLANES = (0.005, 2.795, 3.005, 5.795)

    def _scan(self, noise: int) -> PointCloud:
        rng = np.random.default_rng(7)
        parts: list[np.ndarray] = []
        for z in self.PLANES:
            xy = rng.uniform((0.0, 0.0), (6.0, 4.0), size=(12_000, 2))
            parts.append(np.column_stack([xy, np.full(len(xy), z)]))
        parts.append(rng.uniform((0.0, 0.0, 0.0), (6.0, 4.0, 5.8), size=(noise, 3)))
        return PointCloud(np.vstack(parts))

    def test_boundaries_within_two_centimeters(self) -> None:
        cloud = self._scan(2_600)
        assert len(cloud) >= 50_000
        slabs = segment_floors(cloud)
        assert len(slabs) == 2
        got = [(s.z_low, s.z_high) for s in slabs]
        for (low, high), (true_low, true_high) in zip(got, [(0.0, 2.8), (3.0, 5.8)], strict=True):
            assert low == pytest.approx(true_low, abs=0.02)
            assert high == pytest.approx(true_high, abs=0.02)

    def test_sparse_noise_leaves_boundaries_alone(self) -> None:
        clean = segment_floors(self._scan(0))
        noisy = segment_floors(self._scan(2_600))
        bounds = [b for s in clean for b in (s.z_low, s.z_high)]
        assert [b for s in noisy for b in (s.z_low, s.z_high)] == pytest.approx(bounds)


class TestFloorNode:
    def test_mask_and_box(self) -> None:
        (slab, _) = segment_floors(_cloud((0.005, 20), (2.995, 20), (3.205, 20), (6.195, 20)))
        frame = floor_frame(slab, 0.1)
        node = floor_node(slab, frame)
        assert node.id == 0
        assert node.frame == frame
        assert node.mask.values.any()
        assert node.bbox.min[2] == pytest.approx(slab.z_low)
        assert node.bbox.max[2] == pytest.approx(slab.z_high)
        assert node.bbox.max[0] == pytest.approx(4.0)
