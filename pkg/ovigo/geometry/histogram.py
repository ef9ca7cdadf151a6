from __future__ import annotations

import math

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ovigo.models.errors import EmptyInput, NoPeaks
from ovigo.models.geometry import HeightHistogram, Peak, PointCloud


def build_height_histogram(cloud: PointCloud, bin_h: float) -> HeightHistogram:
    """Count points per height bin; the origin snaps to a multiple of *bin_h* at or below the lowest point."""
    if len(cloud) == 0:
        raise EmptyInput("Cannot build a height histogram of an empty cloud")
    if bin_h <= 0:
        msg = "bin_h must be positive"
        raise ValueError(msg)
    z = cloud.z
    origin = math.floor(float(z.min()) / bin_h) * bin_h
    idx = np.floor((z - origin) / bin_h).astype(np.int64)
    # Snapping the origin can leave the lowest point a rounding error below bin 0.
    np.clip(idx, 0, None, out=idx)
    return HeightHistogram(bin_size=bin_h, origin_z=origin, counts=np.bincount(idx))


def find_peaks(hist: HeightHistogram, delta_f: float, p_h: float) -> list[Peak]:
    """Local maxima within +-delta_f meters whose height exceeds p_h of the tallest bin.

    Within a window, equal counts resolve toward the lower bin index.
    """
    if not 0.0 < p_h < 1.0:
        msg = f"p_h must lie in (0, 1), got {p_h}"
        raise ValueError(msg)
    if delta_f <= 0:
        msg = "delta_f must be positive"
        raise ValueError(msg)
    counts = hist.counts
    h_max = int(counts.max())
    if h_max == 0:
        raise NoPeaks("Height histogram is all zeros")

    radius = int(math.floor(delta_f / hist.bin_size + 1e-9))
    if radius == 0:
        is_peak = counts > 0
    else:
        windows = sliding_window_view(np.pad(counts, radius), 2 * radius + 1)
        left = windows[:, :radius].max(axis=1)
        right = windows[:, radius + 1 :].max(axis=1)
        is_peak = (counts > 0) & (counts > left) & (counts >= right)

    keep = is_peak & (counts > p_h * h_max)
    return [
        Peak(bin_index=int(i), height=int(counts[i]), z_center=hist.bin_center(int(i))) for i in np.flatnonzero(keep)
    ]
