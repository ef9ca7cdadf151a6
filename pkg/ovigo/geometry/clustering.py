from __future__ import annotations

from collections.abc import Sequence

import numpy as np
from sklearn.cluster import DBSCAN

from ovigo.models.geometry import FloatArray, IntArray


def dbscan(values: FloatArray | Sequence[float], eps: float, min_pts: int) -> IntArray:
    """Density clustering; noise is labelled -1.

    Neighborhoods are closed balls (distance <= eps) and count the point itself.
    Clusters are numbered in the order their first core point appears.
    """
    if eps <= 0:
        msg = "eps must be positive"
        raise ValueError(msg)
    if min_pts < 1:
        msg = "min_pts must be at least 1"
        raise ValueError(msg)
    data = np.asarray(values, dtype=np.float64)
    if data.ndim == 1:
        data = data.reshape(-1, 1)
    if data.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    return DBSCAN(eps=eps, min_samples=min_pts).fit(data).labels_.astype(np.int64)
