"""Slow, obviously-correct reference implementations the fast kernels are checked against."""

from __future__ import annotations

import heapq
import math

import numpy as np


def naive_dbscan(points: np.ndarray, eps: float, min_pts: int) -> np.ndarray:
    """Textbook DBSCAN: clusters grow from core points in index order, borders join the first cluster to reach them."""
    n = points.shape[0]
    dist = np.sqrt(((points[:, None, :] - points[None, :, :]) ** 2).sum(axis=2))
    neighbors = [np.flatnonzero(dist[i] <= eps) for i in range(n)]
    core = np.array([len(nb) >= min_pts for nb in neighbors])
    labels = np.full(n, -1, dtype=np.int64)
    cluster = 0
    for i in range(n):
        if labels[i] != -1 or not core[i]:
            continue
        stack = [i]
        while stack:
            p = stack.pop()
            if labels[p] != -1:
                continue
            labels[p] = cluster
            if core[p]:
                stack.extend(int(q) for q in neighbors[p] if labels[q] == -1)
        cluster += 1
    return labels


def brute_edf(mask: np.ndarray) -> np.ndarray:
    walls = np.argwhere(mask)
    out = np.zeros(mask.shape, dtype=np.float64)
    for r in range(mask.shape[0]):
        for c in range(mask.shape[1]):
            if mask[r, c]:
                continue
            out[r, c] = math.sqrt(float(((walls - (r, c)) ** 2).sum(axis=1).min()))
    return out


def exhaustive_otsu(values: np.ndarray, nbins: int = 256) -> float:
    """Threshold (bin center) maximizing between-class variance over a fixed histogram."""
    counts, edges = np.histogram(values.ravel(), bins=nbins)
    centers = (edges[:-1] + edges[1:]) / 2
    best, best_t = -1.0, float(centers[0])
    total = counts.sum()
    for k in range(nbins - 1):
        w0 = counts[: k + 1].sum()
        w1 = total - w0
        if w0 == 0 or w1 == 0:
            continue
        m0 = (counts[: k + 1] * centers[: k + 1]).sum() / w0
        m1 = (counts[k + 1 :] * centers[k + 1 :]).sum() / w1
        var = w0 * w1 * (m0 - m1) ** 2
        if var > best:
            best, best_t = var, float(centers[k])
    return best_t


def priority_flood(depth: np.ndarray, markers: np.ndarray, barrier: np.ndarray) -> np.ndarray:
    """4-connected flooding from markers, lowest elevation first, first label to arrive wins."""
    labels = markers.copy()
    heap: list[tuple[float, int, int, int]] = []
    age = 0
    for r, c in np.argwhere(markers > 0):
        heapq.heappush(heap, (float(depth[r, c]), age, int(r), int(c)))
        age += 1
    h, w = depth.shape
    while heap:
        _, _, r, c = heapq.heappop(heap)
        for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
            nr, nc = r + dr, c + dc
            if 0 <= nr < h and 0 <= nc < w and labels[nr, nc] == 0 and not barrier[nr, nc]:
                labels[nr, nc] = labels[r, c]
                heapq.heappush(heap, (float(depth[nr, nc]), age, nr, nc))
                age += 1
    return labels


def relation_oracle(
    target: tuple[float, float], anchor: tuple[float, float], viewpoint: tuple[float, float]
) -> str | None:
    """Horizontal label by projecting anchor->target onto the viewer->anchor axis and its left normal.

    Beyond the anchor is front, between viewer and anchor is back; a label holds
    only when its component strictly dominates the other one.
    """
    fx, fy = anchor[0] - viewpoint[0], anchor[1] - viewpoint[1]
    norm = math.hypot(fx, fy)
    fx, fy = fx / norm, fy / norm
    dx, dy = target[0] - anchor[0], target[1] - anchor[1]
    along = dx * fx + dy * fy
    across = -dx * fy + dy * fx
    if abs(across) < along:
        return "front"
    if abs(across) < -along:
        return "back"
    if abs(along) < across:
        return "left"
    if abs(along) < -across:
        return "right"
    return None
