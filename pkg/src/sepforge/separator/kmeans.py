"""Seeded Lloyd k-means over embedding vectors (inference only).

Initialization picks the first k pairwise-distinct points of a seeded
permutation. A cluster that empties during an update is re-seeded with the
point farthest from its assigned center. Ties everywhere resolve to the
lowest index, so the result is a pure function of (points, k, iters, seed).
"""

from __future__ import annotations

import numpy as np


def _pairwise_sq_dists(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    # (P, k) squared distances
    return ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=-1)


def kmeans_embed(points: np.ndarray, k: int, iters: int = 25, seed: int = 0):
    """Cluster points (P, D) into k groups.

    Returns:
        (centers, labels): centers (k, D), labels (P,) of int cluster ids.

    Raises:
        ValueError: fewer than k pairwise-distinct points.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2:
        raise ValueError(f"points must be (P, D), got shape {points.shape}")
    p = points.shape[0]
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    rng = np.random.default_rng(seed)
    order = rng.permutation(p)
    chosen: list[int] = []
    for idx in order:
        if all(not np.array_equal(points[idx], points[c]) for c in chosen):
            chosen.append(int(idx))
            if len(chosen) == k:
                break
    if len(chosen) < k:
        raise ValueError(f"need {k} pairwise-distinct points, found only {len(chosen)}")
    centers = points[chosen].copy()

    labels = None
    for _ in range(max(1, iters)):
        d2 = _pairwise_sq_dists(points, centers)
        new_labels = np.argmin(d2, axis=1)
        assigned_d2 = d2[np.arange(p), new_labels]
        for j in range(k):
            members = new_labels == j
            if members.any():
                centers[j] = points[members].mean(axis=0)
            else:
                far = int(np.argmax(assigned_d2))
                centers[j] = points[far]
                new_labels[far] = j
                assigned_d2[far] = 0.0
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
    return centers, labels
