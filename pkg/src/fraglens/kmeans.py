"""Seeded KMeans for grouping base-cluster label embeddings.

Initialization is greedy-spread: the seed picks the first centroid, each
subsequent centroid is the point farthest from its nearest chosen centroid
(ties broken by lowest index). Lloyd iterations run to convergence.
"""

from __future__ import annotations

import numpy as np

CONVERGENCE_TOL = 1e-6
MAX_ITERATIONS = 100


def _greedy_spread_init(data: np.ndarray, k: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    n = data.shape[0]
    chosen = [int(rng.integers(0, n))]
    min_dist = np.linalg.norm(data - data[chosen[0]], axis=1)
    while len(chosen) < k:
        nxt = int(np.argmax(min_dist))
        chosen.append(nxt)
        min_dist = np.minimum(min_dist, np.linalg.norm(data - data[nxt], axis=1))
    return data[chosen].copy()


def _as_matrix(vectors) -> np.ndarray:
    if isinstance(vectors, np.ndarray):
        return np.asarray(vectors, dtype=np.float64)
    if len(vectors) and hasattr(vectors[0], "values"):
        return np.asarray([v.values for v in vectors], dtype=np.float64)
    return np.asarray(vectors, dtype=np.float64)


def kmeans_cluster(vectors, k: int, seed: int = 0) -> np.ndarray:
    """Assign every vector to one of k clusters; returns integer labels."""
    data = _as_matrix(vectors)
    n = data.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must be in 1..{n}, got {k}")
    if k == 1:
        return np.zeros(n, dtype=np.int64)

    centroids = _greedy_spread_init(data, k, seed)
    labels = np.zeros(n, dtype=np.int64)
    for _ in range(MAX_ITERATIONS):
        dist = np.linalg.norm(data[:, None, :] - centroids[None, :, :], axis=2)
        labels = np.argmin(dist, axis=1)
        new_centroids = centroids.copy()
        for j in range(k):
            mask = labels == j
            if mask.any():
                new_centroids[j] = data[mask].mean(axis=0)
            else:
                # re-seat an empty cluster on the point farthest from its centroid
                spread = dist[np.arange(n), labels]
                new_centroids[j] = data[int(np.argmax(spread))]
        shift = float(np.linalg.norm(new_centroids - centroids))
        centroids = new_centroids
        if shift < CONVERGENCE_TOL:
            break
    dist = np.linalg.norm(data[:, None, :] - centroids[None, :, :], axis=2)
    return np.argmin(dist, axis=1).astype(np.int64)


def within_cluster_cost(vectors, labels: np.ndarray) -> float:
    """Total squared distance to cluster means (used by tests as an oracle hook)."""
    data = _as_matrix(vectors)
    cost = 0.0
    for j in np.unique(labels):
        member = data[labels == j]
        cost += float(((member - member.mean(axis=0)) ** 2).sum())
    return cost
