"""Density-based clustering of 2D map points (HDBSCAN, implemented here).

Stages: core distances, mutual reachability, minimum spanning tree (Prim),
single-linkage dendrogram, condensed cluster tree at min_cluster_size, and
stability-based flat extraction (excess of mass, no single-cluster mode).
Points left out of every selected cluster form the noise set.

Everything is exact and single-threaded; inputs are desk-scale (hundreds to
low thousands of points).
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, slots=True)
class FlatClustering:
    """Cluster memberships as lists of point indices, plus the noise set."""

    clusters: tuple[tuple[int, ...], ...]
    noise: tuple[int, ...]

    @property
    def labels(self) -> np.ndarray:
        n = sum(len(c) for c in self.clusters) + len(self.noise)
        out = np.full(n, -1, dtype=np.int64)
        for label, members in enumerate(self.clusters):
            out[list(members)] = label
        return out


def default_min_cluster_size(n_points: int) -> int:
    """Scales with dataset size but keeps small demos clusterable."""
    return max(5, round(0.02 * n_points))


def _core_distances(dist: np.ndarray, min_samples: int) -> np.ndarray:
    # distance to the min_samples-th nearest neighbor, self included
    k = min(min_samples, dist.shape[0]) - 1
    part = np.sort(dist, axis=1)
    return part[:, k]


def _mutual_reachability(dist: np.ndarray, core: np.ndarray) -> np.ndarray:
    return np.maximum(np.maximum(core[:, None], core[None, :]), dist)


def _prim_mst(graph: np.ndarray) -> np.ndarray:
    """Edges (u, v, weight) of the minimum spanning tree of a dense graph."""
    n = graph.shape[0]
    in_tree = np.zeros(n, dtype=bool)
    best_dist = np.full(n, np.inf)
    best_from = np.zeros(n, dtype=np.int64)
    edges = np.zeros((n - 1, 3))
    current = 0
    in_tree[0] = True
    for i in range(n - 1):
        cand = graph[current]
        improve = ~in_tree & (cand < best_dist)
        best_dist[improve] = cand[improve]
        best_from[improve] = current
        masked = np.where(in_tree, np.inf, best_dist)
        nxt = int(np.argmin(masked))
        edges[i] = (best_from[nxt], nxt, best_dist[nxt])
        in_tree[nxt] = True
        current = nxt
    return edges


class _UnionFind:
    def __init__(self, n: int) -> None:
        self.parent = list(range(2 * n - 1))
        self.size = [1] * n + [0] * (n - 1)
        self.next_label = n

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> int:
        label = self.next_label
        self.next_label += 1
        self.parent[a] = label
        self.parent[b] = label
        self.size[label] = self.size[a] + self.size[b]
        return label


def _single_linkage(mst_edges: np.ndarray, n: int) -> np.ndarray:
    """Dendrogram rows [left, right, distance, size]; new node i gets id n+i."""
    order = np.argsort(mst_edges[:, 2], kind="stable")
    edges = mst_edges[order]
    uf = _UnionFind(n)
    tree = np.zeros((n - 1, 4))
    for i in range(n - 1):
        a, b, dist = int(edges[i, 0]), int(edges[i, 1]), edges[i, 2]
        ra, rb = uf.find(a), uf.find(b)
        tree[i] = (ra, rb, dist, uf.size[ra] + uf.size[rb])
        uf.union(ra, rb)
    return tree


def _bfs(tree: np.ndarray, n: int, start: int) -> list[int]:
    out = []
    queue = [start]
    while queue:
        node = queue.pop(0)
        out.append(node)
        if node >= n:
            row = tree[node - n]
            queue.append(int(row[0]))
            queue.append(int(row[1]))
    return out


def condense_tree(tree: np.ndarray, n: int, min_cluster_size: int) -> list[tuple[int, int, float, int]]:
    """Rows (parent, child, lambda, child_size).

    Children with id < n are points detaching from their cluster at lambda;
    larger children are newly born clusters. Cluster ids start at n (root).
    """
    root = 2 * n - 2
    relabel = {root: n}
    next_label = n + 1
    ignore = set()
    rows: list[tuple[int, int, float, int]] = []

    for node in _bfs(tree, n, root):
        if node in ignore or node < n:
            continue
        left, right, dist = int(tree[node - n][0]), int(tree[node - n][1]), tree[node - n][2]
        lam = 1.0 / dist if dist > 0.0 else np.inf
        left_count = int(tree[left - n][3]) if left >= n else 1
        right_count = int(tree[right - n][3]) if right >= n else 1
        parent = relabel[node]

        if left_count >= min_cluster_size and right_count >= min_cluster_size:
            relabel[left] = next_label
            next_label += 1
            rows.append((parent, relabel[left], lam, left_count))
            relabel[right] = next_label
            next_label += 1
            rows.append((parent, relabel[right], lam, right_count))
        elif left_count < min_cluster_size and right_count < min_cluster_size:
            for sub in _bfs(tree, n, left):
                if sub < n:
                    rows.append((parent, sub, lam, 1))
                ignore.add(sub)
            for sub in _bfs(tree, n, right):
                if sub < n:
                    rows.append((parent, sub, lam, 1))
                ignore.add(sub)
        elif left_count < min_cluster_size:
            relabel[right] = parent
            for sub in _bfs(tree, n, left):
                if sub < n:
                    rows.append((parent, sub, lam, 1))
                ignore.add(sub)
        else:
            relabel[left] = parent
            for sub in _bfs(tree, n, right):
                if sub < n:
                    rows.append((parent, sub, lam, 1))
                ignore.add(sub)
    return rows


def _compute_stability(condensed: list[tuple[int, int, float, int]], n: int) -> dict[int, float]:
    births: dict[int, float] = {n: 0.0}
    for parent, child, lam, _ in condensed:
        if child >= n:
            births[child] = lam
    stability: dict[int, float] = {c: 0.0 for c in births}
    for parent, child, lam, size in condensed:
        stability[parent] += (lam - births[parent]) * size
    return stability


def _select_clusters(
    condensed: list[tuple[int, int, float, int]], stability: dict[int, float], n: int
) -> set[int]:
    cluster_children: dict[int, list[int]] = defaultdict(list)
    for parent, child, _, size in condensed:
        if child >= n:
            cluster_children[parent].append(child)

    def descendants(node: int) -> list[int]:
        out, queue = [], list(cluster_children.get(node, []))
        while queue:
            c = queue.pop(0)
            out.append(c)
            queue.extend(cluster_children.get(c, []))
        return out

    node_list = sorted(stability.keys(), reverse=True)[:-1]  # root excluded
    stab = dict(stability)
    is_cluster = {c: True for c in node_list}
    for node in node_list:
        children = cluster_children.get(node, [])
        subtree = sum(stab[c] for c in children)
        if children and subtree > stab[node]:
            is_cluster[node] = False
            stab[node] = subtree
        else:
            for sub in descendants(node):
                is_cluster[sub] = False
    return {c for c, keep in is_cluster.items() if keep}


def hdbscan_cluster(
    points: np.ndarray, min_cluster_size: int | None = None, *, min_samples: int | None = None
) -> FlatClustering:
    """Cluster 2D points by density; unassigned points land in the noise set.

    min_cluster_size defaults to max(5, 2% of n); min_samples defaults to
    min_cluster_size.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2:
        raise ValueError("points must be a 2D array")
    n = pts.shape[0]
    if min_cluster_size is None:
        min_cluster_size = default_min_cluster_size(n)
    if min_cluster_size < 2:
        raise ValueError("min_cluster_size must be >= 2")
    if n < min_cluster_size:
        raise ValueError(f"need at least min_cluster_size={min_cluster_size} points, got {n}")
    if not np.all(np.isfinite(pts)):
        raise ValueError("points contain non-finite coordinates")
    if min_samples is None:
        min_samples = min_cluster_size

    diff = pts[:, None, :] - pts[None, :, :]
    dist = np.sqrt((diff**2).sum(axis=2))
    core = _core_distances(dist, min_samples)
    mreach = _mutual_reachability(dist, core)
    mst = _prim_mst(mreach)
    slt = _single_linkage(mst, n)
    condensed = condense_tree(slt, n, min_cluster_size)
    stability = _compute_stability(condensed, n)
    selected = _select_clusters(condensed, stability, n)

    parent_of: dict[int, int] = {}
    for parent, child, _, _ in condensed:
        if child >= n:
            parent_of[child] = parent

    def owning_cluster(cluster: int) -> int | None:
        node = cluster
        while node is not None:
            if node in selected:
                return node
            node = parent_of.get(node)
        return None

    members: dict[int, list[int]] = defaultdict(list)
    noise: list[int] = []
    for parent, child, _, _ in condensed:
        if child >= n:
            continue
        owner = owning_cluster(parent)
        if owner is None:
            noise.append(child)
        else:
            members[owner].append(child)

    ordered = sorted(members.keys())
    clusters = tuple(tuple(sorted(members[c])) for c in ordered)
    return FlatClustering(clusters=clusters, noise=tuple(sorted(noise)))
