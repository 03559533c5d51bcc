"""Agglomerative merging of clusters whose centroids are within a Manhattan threshold."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import EmptyInput

# Largest possible L1 distance between two 8-bit RGB colors.
MAX_RGB_MANHATTAN = 3 * 255


@dataclass(eq=False)
class Cluster:
    centroid: np.ndarray  # (3,) float64
    size: int
    members: np.ndarray = field(repr=False)  # flat pixel indices

    def __post_init__(self):
        self.centroid = np.asarray(self.centroid, dtype=np.float64).reshape(3)
        self.members = np.asarray(self.members, dtype=np.int64).reshape(-1)
        if self.size != len(self.members):
            raise ValueError("cluster size must equal member count")

    @classmethod
    def from_members(cls, features: np.ndarray, members) -> "Cluster":
        members = np.asarray(members, dtype=np.int64)
        return cls(features[members].mean(axis=0), len(members), members)


@dataclass(eq=False)
class MergeResult:
    clusters: list[Cluster]
    merge_log: list[tuple[int, int, float]]

    @property
    def k(self) -> int:
        return len(self.clusters)

    @property
    def centroids(self) -> np.ndarray:
        return np.array([c.centroid for c in self.clusters]).reshape(-1, 3)


def _l1(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # fixed channel order so every caller gets bit-identical sums
    d = np.abs(a - b)
    return d[..., 0] + d[..., 1] + d[..., 2]


def manhattan(a, b) -> float:
    return float(_l1(np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)))


def merge_pair(a: Cluster, b: Cluster) -> Cluster:
    """Union of two clusters; centroid is the size-weighted mean of the two centroids."""
    n = a.size + b.size
    centroid = (a.size / n) * a.centroid + (b.size / n) * b.centroid
    return Cluster(centroid, n, np.concatenate([a.members, b.members]))


def merge_proximal_clusters(clusters, epsilon: float) -> MergeResult:
    """Repeatedly merge the globally closest centroid pair while its distance is below ``epsilon``.

    Ties go to the lexicographically smallest ``(i, j)``. The merged cluster
    takes the lower index and later entries shift down by one, so
    ``merge_log`` indices refer to the list as it was at that step.
    """
    clusters = list(clusters)
    if not clusters:
        raise EmptyInput("no clusters to merge")
    if epsilon < 0:
        raise ValueError("epsilon must be >= 0")
    if len(clusters) == 1:
        return MergeResult(clusters, [])

    cents = np.array([c.centroid for c in clusters], dtype=np.float64).reshape(-1, 3)
    sizes = np.array([c.size for c in clusters], dtype=np.int64)
    slot_i, slot_j, pos_i, pos_j, dist = _greedy_merge(cents, sizes, float(epsilon))

    # replay the merges on member lists; concatenation order matches merge_pair
    parts = [[c.members] for c in clusters]
    for a, b in zip(slot_i.tolist(), slot_j.tolist()):
        parts[a].extend(parts[b])
        parts[b] = None
    merged_away = set(slot_j.tolist())
    out = []
    for s, c in enumerate(clusters):
        if s in merged_away:
            continue
        if len(parts[s]) == 1:
            out.append(c)
        else:
            out.append(Cluster(cents[s].copy(), int(sizes[s]), np.concatenate(parts[s])))
    log = [(int(a), int(b), float(d)) for a, b, d in zip(pos_i, pos_j, dist)]
    return MergeResult(out, log)


@njit(cache=True)
def _l1_at(cents, a, b):
    return (abs(cents[a, 0] - cents[b, 0]) + abs(cents[a, 1] - cents[b, 1])) + abs(cents[a, 2] - cents[b, 2])


@njit(cache=True)
def _nearest_later(cents, active, r):
    best, arg = np.inf, -1
    for c in range(r + 1, cents.shape[0]):
        if active[c]:
            d = _l1_at(cents, r, c)
            if d < best:
                best, arg = d, c
    return best, arg


@njit(cache=True)
def _greedy_merge(cents, sizes, epsilon):
    """Greedy closest-pair merging in place on ``cents``/``sizes``.

    Slots never move, so the lexicographically smallest slot pair is also the
    smallest pair of list positions. Each row caches its nearest later
    neighbour and is rescanned only when that neighbour took part in a merge.
    """
    n = cents.shape[0]
    active = np.ones(n, dtype=np.bool_)
    row_min = np.full(n, np.inf)
    row_arg = np.full(n, -1, dtype=np.int64)
    for r in range(n - 1):
        row_min[r], row_arg[r] = _nearest_later(cents, active, r)
    slot_i = np.empty(n, dtype=np.int64)
    slot_j = np.empty(n, dtype=np.int64)
    pos_i = np.empty(n, dtype=np.int64)
    pos_j = np.empty(n, dtype=np.int64)
    dist = np.empty(n, dtype=np.float64)
    steps = 0
    while True:
        i, d = -1, np.inf
        for r in range(n):
            if row_min[r] < d:
                i, d = r, row_min[r]
        if i < 0 or not d < epsilon:
            break
        j = row_arg[i]
        before_i = 0
        for r in range(i):
            before_i += active[r]
        before_j = before_i
        for r in range(i, j):
            before_j += active[r]
        slot_i[steps], slot_j[steps] = i, j
        pos_i[steps], pos_j[steps], dist[steps] = before_i, before_j, d
        steps += 1

        total = sizes[i] + sizes[j]
        wa, wb = sizes[i] / total, sizes[j] / total
        for ch in range(3):
            cents[i, ch] = wa * cents[i, ch] + wb * cents[j, ch]
        sizes[i] = total
        active[j] = False
        row_min[j], row_arg[j] = np.inf, -1

        for r in range(j):
            if not active[r]:
                continue
            if r == i or row_arg[r] == i or row_arg[r] == j:
                row_min[r], row_arg[r] = _nearest_later(cents, active, r)
            elif r < i:
                dr = _l1_at(cents, r, i)
                if dr < row_min[r] or (dr == row_min[r] and i < row_arg[r]):
                    row_min[r], row_arg[r] = dr, i
    return slot_i[:steps], slot_j[:steps], pos_i[:steps], pos_j[:steps], dist[:steps]
