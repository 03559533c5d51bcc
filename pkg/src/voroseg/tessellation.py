"""Nearest-seed (Voronoi) assignment of every pixel."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptySeedSet


@dataclass(eq=False)
class VoronoiMap:
    width: int
    height: int
    region_of: np.ndarray = field(repr=False)  # flat, row-major, int64
    region_count: int

    def regions(self) -> list[np.ndarray]:
        """Flat pixel indices of each region, in region order (ascending within each)."""
        order = np.argsort(self.region_of, kind="stable")
        counts = np.bincount(self.region_of, minlength=self.region_count)
        return np.split(order, np.cumsum(counts)[:-1])


def assign_voronoi(width: int, height: int, seeds) -> VoronoiMap:
    """Label each pixel with the index of its nearest seed.

    Distances are squared Euclidean in integer arithmetic, so ties are exact
    and resolve to the lowest seed index.
    """
    if len(seeds) == 0:
        raise EmptySeedSet("at least one seed is required")
    pts = np.asarray(seeds, dtype=np.int64).reshape(-1, 2)
    if (pts[:, 0] < 0).any() or (pts[:, 0] >= width).any() or (pts[:, 1] < 0).any() or (pts[:, 1] >= height).any():
        raise ValueError("seed outside image bounds")
    xs = np.arange(width, dtype=np.int64)[None, :]
    ys = np.arange(height, dtype=np.int64)[:, None]
    best = (xs - pts[0, 0]) ** 2 + (ys - pts[0, 1]) ** 2
    label = np.zeros((height, width), dtype=np.int64)
    for i in range(1, len(pts)):
        d2 = (xs - pts[i, 0]) ** 2 + (ys - pts[i, 1]) ** 2
        closer = d2 < best  # strict: earlier seed keeps ties
        best = np.where(closer, d2, best)
        label[closer] = i
    return VoronoiMap(width, height, label.reshape(-1), len(pts))
