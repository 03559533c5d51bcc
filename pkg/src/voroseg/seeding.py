"""Corner-based generating points for the spatial tessellation."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import ImageTooSmall
from .raster_io import Image

HARRIS_K = 0.04

# (x, y) integer coordinates, column then row
Seed = tuple[int, int]


@dataclass(frozen=True)
class SeedConfig:
    max_corners: int = 50
    quality_ratio: float = 0.01
    min_distance: float = 10
    grid_fallback_n: int = 16

    def __post_init__(self):
        if self.max_corners < 1:
            raise ValueError("max_corners must be >= 1")
        if self.min_distance < 1:
            raise ValueError("min_distance must be >= 1")
        if not 0 < self.quality_ratio <= 1:
            raise ValueError("quality_ratio must lie in (0, 1]")
        if self.grid_fallback_n < 1:
            raise ValueError("grid_fallback_n must be >= 1")


def to_grayscale(image: Image) -> np.ndarray:
    """Luma as an ``(h, w)`` float64 field; not rounded."""
    px = image.pixels.astype(np.float64)
    return 0.299 * px[..., 0] + 0.587 * px[..., 1] + 0.114 * px[..., 2]


def harris_response(field: np.ndarray, k: float = HARRIS_K) -> np.ndarray:
    """Harris response from 3x3 Sobel gradients summed over a 3x3 box window.

    Borders use scipy's ``reflect`` mode (the edge sample is repeated).
    """
    f = np.asarray(field, dtype=np.float64)
    gx = ndimage.sobel(f, axis=1, mode="reflect")
    gy = ndimage.sobel(f, axis=0, mode="reflect")
    # box sums rather than means; the quality threshold is relative so the scale is irrelevant
    sxx = ndimage.uniform_filter(gx * gx, size=3, mode="reflect") * 9.0
    syy = ndimage.uniform_filter(gy * gy, size=3, mode="reflect") * 9.0
    sxy = ndimage.uniform_filter(gx * gy, size=3, mode="reflect") * 9.0
    return sxx * syy - sxy * sxy - k * (sxx + syy) ** 2


def detect_corners(field: np.ndarray, config: SeedConfig | None = None) -> list[Seed]:
    """Strongest Harris corners, greedily thinned to ``min_distance`` apart.

    Ordered by descending response, ties by row-major position.
    """
    config = config or SeedConfig()
    f = np.asarray(field, dtype=np.float64)
    if f.ndim != 2 or f.shape[0] < 3 or f.shape[1] < 3:
        raise ImageTooSmall(f"corner detection needs at least 3x3, got {f.shape}")
    resp = harris_response(f)
    top = float(resp.max())
    if not top > 0:
        return []
    thresh = config.quality_ratio * top
    ys, xs = np.nonzero(resp >= thresh)
    vals = resp[ys, xs]
    order = np.lexsort((xs, ys, -vals))
    min_d2 = config.min_distance**2
    kept: list[Seed] = []
    kept_xy = np.empty((0, 2), dtype=np.float64)
    for idx in order:
        x, y = int(xs[idx]), int(ys[idx])
        if len(kept):
            d2 = (kept_xy[:, 0] - x) ** 2 + (kept_xy[:, 1] - y) ** 2
            if np.any(d2 < min_d2):
                continue
        kept.append((x, y))
        kept_xy = np.vstack([kept_xy, [x, y]])
        if len(kept) == config.max_corners:
            break
    return kept


def fallback_grid_seeds(width: int, height: int, n: int) -> list[Seed]:
    """Cell centers of a ceil(sqrt(n))-square grid, row-major, truncated to ``n``.

    On images narrower than the grid some centers coincide; duplicates are
    dropped, so fewer than ``n`` seeds may come back.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    g = math.ceil(math.sqrt(n))
    seeds: list[Seed] = []
    seen = set()
    for r in range(g):
        y = min(height - 1, int((r + 0.5) * height / g))
        for c in range(g):
            x = min(width - 1, int((c + 0.5) * width / g))
            if (x, y) not in seen:
                seen.add((x, y))
                seeds.append((x, y))
    return seeds[:n]


def find_seeds(image: Image, config: SeedConfig | None = None) -> tuple[list[Seed], bool]:
    """Corners of ``image``, or the fallback grid when fewer than two are found.

    Returns ``(seeds, used_fallback)``.
    """
    config = config or SeedConfig()
    seeds = detect_corners(to_grayscale(image), config)
    if len(seeds) >= 2:
        return seeds, False
    return fallback_grid_seeds(image.width, image.height, config.grid_fallback_n), True
