"""Lloyd K-means over all pixels, seeded with the merged centroids."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from .errors import InvalidK
from .raster_io import Image


@dataclass(frozen=True)
class KmeansConfig:
    max_iterations: int = 100
    tolerance: float = 1e-3  # max per-centroid L1 movement counted as converged

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.tolerance < 0:
            raise ValueError("tolerance must be >= 0")


@dataclass(eq=False)
class Segmentation:
    width: int
    height: int
    labels: np.ndarray = field(repr=False)  # flat, row-major
    centroids: np.ndarray = field(repr=False)  # (k, 3)
    iterations_used: int = 0
    final_sse: float = 0.0
    sse_history: list[float] = field(default_factory=list, repr=False)

    @property
    def k(self) -> int:
        return len(self.centroids)

    def label_grid(self) -> np.ndarray:
        return self.labels.reshape(self.height, self.width)


def nearest_centroid(features: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """Index of the squared-Euclidean-nearest centroid; lowest index wins ties."""
    return np.argmin(cdist(features, centroids, "sqeuclidean"), axis=1)


def cluster_means(features: np.ndarray, labels: np.ndarray, k: int, weights=None) -> tuple[np.ndarray, np.ndarray]:
    counts = np.bincount(labels, weights=weights, minlength=k)
    w = 1.0 if weights is None else weights
    sums = np.stack([np.bincount(labels, weights=features[:, ch] * w, minlength=k) for ch in range(3)], axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        return sums / counts[:, None], counts


def sse(features: np.ndarray, labels: np.ndarray, centroids: np.ndarray, weights=None) -> float:
    d = ((features - centroids[labels]) ** 2).sum(axis=1)
    return float(d.sum() if weights is None else (d * weights).sum())


def unique_colors(image: Image) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Distinct colors (sorted), their pixel counts, and each pixel's index into them."""
    px = image.pixels.reshape(-1, 3).astype(np.int64)
    key = (px[:, 0] << 16) | (px[:, 1] << 8) | px[:, 2]
    ukey, inverse, counts = np.unique(key, return_inverse=True, return_counts=True)
    colors = np.stack([(ukey >> 16) & 255, (ukey >> 8) & 255, ukey & 255], axis=1).astype(np.float64)
    return colors, counts.astype(np.float64), inverse.reshape(-1)


def segmentation_from_labels(image: Image, labels) -> Segmentation:
    """Wrap an external label map; centroids are the member means, empty labels dropped."""
    feats = image.features()
    labels = np.asarray(labels, dtype=np.int64).reshape(-1)
    if labels.size != image.n_pixels:
        raise ValueError("label map size does not match the image")
    if labels.min() < 0:
        raise ValueError("labels must be non-negative")
    used, compact = np.unique(labels, return_inverse=True)
    cents, _ = cluster_means(feats, compact, len(used))
    return Segmentation(image.width, image.height, compact.astype(np.int64), cents, 0, sse(feats, compact, cents))


def kmeans(image: Image, k: int, init_centroids, config: KmeansConfig | None = None) -> Segmentation:
    """Lloyd iterations until every centroid moves less than ``tolerance`` (L1).

    Clusters that lose all their pixels are dropped and the labels compacted,
    so the returned ``k`` can be smaller than the requested one.
    ``sse_history[t]`` is the SSE after the update step of iteration ``t + 1``.
    """
    config = config or KmeansConfig()
    cents = np.asarray(init_centroids, dtype=np.float64).reshape(-1, 3)
    if k < 1 or k != len(cents):
        raise InvalidK(f"k={k} does not match {len(cents)} initial centroids")
    # Identical pixels always share a label, so iterate over distinct colors
    # weighted by multiplicity. Channel sums are integers, hence exact.
    colors, weights, inverse = unique_colors(image)
    history: list[float] = []
    it = 0
    for it in range(1, config.max_iterations + 1):
        labels = nearest_centroid(colors, cents)
        counts = np.bincount(labels, minlength=len(cents))
        if (counts == 0).any():
            keep = np.nonzero(counts)[0]
            remap = np.full(len(cents), -1, dtype=np.int64)
            remap[keep] = np.arange(len(keep))
            labels = remap[labels]
            cents = cents[keep]
        new, _ = cluster_means(colors, labels, len(cents), weights)
        shift = np.abs(new - cents).sum(axis=1).max()
        cents = new
        history.append(sse(colors, labels, cents, weights))
        if shift < config.tolerance:
            break
    return Segmentation(image.width, image.height, labels[inverse], cents, it, history[-1], history)
