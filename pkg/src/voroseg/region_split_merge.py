"""Histogram-driven cluster discovery inside one Voronoi region.

Each color channel's histogram is smoothed, its significant peaks located,
and the minima between adjacent peaks taken as cut points. The per-channel
intervals form a grid of color cells; occupied cells become clusters, which
are then merged while any two centroids are closer than ``epsilon`` (L1).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import EmptyInput
from .proximal_merge import Cluster, merge_proximal_clusters

N_BINS = 256
CHANNELS = {"R": 0, "G": 1, "B": 2}


@dataclass(frozen=True)
class RsmConfig:
    span: int = 5
    peak_min_ratio: float = 0.05
    min_region_pixels: int = 16
    epsilon: float = 71.0

    def __post_init__(self):
        if self.span < 1 or self.span % 2 == 0:
            raise ValueError("span must be odd and >= 1")
        if not 0 < self.peak_min_ratio <= 1:
            raise ValueError("peak_min_ratio must lie in (0, 1]")
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")


def _channel_index(channel) -> int:
    if isinstance(channel, str):
        return CHANNELS[channel.upper()]
    return int(channel)


def _to_bins(values: np.ndarray) -> np.ndarray:
    return np.clip(np.floor(values + 0.5), 0, N_BINS - 1).astype(np.int64)


def channel_histogram(pixels, channel) -> np.ndarray:
    """256-bin count histogram of one channel (values rounded half up)."""
    px = np.asarray(pixels, dtype=np.float64).reshape(-1, 3)
    if len(px) == 0:
        raise EmptyInput("histogram of an empty pixel set")
    bins = _to_bins(px[:, _channel_index(channel)])
    return np.bincount(bins, minlength=N_BINS).astype(np.float64)


def smooth_histogram(h, span: int = 5) -> np.ndarray:
    """Centered moving average; the window shrinks at the ends instead of padding."""
    if span % 2 == 0:
        raise ValueError("span must be odd")
    h = np.asarray(h, dtype=np.float64)
    window = np.ones(span)
    sums = np.convolve(h, window, mode="same")
    counts = np.convolve(np.ones(len(h)), window, mode="same")
    return sums / counts


def find_peaks(h, config: RsmConfig | None = None) -> list[int]:
    """Bins where the forward difference turns from positive to non-positive.

    The end bins have only one neighbour and are never peaks. Peaks lower
    than ``peak_min_ratio`` of the tallest bin are discarded.
    """
    config = config or RsmConfig()
    h = np.asarray(h, dtype=np.float64)
    if len(h) < 3:
        return []
    d = np.diff(h)
    cand = np.nonzero((d[:-1] > 0) & (d[1:] <= 0))[0] + 1
    floor = config.peak_min_ratio * h.max()
    return [int(i) for i in cand if h[i] >= floor]


def find_valleys(h, peaks) -> list[int]:
    """Lowest bin strictly between each pair of adjacent peaks (first one on ties)."""
    h = np.asarray(h, dtype=np.float64)
    out = []
    for a, b in zip(peaks[:-1], peaks[1:]):
        if b - a < 2:
            continue
        out.append(int(a + 1 + np.argmin(h[a + 1 : b])))
    return out


def channel_cuts(h, config: RsmConfig) -> list[int]:
    """Cut points for one raw channel histogram.

    Peak search runs on the smoothed histogram with an empty bin on either
    side, so a mode sitting at 0 or 255 still counts as a peak.
    """
    sm = smooth_histogram(h, config.span)
    padded = np.concatenate([[0.0], sm, [0.0]])
    peaks = [p - 1 for p in find_peaks(padded, config)]
    return find_valleys(sm, peaks)


def split_region(pixels, config: RsmConfig | None = None, members=None) -> list[Cluster]:
    """Partition ``pixels`` into occupied color cells.

    ``members`` gives each pixel's index in the source image (defaults to
    positions in ``pixels``). Values at or below a cut belong to the lower
    interval. Cells come out ordered by (R, G, B) interval index.
    """
    config = config or RsmConfig()
    px = np.asarray(pixels, dtype=np.float64).reshape(-1, 3)
    n = len(px)
    if n == 0:
        raise EmptyInput("cannot split an empty region")
    members = np.arange(n, dtype=np.int64) if members is None else np.asarray(members, dtype=np.int64)
    if n < config.min_region_pixels:
        return [Cluster(px.mean(axis=0), n, members)]

    bins = _to_bins(px)
    cell = np.zeros(n, dtype=np.int64)
    for ch in range(3):
        cuts = channel_cuts(np.bincount(bins[:, ch], minlength=N_BINS).astype(np.float64), config)
        cell = cell * (len(cuts) + 1) + np.searchsorted(np.asarray(cuts, dtype=np.int64), bins[:, ch], side="left")

    order = np.argsort(cell, kind="stable")
    _, starts = np.unique(cell[order], return_index=True)
    clusters = []
    for grp in np.split(order, starts[1:]):
        clusters.append(Cluster(px[grp].mean(axis=0), len(grp), members[grp]))
    return clusters


def merge_within_region(clusters, epsilon: float) -> list[Cluster]:
    return merge_proximal_clusters(clusters, epsilon).clusters


def cluster_region(features: np.ndarray, members: np.ndarray, config: RsmConfig, epsilon: float) -> list[Cluster]:
    return merge_within_region(split_region(features[members], config, members), epsilon)


def cluster_regions(features: np.ndarray, regions, config: RsmConfig, epsilon: float, workers: int = 1) -> list[list[Cluster]]:
    """Run split + merge on every non-empty region. Output order follows ``regions``."""
    regions = [r for r in regions if len(r)]
    if workers <= 1:
        return [cluster_region(features, r, config, epsilon) for r in regions]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda r: cluster_region(features, r, config, epsilon), regions))
