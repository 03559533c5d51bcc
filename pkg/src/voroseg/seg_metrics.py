"""Unsupervised segmentation quality measures.

Every measure except :func:`mse` works on a :class:`SegmentView`, where a
segment is either a whole cluster (``mode="cluster"``) or a 4-connected
component of one label (``mode="connected-component"``). Segment colors are
the means of the original pixels, not the K-means centroids.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import ndimage

from .kmeans_refine import Segmentation
from .raster_io import Image

NG = 255.0  # gray levels per channel for the disparity normalisation
MODES = ("cluster", "connected-component")
_FOUR_CONNECTED = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]])


def normalize_mode(mode: str) -> str:
    if mode in ("cc", "connected", "connected-component"):
        return "connected-component"
    if mode == "cluster":
        return mode
    raise ValueError(f"unknown metrics mode {mode!r}")


@dataclass(eq=False)
class SegmentView:
    segment_of: np.ndarray = field(repr=False)  # flat segment index per pixel
    means: np.ndarray = field(repr=False)  # (M, 3)
    areas: np.ndarray  # (M,) int
    mode: str = "cluster"

    @property
    def N(self) -> int:
        return len(self.segment_of)

    @property
    def M(self) -> int:
        return len(self.areas)

    def members(self, j: int) -> np.ndarray:
        return np.nonzero(self.segment_of == j)[0]


@dataclass
class MetricsReport:
    mse: float
    f: float
    f_prime: float
    q: float
    d_intra: float
    d_inter: float
    f_rc: float
    k: int
    mode: str

    def as_dict(self) -> dict:
        return asdict(self)


def _component_ids(labels: np.ndarray) -> np.ndarray:
    """4-connected components of equal labels, numbered by first pixel in row-major order."""
    comp = np.zeros(labels.shape, dtype=np.int64)
    offset = 0
    for v in np.unique(labels):
        lab, n = ndimage.label(labels == v, structure=_FOUR_CONNECTED)
        mask = lab > 0
        comp[mask] = lab[mask] + offset - 1
        offset += n
    flat = comp.reshape(-1)
    _, first = np.unique(flat, return_index=True)
    rank = np.empty(len(first), dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(len(first))
    return rank[flat]


def build_segment_view(image: Image, seg: Segmentation, mode: str = "cluster") -> SegmentView:
    mode = normalize_mode(mode)
    labels = np.asarray(seg.labels, dtype=np.int64).reshape(-1)
    if mode == "cluster":
        _, seg_of = np.unique(labels, return_inverse=True)
    else:
        seg_of = _component_ids(labels.reshape(image.height, image.width))
    seg_of = seg_of.reshape(-1).astype(np.int64)
    feats = image.features()
    m = int(seg_of.max()) + 1
    areas = np.bincount(seg_of, minlength=m)
    sums = np.stack([np.bincount(seg_of, weights=feats[:, c], minlength=m) for c in range(3)], axis=1)
    return SegmentView(seg_of, sums / areas[:, None], areas, mode)


def mse(image: Image, seg: Segmentation) -> float:
    """Mean squared RGB distance from each pixel to its cluster centroid."""
    feats = image.features()
    cents = np.asarray(seg.centroids, dtype=np.float64)
    return float(((feats - cents[np.asarray(seg.labels).reshape(-1)]) ** 2).sum() / len(feats))


def color_errors_sq(image: Image, view: SegmentView) -> np.ndarray:
    """``e_j^2`` for every segment: summed squared distance to the segment mean."""
    feats = image.features()
    dev = ((feats - view.means[view.segment_of]) ** 2).sum(axis=1)
    return np.bincount(view.segment_of, weights=dev, minlength=view.M)


def color_error_sq(view: SegmentView, j: int, image: Image) -> float:
    if not 0 <= j < view.M:
        raise IndexError(f"segment {j} out of range (M={view.M})")
    px = image.features()[view.members(j)]
    return float(((px - view.means[j]) ** 2).sum())


def _area_counts(areas: np.ndarray) -> dict[int, int]:
    vals, counts = np.unique(areas, return_counts=True)
    return dict(zip(vals.tolist(), counts.tolist()))


def liu_yang_f(image: Image, view: SegmentView) -> float:
    e2 = color_errors_sq(image, view)
    return math.sqrt(view.M) / (1000.0 * view.N) * float((e2 / np.sqrt(view.areas)).sum())


def borsotti_f_prime(image: Image, view: SegmentView) -> float:
    """Like F, with sqrt(M) replaced by sqrt(sum_a S(a)^(1 + 1/a)) over segment areas a."""
    e2 = color_errors_sq(image, view)
    penalty = sum(float(s) ** (1.0 + 1.0 / a) for a, s in _area_counts(view.areas).items())
    return math.sqrt(penalty) / (1000.0 * view.N) * float((e2 / np.sqrt(view.areas)).sum())


def borsotti_q(image: Image, view: SegmentView) -> float:
    e2 = color_errors_sq(image, view)
    areas = view.areas.astype(np.float64)
    same_area = _area_counts(view.areas)
    s_of = np.array([same_area[a] for a in view.areas.tolist()], dtype=np.float64)
    terms = e2 / (1.0 + np.log(areas)) + (s_of / areas) ** 2
    return math.sqrt(view.M) / (1000.0 * view.N) * float(terms.sum())


def intra_uniformity(image: Image, view: SegmentView) -> float:
    """Area-weighted mean of per-segment mean squared color error, divided by M."""
    e2 = color_errors_sq(image, view)
    per_region = e2 / view.areas
    return float((view.areas / view.N * per_region).sum()) / view.M


def inter_disparity(image: Image, view: SegmentView) -> float:
    """Area-weighted mean over segments of the average normalised color distance to the others."""
    if view.M < 2:
        return 0.0
    diff = view.means[:, None, :] - view.means[None, :, :]
    pair = np.sqrt((diff**2).sum(axis=2)) / NG
    per_region = pair.sum(axis=1) / (view.M - 1)
    return float((view.areas / view.N * per_region).sum()) / view.M


def f_rc(image: Image, view: SegmentView) -> float:
    return (inter_disparity(image, view) - intra_uniformity(image, view)) / 2.0


def evaluate(image: Image, seg: Segmentation, mode: str = "cluster") -> MetricsReport:
    view = build_segment_view(image, seg, mode)
    d_intra = intra_uniformity(image, view)
    d_inter = inter_disparity(image, view)
    return MetricsReport(
        mse=mse(image, seg),
        f=liu_yang_f(image, view),
        f_prime=borsotti_f_prime(image, view),
        q=borsotti_q(image, view),
        d_intra=d_intra,
        d_inter=d_inter,
        f_rc=(d_inter - d_intra) / 2.0,
        k=seg.k,
        mode=view.mode,
    )
