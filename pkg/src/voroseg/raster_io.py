"""Image decoding/encoding (PPM, PNG) and rendering of segmentation results.

Images are held as ``(height, width, 3)`` uint8 arrays; flattening with
``reshape(-1, 3)`` gives the row-major pixel order used everywhere else.
"""

from __future__ import annotations

import csv
import os
import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import TYPE_CHECKING

import numpy as np
from PIL import Image as PILImage

from .errors import CorruptData, LabelOutOfRange, PaletteTooSmall, UnsupportedFormat

if TYPE_CHECKING:
    from .kmeans_refine import Segmentation

PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"


@dataclass(eq=False)
class Image:
    width: int
    height: int
    pixels: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError(f"image dimensions must be positive, got {self.width}x{self.height}")
        px = np.asarray(self.pixels)
        if px.size != self.width * self.height * 3:
            raise ValueError("pixel buffer does not match width*height RGB triples")
        if px.dtype != np.uint8:
            if np.any(px < 0) or np.any(px > 255):
                raise ValueError("channel values must lie in [0, 255]")
            px = px.astype(np.uint8)
        self.pixels = np.ascontiguousarray(px.reshape(self.height, self.width, 3))

    @classmethod
    def from_array(cls, arr) -> "Image":
        arr = np.asarray(arr)
        return cls(arr.shape[1], arr.shape[0], arr)

    @property
    def n_pixels(self) -> int:
        return self.width * self.height

    def features(self) -> np.ndarray:
        """Row-major ``(N, 3)`` float64 RGB feature vectors."""
        return self.pixels.reshape(-1, 3).astype(np.float64)

    def __eq__(self, other):
        if not isinstance(other, Image):
            return NotImplemented
        return (self.width, self.height) == (other.width, other.height) and np.array_equal(
            self.pixels, other.pixels
        )


# ---------------------------------------------------------------------------
# PPM


def _ppm_header(data: bytes) -> tuple[bytes, list[int], int]:
    """Parse magic + 3 integers; returns (magic, [w, h, maxval], offset after header)."""
    magic = data[:2]
    if magic not in (b"P3", b"P6"):
        raise UnsupportedFormat(f"not a P3/P6 PPM (magic {magic!r})")
    pos, values = 2, []
    n = len(data)
    while len(values) < 3:
        while pos < n and data[pos : pos + 1].isspace():
            pos += 1
        if pos < n and data[pos : pos + 1] == b"#":
            while pos < n and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and data[pos : pos + 1].isdigit():
            pos += 1
        if start == pos:
            raise CorruptData("truncated or malformed PPM header")
        values.append(int(data[start:pos]))
    return magic, values, pos


def _decode_ppm(data: bytes) -> Image:
    magic, (w, h, maxval), pos = _ppm_header(data)
    if maxval != 255:
        raise UnsupportedFormat(f"PPM maxval must be 255, got {maxval}")
    if w <= 0 or h <= 0:
        raise CorruptData("PPM dimensions must be positive")
    count = w * h * 3
    if magic == b"P6":
        # exactly one whitespace byte separates maxval from the raster
        payload = data[pos + 1 : pos + 1 + count]
        if len(payload) < count:
            raise CorruptData(f"P6 payload truncated: {len(payload)} of {count} bytes")
        arr = np.frombuffer(payload, dtype=np.uint8)
    else:
        tokens = re.sub(rb"#[^\r\n]*", b" ", data[pos:]).split()
        if len(tokens) < count:
            raise CorruptData(f"P3 payload truncated: {len(tokens)} of {count} samples")
        try:
            vals = np.array([int(t) for t in tokens[:count]], dtype=np.int64)
        except ValueError as exc:
            raise CorruptData("non-integer sample in P3 payload") from exc
        if vals.min() < 0 or vals.max() > 255:
            raise CorruptData("P3 sample outside [0, maxval]")
        arr = vals.astype(np.uint8)
    return Image(w, h, arr.reshape(h, w, 3).copy())


# ---------------------------------------------------------------------------
# PNG


def _decode_png(data: bytes, path) -> Image:
    if len(data) < 33 or data[12:16] != b"IHDR":
        raise CorruptData("PNG missing IHDR")
    bit_depth, color_type = data[24], data[25]
    if bit_depth != 8:
        raise UnsupportedFormat(f"PNG bit depth must be 8, got {bit_depth}")
    if color_type not in (0, 2, 3, 4, 6):
        raise UnsupportedFormat(f"unknown PNG color type {color_type}")
    try:
        with PILImage.open(path) as im:
            im.load()
            rgb = im.convert("RGB")
    except (OSError, SyntaxError, ValueError) as exc:
        raise CorruptData(f"cannot decode PNG: {exc}") from exc
    return Image.from_array(np.asarray(rgb, dtype=np.uint8))


def load_image(path) -> Image:
    """Read a PPM (P3/P6, maxval 255) or 8-bit PNG into an :class:`Image`."""
    with open(path, "rb") as fh:
        data = fh.read()
    if data.startswith(PNG_SIGNATURE):
        return _decode_png(data, path)
    if data[:2] in (b"P3", b"P6"):
        return _decode_ppm(data)
    raise UnsupportedFormat(f"{os.fspath(path)}: unrecognised image format")


def save_image(image: Image, path, format: str = "png") -> None:
    """Write ``image`` losslessly as ``ppm-p6`` or ``png``. OSError on failure."""
    if format in ("ppm-p6", "ppm", "p6"):
        header = f"P6\n{image.width} {image.height}\n255\n".encode("ascii")
        with open(path, "wb") as fh:
            fh.write(header + image.pixels.tobytes())
    elif format == "png":
        with open(path, "wb") as fh:
            PILImage.fromarray(image.pixels).save(fh, format="PNG")
    else:
        raise ValueError(f"unknown output format {format!r}")


# ---------------------------------------------------------------------------
# label maps


def save_label_map(labels: np.ndarray, path) -> None:
    """Write an ``(h, w)`` label array as a 16-bit grayscale PNG."""
    labels = np.asarray(labels)
    if labels.min(initial=0) < 0 or labels.max(initial=0) > 0xFFFF:
        raise LabelOutOfRange("labels must fit in 16 bits")
    im = PILImage.fromarray(labels.astype(np.uint16))
    with open(path, "wb") as fh:
        im.save(fh, format="PNG")


def load_label_map(path) -> np.ndarray:
    """Read a label map from a grayscale PNG (8 or 16 bit) or an integer CSV grid."""
    path = os.fspath(path)
    if path.lower().endswith(".csv"):
        with open(path, newline="") as fh:
            rows = [[int(v) for v in row] for row in csv.reader(fh) if row]
        if not rows or len({len(r) for r in rows}) != 1:
            raise CorruptData("label CSV must be a non-empty rectangular grid")
        return np.array(rows, dtype=np.int64)
    try:
        with PILImage.open(path) as im:
            im.load()
            if im.mode not in ("I;16", "I;16B", "I", "L"):
                raise UnsupportedFormat(f"label map must be grayscale, got mode {im.mode}")
            return np.asarray(im).astype(np.int64)
    except (SyntaxError, PILImage.UnidentifiedImageError) as exc:
        raise CorruptData(f"cannot decode label map: {exc}") from exc


# ---------------------------------------------------------------------------
# rendering


def round_half_up(values: np.ndarray) -> np.ndarray:
    return np.floor(np.asarray(values, dtype=np.float64) + 0.5)


def render_centroid_image(image: Image, seg: "Segmentation") -> Image:
    labels = np.asarray(seg.labels).reshape(-1)
    cents = np.asarray(seg.centroids, dtype=np.float64).reshape(-1, 3)
    if labels.size != image.n_pixels:
        raise LabelOutOfRange("segmentation does not cover the image")
    if len(cents) == 0 or labels.min() < 0 or labels.max() >= len(cents):
        raise LabelOutOfRange("label without a centroid")
    colors = np.clip(round_half_up(cents), 0, 255).astype(np.uint8)
    return Image(image.width, image.height, colors[labels].reshape(image.height, image.width, 3))


def render_false_color(seg: "Segmentation", palette=None) -> Image:
    if palette is None:
        palette = default_palette()
    pal = np.asarray(palette, dtype=np.uint8).reshape(-1, 3)
    labels = np.asarray(seg.labels).reshape(-1)
    k = max(len(seg.centroids), int(labels.max()) + 1)
    if k > len(pal):
        raise PaletteTooSmall(f"{k} clusters but only {len(pal)} palette entries")
    if labels.min() < 0:
        raise LabelOutOfRange("negative label")
    return Image(seg.width, seg.height, pal[labels].reshape(seg.height, seg.width, 3))


@lru_cache(maxsize=8)
def _palette(n: int) -> tuple:
    # Greedy farthest-point sampling over a regular RGB lattice, starting at black.
    levels = 8 if n <= 64 else 16
    grid = np.round(np.linspace(0, 255, levels)).astype(np.int64)
    cand = np.stack(np.meshgrid(grid, grid, grid, indexing="ij"), axis=-1).reshape(-1, 3)
    if n > len(cand):
        raise PaletteTooSmall(f"cannot build more than {len(cand)} distinct colors")
    chosen = [0]
    dmin = ((cand - cand[0]) ** 2).sum(axis=1)
    for _ in range(n - 1):
        nxt = int(np.argmax(dmin))
        chosen.append(nxt)
        dmin = np.minimum(dmin, ((cand - cand[nxt]) ** 2).sum(axis=1))
    return tuple(tuple(int(c) for c in cand[i]) for i in chosen)


def default_palette(n: int = 64) -> list[tuple[int, int, int]]:
    """``n`` pairwise-distinct colors, identical on every call."""
    return list(_palette(n))

