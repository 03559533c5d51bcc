#!/usr/bin/env python3
"""Per-stage wall-clock timings on generated images of increasing size.

Each configuration is run ``--repeat`` times and the mean reported, the same
averaging used for the batch report. Images are piecewise-smooth color
patches plus Gaussian noise; ``--noise`` controls how many histogram modes
each region ends up with, which is what drives the region stage cost.
"""

import argparse
import statistics

import numpy as np

from voroseg import PipelineConfig, segment_image
from voroseg.pipeline import STAGES
from voroseg.raster_io import Image

SIZES = [(120, 80), (240, 160), (481, 321)]


def patches(width, height, noise, seed=0):
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:height, 0:width].astype(float)
    centers = rng.uniform([0, 0], [width, height], size=(12, 2))
    colors = rng.uniform(20, 235, size=(12, 3))
    owner = ((xx[..., None] - centers[:, 0]) ** 2 + (yy[..., None] - centers[:, 1]) ** 2).argmin(axis=2)
    arr = colors[owner] + 25 * np.sin(xx / 37.0)[..., None] * np.array([1.0, 0.6, 0.3])
    arr += rng.normal(0, noise, arr.shape)
    return Image.from_array(np.clip(np.rint(arr), 0, 255).astype(np.uint8))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--noise", type=float, nargs="+", default=[4.0, 12.0, 25.0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    # warm the JIT so the first row is not charged for compilation
    segment_image(patches(16, 16, 1.0), PipelineConfig())

    header = ["size", "noise", "k"] + [f"t_{s}" for s in STAGES] + ["t_total"]
    print(",".join(header))
    for w, h in SIZES:
        for noise in args.noise:
            img = patches(w, h, noise)
            runs = [segment_image(img, PipelineConfig(workers=args.workers)) for _ in range(args.repeat)]
            k = runs[0][0].k
            means = [statistics.fmean(r.timings[s] for _, r in runs) for s in STAGES]
            print(",".join([f"{w}x{h}", f"{noise:g}", str(k)] + [f"{t:.4f}" for t in means] + [f"{sum(means):.4f}"]))


if __name__ == "__main__":
    main()
