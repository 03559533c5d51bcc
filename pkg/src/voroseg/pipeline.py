"""End-to-end segmentation: seeds -> Voronoi regions -> per-region clusters -> global merge -> K-means."""

from __future__ import annotations

import csv
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import raster_io
from .errors import EmptyDirectory, ImageTooSmall
from .kmeans_refine import KmeansConfig, Segmentation, kmeans
from .proximal_merge import merge_proximal_clusters
from .raster_io import Image
from .region_split_merge import RsmConfig, cluster_regions
from .seeding import SeedConfig, find_seeds
from .seg_metrics import MetricsReport, evaluate, normalize_mode
from .tessellation import assign_voronoi

log = logging.getLogger(__name__)

EMIT_CHOICES = ("centroid-image", "false-color", "label-map", "metrics", "merge-log", "timing")
DEFAULT_EMIT = frozenset({"centroid-image", "false-color", "label-map", "metrics"})
STAGES = ("seed", "voronoi", "rsm", "merge", "kmeans", "metrics")
REPORT_COLUMNS = [
    "file", "status", "width", "height", "seeds", "regions", "pre_merge_clusters", "k",
    "mse", "f", "f_prime", "q", "d_intra", "d_inter", "f_rc",
    "t_seed", "t_voronoi", "t_rsm", "t_merge", "t_kmeans", "t_metrics", "t_total",
]  # fmt: skip
SUPPORTED_SUFFIXES = (".png", ".ppm", ".pnm")


@dataclass(frozen=True)
class PipelineConfig:
    epsilon: float = 71.0
    seed_config: SeedConfig = field(default_factory=SeedConfig)
    rsm_config: RsmConfig = field(default_factory=RsmConfig)
    kmeans_config: KmeansConfig = field(default_factory=KmeansConfig)
    metrics_mode: str = "cluster"
    emit: frozenset = DEFAULT_EMIT
    workers: int = 1  # threads for the per-region stage

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        object.__setattr__(self, "metrics_mode", normalize_mode(self.metrics_mode))
        unknown = set(self.emit) - set(EMIT_CHOICES)
        if unknown:
            raise ValueError(f"unknown emit entries: {sorted(unknown)}")
        object.__setattr__(self, "emit", frozenset(self.emit))


@dataclass
class RunRecord:
    file: str = ""
    status: str = "ok"
    width: int = 0
    height: int = 0
    seeds: int = 0
    regions: int = 0
    pre_merge_clusters: int = 0
    k: int = 0
    used_fallback: bool = False
    metrics: MetricsReport | None = None
    timings: dict = field(default_factory=dict)
    merge_log: list = field(default_factory=list, repr=False)
    error: str = ""

    def row(self) -> dict:
        out = dict.fromkeys(REPORT_COLUMNS, "")
        out.update(file=self.file, status=self.status)
        if self.status != "ok":
            return out
        out.update(width=self.width, height=self.height, seeds=self.seeds, regions=self.regions,
                   pre_merge_clusters=self.pre_merge_clusters, k=self.k)  # fmt: skip
        if self.metrics is not None:
            for name in ("mse", "f", "f_prime", "q", "d_intra", "d_inter", "f_rc"):
                out[name] = repr(float(getattr(self.metrics, name)))
        for stage in STAGES:
            out[f"t_{stage}"] = f"{self.timings.get(stage, 0.0):.6f}"
        out["t_total"] = f"{sum(self.timings.get(s, 0.0) for s in STAGES):.6f}"
        return out


def segment_image(image: Image, config: PipelineConfig | None = None) -> tuple[Segmentation, RunRecord]:
    config = config or PipelineConfig()
    if image.width < 3 or image.height < 3:
        raise ImageTooSmall(f"need at least 3x3 pixels, got {image.width}x{image.height}")
    rec = RunRecord(width=image.width, height=image.height)
    clock = time.perf_counter

    t = clock()
    seeds, rec.used_fallback = find_seeds(image, config.seed_config)
    rec.seeds = len(seeds)
    rec.timings["seed"] = clock() - t

    t = clock()
    vmap = assign_voronoi(image.width, image.height, seeds)
    regions = [r for r in vmap.regions() if len(r)]
    rec.regions = len(regions)
    rec.timings["voronoi"] = clock() - t

    t = clock()
    feats = image.features()
    per_region = cluster_regions(feats, regions, config.rsm_config, config.epsilon, config.workers)
    pooled = [c for clusters in per_region for c in clusters]
    rec.pre_merge_clusters = len(pooled)
    rec.timings["rsm"] = clock() - t

    t = clock()
    merged = merge_proximal_clusters(pooled, config.epsilon)
    rec.merge_log = merged.merge_log
    rec.timings["merge"] = clock() - t

    t = clock()
    seg = kmeans(image, merged.k, merged.centroids, config.kmeans_config)
    rec.k = seg.k
    rec.timings["kmeans"] = clock() - t

    t = clock()
    if "metrics" in config.emit:
        rec.metrics = evaluate(image, seg, config.metrics_mode)
    rec.timings["metrics"] = clock() - t
    log.debug("seeds=%d regions=%d P=%d k=%d", rec.seeds, rec.regions, rec.pre_merge_clusters, rec.k)
    return seg, rec


def write_merge_log(merge_log, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["step", "index_a", "index_b", "distance"])
        for step, (a, b, d) in enumerate(merge_log, start=1):
            w.writerow([step, a, b, repr(float(d))])


def write_artifacts(image: Image, seg: Segmentation, rec: RunRecord, out_dir, stem: str, emit) -> list[Path]:
    out_dir = Path(out_dir)
    written = []
    if "centroid-image" in emit:
        p = out_dir / f"{stem}_centroid.png"
        raster_io.save_image(raster_io.render_centroid_image(image, seg), p, "png")
        written.append(p)
    if "false-color" in emit:
        p = out_dir / f"{stem}_false.png"
        palette = raster_io.default_palette(max(64, seg.k))
        raster_io.save_image(raster_io.render_false_color(seg, palette), p, "png")
        written.append(p)
    if "label-map" in emit:
        p = out_dir / f"{stem}_labels.png"
        raster_io.save_label_map(seg.label_grid(), p)
        written.append(p)
    if "merge-log" in emit:
        p = out_dir / f"{stem}_merges.csv"
        write_merge_log(rec.merge_log, p)
        written.append(p)
    return written


def write_report(records, path, summary: bool = True) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=REPORT_COLUMNS, lineterminator="\n")
        w.writeheader()
        for rec in records:
            w.writerow(rec.row())
        if summary:
            w.writerow(_summary_row(records))


def _summary_row(records) -> dict:
    ok = [r.row() for r in records if r.status == "ok"]
    row = dict.fromkeys(REPORT_COLUMNS, "")
    row.update(file="mean", status="summary")
    for col in REPORT_COLUMNS:
        if col.startswith("t_") and ok:
            row[col] = f"{np.mean([float(r[col]) for r in ok]):.6f}"
    return row


def process_file(path, out_dir, config: PipelineConfig) -> RunRecord:
    """Segment one file and write its artifacts; failures come back as ``status="error"``."""
    path = Path(path)
    try:
        image = raster_io.load_image(path)
        seg, rec = segment_image(image, config)
        rec.file = path.name
        write_artifacts(image, seg, rec, out_dir, path.stem, config.emit)
    except Exception as exc:  # batch isolation: one bad file must not stop the run
        log.warning("%s: %s", path.name, exc)
        return RunRecord(file=path.name, status="error", error=f"{type(exc).__name__}: {exc}")
    return rec


def list_images(input_dir) -> list[Path]:
    return sorted(p for p in Path(input_dir).iterdir() if p.is_file() and p.suffix.lower() in SUPPORTED_SUFFIXES)


def run_batch(input_dir, output_dir, config: PipelineConfig | None = None, jobs: int = 1) -> list[RunRecord]:
    """Segment every supported image in ``input_dir`` (by filename) and write ``report.csv``."""
    config = config or PipelineConfig()
    files = list_images(input_dir)
    if not files:
        raise EmptyDirectory(f"no .png/.ppm images in {input_dir}")
    os.makedirs(output_dir, exist_ok=True)
    if jobs > 1:
        # region threads inside worker processes would oversubscribe
        cfg = replace(config, workers=1)
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(process_file, files, [output_dir] * len(files), [cfg] * len(files)))
    else:
        records = [process_file(f, output_dir, config) for f in files]
    write_report(records, Path(output_dir) / "report.csv")
    return records
