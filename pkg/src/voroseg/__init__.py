"""Voronoi-region adaptive unsupervised color image segmentation."""

from .kmeans_refine import KmeansConfig, Segmentation, kmeans
from .pipeline import PipelineConfig, RunRecord, run_batch, segment_image
from .raster_io import Image, load_image, save_image
from .region_split_merge import RsmConfig
from .seeding import SeedConfig
from .seg_metrics import MetricsReport, evaluate

__all__ = [
    "Image", "load_image", "save_image",
    "SeedConfig", "RsmConfig", "KmeansConfig", "PipelineConfig",
    "Segmentation", "RunRecord", "MetricsReport",
    "kmeans", "segment_image", "run_batch", "evaluate",
]  # fmt: skip
