"""Command line entry point: ``voroseg segment|batch|eval``."""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import raster_io
from .errors import VorosegError
from .kmeans_refine import segmentation_from_labels
from .pipeline import EMIT_CHOICES, DEFAULT_EMIT, PipelineConfig, process_file, run_batch, write_report
from .seeding import SeedConfig
from .seg_metrics import evaluate

EXIT_OK, EXIT_IMAGE_ERROR, EXIT_USAGE = 0, 1, 2


def _emit_list(text: str) -> frozenset:
    items = frozenset(s.strip() for s in text.split(",") if s.strip())
    bad = items - set(EMIT_CHOICES)
    if bad:
        raise argparse.ArgumentTypeError(f"unknown --emit entries {sorted(bad)}; choose from {', '.join(EMIT_CHOICES)}")
    return items


def _add_pipeline_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--epsilon", type=float, default=71.0, help="Manhattan merge threshold (default 71)")
    p.add_argument("--max-corners", type=int, default=SeedConfig.max_corners)
    p.add_argument("--min-distance", type=float, default=SeedConfig.min_distance)
    p.add_argument("--metrics-mode", choices=["cluster", "cc"], default="cluster")
    p.add_argument("--emit", type=_emit_list, default=DEFAULT_EMIT,
                   help=f"comma separated subset of: {','.join(EMIT_CHOICES)}")  # fmt: skip
    p.add_argument("--dump-merges", action="store_true", help="also write <stem>_merges.csv")
    p.add_argument("--workers", type=int, default=1, help="threads for the per-region stage")
    p.add_argument("--out", default="out", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="voroseg", description="Voronoi-region adaptive color image segmentation")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    seg = sub.add_parser("segment", help="segment one image")
    seg.add_argument("input")
    _add_pipeline_flags(seg)

    batch = sub.add_parser("batch", help="segment every image in a directory and write report.csv")
    batch.add_argument("input_dir")
    batch.add_argument("--jobs", type=int, default=1, help="images processed in parallel")
    _add_pipeline_flags(batch)

    ev = sub.add_parser("eval", help="score an existing label map")
    ev.add_argument("image")
    ev.add_argument("label_map", help="16-bit grayscale PNG or CSV grid of labels")
    ev.add_argument("--metrics-mode", choices=["cluster", "cc"], default="cluster")
    return parser


def _config(args) -> PipelineConfig:
    emit = set(args.emit)
    if args.dump_merges:
        emit.add("merge-log")
    seed_cfg = replace(SeedConfig(), max_corners=args.max_corners, min_distance=args.min_distance)
    return PipelineConfig(epsilon=args.epsilon, seed_config=seed_cfg, metrics_mode=args.metrics_mode,
                          emit=frozenset(emit), workers=args.workers)  # fmt: skip


def _cmd_segment(args) -> int:
    cfg = _config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rec = process_file(args.input, out, cfg)
    if rec.status != "ok":
        print(f"error: {rec.error}", file=sys.stderr)
        return EXIT_IMAGE_ERROR
    if {"metrics", "timing"} & cfg.emit:
        write_report([rec], out / "report.csv", summary=False)
    print(f"{rec.file}: {rec.width}x{rec.height} seeds={rec.seeds} P={rec.pre_merge_clusters} k={rec.k}")
    if rec.metrics is not None:
        m = rec.metrics
        print(f"  mse={m.mse:.4f} F={m.f:.6g} F'={m.f_prime:.6g} Q={m.q:.6g} "
              f"D_intra={m.d_intra:.6g} D_inter={m.d_inter:.6g} F_RC={m.f_rc:.6g}")  # fmt: skip
    if "timing" in cfg.emit:
        print("  " + " ".join(f"t_{k}={v:.4f}s" for k, v in rec.timings.items()))
    return EXIT_OK


def _cmd_batch(args) -> int:
    cfg = _config(args)
    records = run_batch(args.input_dir, args.out, cfg, jobs=args.jobs)
    failed = [r for r in records if r.status != "ok"]
    for r in failed:
        print(f"error: {r.file}: {r.error}", file=sys.stderr)
    print(f"{len(records) - len(failed)}/{len(records)} images segmented; report at {Path(args.out) / 'report.csv'}")
    return EXIT_IMAGE_ERROR if failed else EXIT_OK


def _cmd_eval(args) -> int:
    image = raster_io.load_image(args.image)
    labels = raster_io.load_label_map(args.label_map)
    if labels.shape != (image.height, image.width):
        print(f"error: label map {labels.shape[::-1]} does not match image {image.width}x{image.height}", file=sys.stderr)
        return EXIT_USAGE
    report = evaluate(image, segmentation_from_labels(image, labels), args.metrics_mode).as_dict()
    w = csv.DictWriter(sys.stdout, fieldnames=list(report), lineterminator="\n")
    w.writeheader()
    w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in report.items()})
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return {"segment": _cmd_segment, "batch": _cmd_batch, "eval": _cmd_eval}[args.command](args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (VorosegError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IMAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
