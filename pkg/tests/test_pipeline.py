import csv

import numpy as np
import pytest

import voroseg.pipeline as pipeline
from conftest import random_image
from synthetic import three_tone, two_block
from voroseg.errors import EmptyDirectory, ImageTooSmall
from voroseg.kmeans_refine import nearest_centroid
from voroseg.pipeline import REPORT_COLUMNS, PipelineConfig, run_batch, segment_image
from voroseg.raster_io import Image, load_label_map, save_image
from voroseg.seeding import SeedConfig


def test_uniform_image_single_cluster():
    img = Image.from_array(np.full((20, 30, 3), 77, np.uint8))
    seg, rec = segment_image(img)
    assert seg.k == 1 and np.all(seg.labels == 0)
    assert rec.used_fallback


def test_two_blocks():
    seg, rec = segment_image(two_block())
    assert seg.k == 2 and rec.metrics.mse == 0.0
    grid = seg.label_grid()
    assert len(set(grid[:, :32].ravel())) == 1 and len(set(grid[:, 32:].ravel())) == 1


def test_two_blocks_everything_merges_above_max_distance():
    seg, _ = segment_image(two_block(), PipelineConfig(epsilon=766))
    assert seg.k == 1


def test_epsilon_coarsens_three_tone():
    assert segment_image(three_tone(), PipelineConfig(epsilon=71))[0].k == 3
    assert segment_image(three_tone(), PipelineConfig(epsilon=150))[0].k == 2


def test_too_small():
    with pytest.raises(ImageTooSmall):
        segment_image(Image.from_array(np.zeros((2, 5, 3), np.uint8)))


def test_config_validation():
    with pytest.raises(ValueError):
        PipelineConfig(epsilon=-1)
    with pytest.raises(ValueError):
        PipelineConfig(emit={"bogus"})
    assert PipelineConfig(metrics_mode="cc").metrics_mode == "connected-component"


@pytest.mark.parametrize("seed", range(4))
def test_record_invariants(seed):
    rng = np.random.default_rng(seed)
    img = random_image(rng, 24, 18, levels=4)
    seg, rec = segment_image(img, PipelineConfig(emit={"metrics", "timing"}))
    assert seg.labels.shape == (img.n_pixels,)
    assert 0 <= seg.labels.min() and seg.labels.max() < seg.k
    assert seg.k <= rec.pre_merge_clusters
    assert all(t >= 0 for t in rec.timings.values())
    assert set(rec.timings) == set(pipeline.STAGES)


def test_kmeans_not_worse_than_merged_centroids(monkeypatch):
    captured = {}
    real = pipeline.kmeans

    def spy(image, k, init, config):
        captured["init"] = np.array(init)
        return real(image, k, init, config)

    monkeypatch.setattr(pipeline, "kmeans", spy)
    img = random_image(np.random.default_rng(9), 32, 32, levels=5)
    seg, rec = segment_image(img)
    feats = img.features()
    init = captured["init"]
    base = ((feats - init[nearest_centroid(feats, init)]) ** 2).sum() / len(feats)
    assert rec.metrics.mse <= base + 1e-9


def test_metrics_skipped_unless_requested():
    _, rec = segment_image(two_block(), PipelineConfig(emit={"label-map"}))
    assert rec.metrics is None


def test_thread_count_does_not_change_result():
    img = random_image(np.random.default_rng(4), 40, 30, levels=6)
    a, ra = segment_image(img, PipelineConfig(workers=1))
    b, rb = segment_image(img, PipelineConfig(workers=4))
    assert np.array_equal(a.labels, b.labels)
    assert np.array_equal(a.centroids, b.centroids)
    assert ra.metrics == rb.metrics


def make_dir(tmp_path, n=3, corrupt=False):
    src = tmp_path / "in"
    src.mkdir()
    rng = np.random.default_rng(1)
    for i in range(n):
        save_image(random_image(rng, 16, 12, levels=3), src / f"img{i}.png", "png")
    if corrupt:
        (src / "broken.ppm").write_bytes(b"P6\n10 10\n255\n\x00\x01")
    (src / "notes.txt").write_text("ignored")
    return src


def read_report(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_batch_rows_and_summary(tmp_path):
    src = make_dir(tmp_path)
    out = tmp_path / "out"
    records = run_batch(src, out)
    assert [r.file for r in records] == ["img0.png", "img1.png", "img2.png"]
    rows = read_report(out / "report.csv")
    assert list(rows[0]) == REPORT_COLUMNS
    assert len(rows) == 4
    assert rows[-1]["status"] == "summary"
    for stem in ("img0", "img1", "img2"):
        assert (out / f"{stem}_centroid.png").exists()
        assert (out / f"{stem}_false.png").exists()
        labels = load_label_map(out / f"{stem}_labels.png")
        assert labels.shape == (12, 16)


def test_batch_isolates_bad_file(tmp_path):
    src = make_dir(tmp_path, n=2, corrupt=True)
    run_batch(src, tmp_path / "out")
    rows = read_report(tmp_path / "out" / "report.csv")
    status = {r["file"]: r["status"] for r in rows}
    assert status == {"broken.ppm": "error", "img0.png": "ok", "img1.png": "ok", "mean": "summary"}


def strip_timing(rows):
    return [{k: v for k, v in r.items() if not k.startswith("t_")} for r in rows]


def test_batch_rerun_identical_except_timing(tmp_path):
    src = make_dir(tmp_path)
    run_batch(src, tmp_path / "a")
    run_batch(src, tmp_path / "b", jobs=2)
    assert strip_timing(read_report(tmp_path / "a" / "report.csv")) == strip_timing(read_report(tmp_path / "b" / "report.csv"))
    for name in ("img0_labels.png", "img2_false.png"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_empty_directory(tmp_path):
    with pytest.raises(EmptyDirectory):
        run_batch(tmp_path, tmp_path / "out")


def test_merge_log_written(tmp_path):
    img = random_image(np.random.default_rng(2), 20, 20, levels=4)
    seg, rec = segment_image(img)
    pipeline.write_artifacts(img, seg, rec, tmp_path, "x", {"merge-log"})
    rows = read_report(tmp_path / "x_merges.csv")
    assert len(rows) == len(rec.merge_log) == rec.pre_merge_clusters - seg.k
    assert all(float(r["distance"]) < 71 for r in rows)


def test_fallback_seeds_flag():
    img = random_image(np.random.default_rng(0), 20, 20)
    _, rec = segment_image(img, PipelineConfig(seed_config=SeedConfig(max_corners=1)))
    assert rec.used_fallback and rec.seeds > 1
