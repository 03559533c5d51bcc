import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import encode_png_rgb
from voroseg.errors import CorruptData, LabelOutOfRange, PaletteTooSmall, UnsupportedFormat
from voroseg.kmeans_refine import Segmentation
from voroseg.raster_io import (
    Image,
    default_palette,
    load_image,
    load_label_map,
    render_centroid_image,
    render_false_color,
    save_image,
    save_label_map,
)


def seg_of(width, height, labels, centroids):
    return Segmentation(width, height, np.asarray(labels), np.asarray(centroids, dtype=float))


def test_p3_minimal(tmp_path):
    p = tmp_path / "a.ppm"
    p.write_bytes(b"P3\n2 1\n255\n0 0 0 255 255 255\n")
    img = load_image(p)
    assert (img.width, img.height) == (2, 1)
    assert img.pixels.reshape(-1, 3).tolist() == [[0, 0, 0], [255, 255, 255]]


def test_p3_with_comments(tmp_path):
    p = tmp_path / "a.ppm"
    p.write_bytes(b"P3\n# made by hand\n2 1\n255\n0 0 0 # first\n255 255 255\n")
    assert load_image(p).pixels.reshape(-1, 3).tolist() == [[0, 0, 0], [255, 255, 255]]


def test_p6_matches_p3(tmp_path):
    (tmp_path / "a.ppm").write_bytes(b"P3\n2 1\n255\n0 0 0 255 255 255\n")
    (tmp_path / "b.ppm").write_bytes(b"P6\n2 1\n255\n" + bytes([0, 0, 0, 255, 255, 255]))
    assert load_image(tmp_path / "a.ppm") == load_image(tmp_path / "b.ppm")


def test_png_uniform_gray_from_reference_encoder(tmp_path):
    p = tmp_path / "gray.png"
    p.write_bytes(encode_png_rgb(4, 4, [(128, 128, 128)] * 16))
    img = load_image(p)
    assert img.pixels.reshape(-1, 3).tolist() == [[128, 128, 128]] * 16


def test_png_rgba_alpha_discarded(tmp_path):
    from PIL import Image as PILImage

    arr = np.zeros((2, 3, 4), np.uint8)
    arr[..., 0] = 10
    arr[..., 3] = 7
    PILImage.fromarray(arr).save(tmp_path / "a.png")
    assert load_image(tmp_path / "a.png").pixels.reshape(-1, 3).tolist() == [[10, 0, 0]] * 6


def test_save_p6_exact_bytes(tmp_path):
    p = tmp_path / "one.ppm"
    save_image(Image(1, 1, np.array([[[7, 8, 9]]], np.uint8)), p, "ppm-p6")
    assert p.read_bytes() == b"P6\n1 1\n255\n\x07\x08\x09"


@pytest.mark.parametrize("fmt", ["ppm-p6", "png"])
def test_random_roundtrip_8x8(tmp_path, rng, fmt):
    img = Image(8, 8, rng.integers(0, 256, (8, 8, 3)).astype(np.uint8))
    save_image(img, tmp_path / "x", fmt)
    assert load_image(tmp_path / "x") == img


@given(arrays(np.uint8, st.tuples(st.integers(1, 12), st.integers(1, 12), st.just(3))), st.sampled_from(["ppm-p6", "png"]))
def test_roundtrip_property(tmp_path_factory, arr, fmt):
    path = tmp_path_factory.mktemp("rt") / "img"
    img = Image.from_array(arr)
    save_image(img, path, fmt)
    assert load_image(path) == img


def test_save_unwritable(tmp_path):
    img = Image(1, 1, np.zeros((1, 1, 3), np.uint8))
    with pytest.raises(OSError):
        save_image(img, tmp_path / "missing-dir" / "x.png", "png")


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_image(tmp_path / "nope.ppm")


@pytest.mark.parametrize(
    "payload,exc",
    [
        (b"P5\n1 1\n255\n\x00", UnsupportedFormat),
        (b"GIF89a....", UnsupportedFormat),
        (b"P6\n1 1\n65535\n\x00\x00\x00\x00\x00\x00", UnsupportedFormat),
        (b"P6\n2 2\n255\n\x00\x01\x02", CorruptData),
        (b"P3\n2 1\n255\n0 0 0 1", CorruptData),
        (b"P6\n2", CorruptData),
    ],
)
def test_bad_ppm(tmp_path, payload, exc):
    p = tmp_path / "bad"
    p.write_bytes(payload)
    with pytest.raises(exc):
        load_image(p)


def test_png_16bit_rejected(tmp_path):
    from PIL import Image as PILImage

    PILImage.fromarray(np.zeros((2, 2), np.uint16)).save(tmp_path / "deep.png")
    with pytest.raises(UnsupportedFormat):
        load_image(tmp_path / "deep.png")


def test_png_truncated(tmp_path, rng):
    px = [tuple(int(v) for v in c) for c in rng.integers(0, 256, (256, 3))]
    data = encode_png_rgb(16, 16, px)
    (tmp_path / "t.png").write_bytes(data[: len(data) // 2])
    with pytest.raises(CorruptData):
        load_image(tmp_path / "t.png")


def test_image_invariants():
    with pytest.raises(ValueError):
        Image(2, 2, np.zeros(9, np.uint8))
    with pytest.raises(ValueError):
        Image(1, 1, np.array([[[0, 0, 300]]]))
    with pytest.raises(ValueError):
        Image(0, 1, np.zeros(0, np.uint8))


# rendering


def test_centroid_render_round_half_up():
    img = Image(2, 2, np.zeros((2, 2, 3), np.uint8))
    out = render_centroid_image(img, seg_of(2, 2, [0] * 4, [(10.4, 20.5, 30.6)]))
    assert out.pixels.reshape(-1, 3).tolist() == [[10, 21, 31]] * 4


def test_centroid_render_identity(rng):
    arr = rng.integers(0, 256, (3, 4, 3)).astype(np.uint8)
    flat = arr.reshape(-1, 3)
    img = Image.from_array(arr)
    out = render_centroid_image(img, seg_of(4, 3, np.arange(12), flat.astype(float)))
    assert out == img


def test_centroid_render_two_clusters():
    img = Image(2, 1, np.zeros((1, 2, 3), np.uint8))
    out = render_centroid_image(img, seg_of(2, 1, [0, 1], [(0, 0, 0), (255, 255, 255)]))
    assert out.pixels.reshape(-1, 3).tolist() == [[0, 0, 0], [255, 255, 255]]


@given(st.lists(st.tuples(*[st.floats(-50, 300)] * 3), min_size=1, max_size=5))
def test_centroid_render_clipped(cents):
    img = Image(len(cents), 1, np.zeros((1, len(cents), 3), np.uint8))
    out = render_centroid_image(img, seg_of(len(cents), 1, np.arange(len(cents)), cents))
    assert out.pixels.min() >= 0 and out.pixels.max() <= 255


def test_centroid_render_label_out_of_range():
    img = Image(2, 1, np.zeros((1, 2, 3), np.uint8))
    with pytest.raises(LabelOutOfRange):
        render_centroid_image(img, seg_of(2, 1, [0, 1], [(0, 0, 0)]))


def test_false_color_single_cluster():
    out = render_false_color(seg_of(3, 2, [0] * 6, [(1, 1, 1)]))
    assert out.pixels.reshape(-1, 3).tolist() == [list(default_palette()[0])] * 6


def test_false_color_alternating():
    pal = [(255, 0, 0), (0, 255, 0)]
    out = render_false_color(seg_of(4, 1, [0, 1, 0, 1], [(0, 0, 0), (1, 1, 1)]), pal)
    assert out.pixels.reshape(-1, 3).tolist() == [[255, 0, 0], [0, 255, 0], [255, 0, 0], [0, 255, 0]]


def test_false_color_palette_too_small():
    with pytest.raises(PaletteTooSmall):
        render_false_color(seg_of(3, 1, [0, 1, 2], [(0, 0, 0)] * 3), [(255, 0, 0), (0, 255, 0)])


def test_default_palette_distinct_and_stable():
    pal = default_palette()
    assert len(pal) == 64 and len(set(pal)) == 64
    assert pal == default_palette()
    big = default_palette(300)
    assert len(set(big)) == 300


@given(st.lists(st.integers(0, 63), min_size=1, max_size=40))
def test_false_color_injective(labels):
    seg = seg_of(len(labels), 1, labels, np.zeros((64, 3)))
    colors = [tuple(c) for c in render_false_color(seg).pixels.reshape(-1, 3).tolist()]
    for a, la in zip(colors, labels):
        for b, lb in zip(colors, labels):
            assert (a == b) == (la == lb)


# label maps


def test_label_map_png_roundtrip(tmp_path, rng):
    labels = rng.integers(0, 70000 % 65536, (5, 7))
    save_label_map(labels, tmp_path / "l.png")
    assert np.array_equal(load_label_map(tmp_path / "l.png"), labels)


def test_label_map_csv(tmp_path):
    (tmp_path / "l.csv").write_text("0,1,1\n2,2,0\n")
    assert load_label_map(tmp_path / "l.csv").tolist() == [[0, 1, 1], [2, 2, 0]]
