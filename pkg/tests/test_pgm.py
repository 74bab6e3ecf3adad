import numpy as np
import pytest

from sparsescene.errors import ParameterError
from sparsescene.pgm import (
    load_image,
    load_label_map,
    quantize_to_bytes,
    render_label_map,
    save_image,
    save_label_map,
)


def test_pgm_round_trip(tmp_path):
    rng = np.random.Generator(np.random.PCG64(0))
    img = rng.integers(0, 256, size=(13, 17)).astype(np.float64)
    path = tmp_path / "img.pgm"
    save_image(path, img)
    assert np.array_equal(load_image(path), img)


def test_save_clips_and_rounds_half_away_from_zero(tmp_path):
    img = np.array([[-5.0, 0.49, 0.5, 254.5, 300.0, 127.5]])
    assert quantize_to_bytes(img).tolist() == [[0, 0, 1, 255, 255, 128]]
    path = tmp_path / "img.pgm"
    save_image(path, img)
    assert load_image(path).tolist() == [[0.0, 0.0, 1.0, 255.0, 255.0, 128.0]]


def test_pgm_header_comments_are_skipped(tmp_path):
    path = tmp_path / "c.pgm"
    path.write_bytes(b"P5\n# a comment\n3 2\n# another\n255\n" + bytes(range(6)))
    img = load_image(path)
    assert img.shape == (2, 3)
    assert img[1, 2] == 5.0


def test_pgm_rejects_bad_magic_and_truncation(tmp_path):
    bad = tmp_path / "bad.pgm"
    bad.write_bytes(b"P6\n2 2\n255\n" + bytes(12))
    with pytest.raises(ParameterError):
        load_image(bad)
    short = tmp_path / "short.pgm"
    short.write_bytes(b"P5\n4 4\n255\n" + bytes(3))
    with pytest.raises(ParameterError):
        load_image(short)
    with pytest.raises(ParameterError):
        load_image(tmp_path / "missing.pgm")


def test_png_round_trip(tmp_path):
    rng = np.random.Generator(np.random.PCG64(1))
    img = rng.integers(0, 256, size=(9, 6)).astype(np.float64)
    path = tmp_path / "img.png"
    save_image(path, img)
    assert np.array_equal(load_image(path), img)


def test_label_map_round_trip_with_unlabeled(tmp_path):
    labels = np.array([[0, 1, 2], [3, -1, 0]])
    path = tmp_path / "labels.pgm"
    save_label_map(path, labels)
    assert np.array_equal(load_label_map(path), labels)


def test_render_label_map_palette(tmp_path):
    from PIL import Image

    labels = np.array([[0, 1], [2, 3]])
    path = tmp_path / "map.png"
    render_label_map(path, labels, 4)
    rgb = np.asarray(Image.open(path).convert("RGB"))
    assert tuple(rgb[0, 0]) == (0x1F, 0x77, 0xB4)
    assert tuple(rgb[0, 1]) == (0xD6, 0x27, 0x28)
    assert tuple(rgb[1, 0]) == (0xE8, 0xC5, 0x47)
    assert tuple(rgb[1, 1]) == (0x2C, 0xA0, 0x2C)
