import numpy as np
import pytest

from zoomsr import (
    ShapeError,
    crop_center,
    load_image,
    load_y,
    rgb_to_y,
    sample_bilinear,
    save_image,
)


def _uniform_rgb(r, g, b, shape=(4, 5)):
    img = np.zeros(shape + (3,))
    img[..., 0] = r
    img[..., 1] = g
    img[..., 2] = b
    return img


class TestRgbToY:
    def test_black_maps_to_16(self):
        y = rgb_to_y(_uniform_rgb(0, 0, 0))
        np.testing.assert_allclose(y, 16.0, atol=1e-12)

    def test_white_maps_to_235(self):
        y = rgb_to_y(_uniform_rgb(255, 255, 255))
        np.testing.assert_allclose(y, 235.0, atol=1e-9)

    def test_mid_gray(self):
        y = rgb_to_y(_uniform_rgb(128, 128, 128))
        np.testing.assert_allclose(y, 16.0 + 219.0 * 128.0 / 255.0, atol=1e-9)

    def test_grayscale_formula_everywhere(self):
        rng = np.random.default_rng(0)
        v = rng.uniform(0, 255, size=(16, 16))
        img = np.stack([v, v, v], axis=-1)
        np.testing.assert_allclose(
            rgb_to_y(img), 16.0 + 219.0 * v / 255.0, atol=1e-9
        )

    def test_rejects_bad_shape(self):
        with pytest.raises(ShapeError):
            rgb_to_y(np.zeros((4, 4)))


class TestCropCenter:
    def test_identity_when_same_size(self):
        img = np.arange(16, dtype=float).reshape(4, 4)
        np.testing.assert_array_equal(crop_center(img, 4, 4), img)

    def test_symmetric_center(self):
        img = np.arange(25, dtype=float).reshape(5, 5)
        np.testing.assert_array_equal(crop_center(img, 3, 3), img[1:4, 1:4])

    def test_odd_leftover_floors_top_left(self):
        img = np.arange(16, dtype=float).reshape(4, 4)
        np.testing.assert_array_equal(crop_center(img, 3, 3), img[0:3, 0:3])

    def test_idempotent(self):
        rng = np.random.default_rng(1)
        img = rng.uniform(0, 255, size=(9, 7))
        once = crop_center(img, 5, 4)
        np.testing.assert_array_equal(crop_center(once, 5, 4), once)

    def test_too_large_raises(self):
        with pytest.raises(ShapeError):
            crop_center(np.zeros((4, 4)), 5, 4)


class TestSampleBilinear:
    def test_integer_coordinates_exact(self):
        rng = np.random.default_rng(2)
        img = rng.uniform(0, 255, size=(6, 8))
        cols, rows = np.meshgrid(np.arange(8), np.arange(6))
        np.testing.assert_array_equal(
            sample_bilinear(img, cols.astype(float), rows.astype(float)), img
        )

    def test_midpoint_average(self):
        img = np.array([[2.0, 8.0]])
        assert sample_bilinear(img, 0.5, 0.0) == pytest.approx(5.0)

    def test_out_of_bounds_clamps(self):
        img = np.arange(12, dtype=float).reshape(3, 4)
        assert sample_bilinear(img, -5.0, -5.0) == img[0, 0]
        assert sample_bilinear(img, 100.0, 100.0) == img[-1, -1]

    def test_scalar_returns_float(self):
        img = np.ones((3, 3))
        assert isinstance(sample_bilinear(img, 1.2, 0.7), float)


class TestPngIO:
    def test_roundtrip_gray(self, tmp_path):
        rng = np.random.default_rng(3)
        img = np.floor(rng.uniform(0, 256, size=(11, 13)))
        path = tmp_path / "g.png"
        save_image(path, img)
        np.testing.assert_array_equal(load_image(path), img)

    def test_roundtrip_rgb_and_y(self, tmp_path):
        rng = np.random.default_rng(4)
        img = np.floor(rng.uniform(0, 256, size=(8, 9, 3)))
        path = tmp_path / "c.png"
        save_image(path, img)
        back = load_image(path)
        np.testing.assert_array_equal(back, img)
        np.testing.assert_allclose(load_y(path), rgb_to_y(img))

    def test_save_clamps(self, tmp_path):
        path = tmp_path / "x.png"
        save_image(path, np.array([[-20.0, 300.0]]))
        np.testing.assert_array_equal(load_image(path), [[0.0, 255.0]])
