import numpy as np
import pytest

from zoomsr import (
    LaplacianPyramid,
    ShapeError,
    decompose,
    gauss_down,
    gauss_up,
    gauss_up_adjoint,
    reconstruct,
)

KERNEL = np.array([1.0, 4.0, 6.0, 4.0, 1.0]) / 16.0


def brute_down(img):
    """Dense 2-D convolution with replicate borders, then decimate."""
    h, w = img.shape
    xp = np.pad(img, 2, mode="edge")
    k2d = np.outer(KERNEL, KERNEL)
    out = np.zeros_like(img)
    for i in range(h):
        for j in range(w):
            out[i, j] = np.sum(xp[i:i + 5, j:j + 5] * k2d)
    return out[::2, ::2]


def brute_up(img, out_h, out_w):
    """Replicate-extend, zero-insert, dense convolve with the gain-2 kernel."""
    m, n = img.shape
    ext = np.pad(img, 2, mode="edge")
    zi = np.zeros((2 * (m + 4) - 1, 2 * (n + 4) - 1))
    zi[::2, ::2] = ext
    k = KERNEL * 2.0
    k2d = np.outer(k, k)
    full = np.zeros_like(zi)
    zp = np.pad(zi, 2)
    for i in range(zi.shape[0]):
        for j in range(zi.shape[1]):
            full[i, j] = np.sum(zp[i:i + 5, j:j + 5] * k2d)
    # source sample i sits at zero-inserted position 2*(i + 2)
    return full[4:4 + out_h, 4:4 + out_w].copy()


class TestGaussDown:
    def test_constant_preserved(self):
        out = gauss_down(np.full((10, 7), 3.25))
        assert out.shape == (5, 4)
        np.testing.assert_allclose(out, 3.25, atol=1e-12)

    def test_single_bright_pixel_2x2(self):
        img = np.zeros((2, 2))
        img[0, 0] = 16.0
        out = gauss_down(img)
        # Replicate-padded rows: [16,16,16,0,0] -> (1+4+6)*16/16 = 11 per axis
        assert out.shape == (1, 1)
        np.testing.assert_allclose(out[0, 0], 16.0 * (11.0 / 16.0) ** 2)

    def test_matches_bruteforce_on_ramp(self):
        ys, xs = np.mgrid[0:8, 0:8].astype(float)
        img = 3.0 * xs + 2.0 * ys
        np.testing.assert_allclose(gauss_down(img), brute_down(img), atol=1e-12)

    def test_matches_bruteforce_random_odd(self):
        rng = np.random.default_rng(5)
        img = rng.uniform(0, 255, size=(9, 12))
        np.testing.assert_allclose(gauss_down(img), brute_down(img), atol=1e-12)

    def test_too_small_rejected(self):
        with pytest.raises(ShapeError):
            gauss_down(np.zeros((1, 5)))


class TestGaussUp:
    def test_constant_preserved(self):
        out = gauss_up(np.full((5, 4), 2.5), 9, 8)
        assert out.shape == (9, 8)
        np.testing.assert_allclose(out, 2.5, atol=1e-12)

    def test_down_then_up_constant_roundtrip(self):
        img = np.full((12, 12), 7.0)
        up = gauss_up(gauss_down(img), 12, 12)
        np.testing.assert_allclose(up, 7.0, atol=1e-12)

    def test_impulse_matches_bruteforce(self):
        img = np.zeros((4, 4))
        img[1, 2] = 1.0
        np.testing.assert_allclose(gauss_up(img, 7, 8), brute_up(img, 7, 8), atol=1e-14)

    def test_random_matches_bruteforce(self):
        rng = np.random.default_rng(6)
        img = rng.uniform(-5, 5, size=(5, 7))
        for out_h, out_w in ((9, 13), (10, 14), (9, 14), (10, 13)):
            np.testing.assert_allclose(
                gauss_up(img, out_h, out_w), brute_up(img, out_h, out_w), atol=1e-13
            )

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ShapeError):
            gauss_up(np.zeros((5, 5)), 12, 10)

    def test_adjoint_identity(self):
        rng = np.random.default_rng(7)
        for m, n, oh, ow in ((6, 5, 11, 10), (4, 4, 8, 8), (7, 3, 13, 5)):
            a = rng.normal(size=(m, n))
            g = rng.normal(size=(oh, ow))
            lhs = np.sum(gauss_up(a, oh, ow) * g)
            rhs = np.sum(a * gauss_up_adjoint(g, m, n))
            assert lhs == pytest.approx(rhs, rel=1e-12)


class TestDecomposeReconstruct:
    def test_constant_image(self):
        pyr = decompose(np.full((16, 16), 9.0))
        np.testing.assert_allclose(pyr.s0, 0.0, atol=1e-12)
        np.testing.assert_allclose(pyr.s1, 0.0, atol=1e-12)
        np.testing.assert_allclose(pyr.s2, 9.0, atol=1e-12)

    def test_roundtrip_exact_16x16(self):
        rng = np.random.default_rng(8)
        img = rng.uniform(0, 255, size=(16, 16))
        np.testing.assert_allclose(reconstruct(decompose(img)), img, atol=1e-9)

    def test_roundtrip_odd_sizes(self):
        rng = np.random.default_rng(9)
        for shape in ((5, 5), (7, 4), (4, 7), (13, 29), (31, 17)):
            img = rng.uniform(0, 255, size=shape)
            np.testing.assert_allclose(reconstruct(decompose(img)), img, atol=1e-9)

    def test_dimension_chain(self):
        pyr = decompose(np.zeros((37, 53)))
        assert pyr.s0.shape == (37, 53)
        assert pyr.s1.shape == (19, 27)
        assert pyr.s2.shape == (10, 14)

    def test_zero_residuals_reconstruct_constant(self):
        pyr = LaplacianPyramid(
            s0=np.zeros((8, 8)), s1=np.zeros((4, 4)), s2=np.full((2, 2), 4.0)
        )
        np.testing.assert_allclose(reconstruct(pyr), 4.0, atol=1e-12)

    def test_linearity(self):
        rng = np.random.default_rng(10)
        x = rng.uniform(0, 255, size=(20, 24))
        y = rng.uniform(0, 255, size=(20, 24))
        a, b = 0.7, -1.3
        px, py = decompose(x), decompose(y)
        combo = decompose(a * x + b * y)
        for lc, lx, ly in zip(combo.levels, px.levels, py.levels):
            np.testing.assert_allclose(lc, a * lx + b * ly, atol=1e-9)
        mix = LaplacianPyramid(
            s0=a * px.s0 + b * py.s0,
            s1=a * px.s1 + b * py.s1,
            s2=a * px.s2 + b * py.s2,
        )
        np.testing.assert_allclose(
            reconstruct(mix), a * reconstruct(px) + b * reconstruct(py), atol=1e-9
        )

    def test_too_small_rejected(self):
        with pytest.raises(ShapeError):
            decompose(np.zeros((3, 8)))

    def test_bad_chain_rejected(self):
        with pytest.raises(ShapeError):
            LaplacianPyramid(
                s0=np.zeros((8, 8)), s1=np.zeros((5, 4)), s2=np.zeros((2, 2))
            )
