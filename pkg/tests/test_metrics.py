"""Y-channel PSNR/SSIM golden vectors and invariances."""
import numpy as np
import pytest

import shiftsr as s
from shiftsr.errors import ShapeError


class TestRgbToY:
    def test_endpoints(self):
        black = np.zeros((3, 2, 2), np.float64)
        white = np.ones((3, 2, 2), np.float64)
        assert np.allclose(s.rgb_to_y(black), 16.0, atol=1e-6)
        assert np.allclose(s.rgb_to_y(white), 235.0, atol=1e-6)

    def test_coefficients(self):
        r = np.zeros((3, 1, 1))
        r[0] = 1.0
        assert s.rgb_to_y(r)[0, 0] == pytest.approx(16.0 + 65.481, abs=1e-9)
        g = np.zeros((3, 1, 1))
        g[1] = 1.0
        assert s.rgb_to_y(g)[0, 0] == pytest.approx(16.0 + 128.553, abs=1e-9)

    def test_shape_error(self):
        with pytest.raises(ShapeError):
            s.rgb_to_y(np.zeros((4, 2, 2)))


class TestQuantizedY:
    def test_rounds_half_up(self):
        mid = np.full((3, 1, 1), 127.5 / 255.0)
        q = np.floor(np.clip(mid, 0, 1) * 255.0 + 0.5)
        assert q[0, 0, 0] == 128.0
        expected = 16.0 + (65.481 + 128.553 + 24.966) * (128.0 / 255.0)
        assert s.quantized_y(mid)[0, 0] == pytest.approx(expected, abs=1e-9)

    def test_clamps(self):
        img = np.array([[[2.0]], [[-1.0]], [[0.5]]])
        y = s.quantized_y(img)
        ref = 16.0 + 65.481 * 1.0 + 24.966 * (128.0 / 255.0)
        assert y[0, 0] == pytest.approx(ref, abs=1e-9)


class TestPsnr:
    def test_uniform_diff_one(self):
        a = np.zeros((16, 16))
        b = np.ones((16, 16))
        # 10*log10(255^2 / 1)
        assert s.psnr(a, b) == pytest.approx(48.130803608679344, abs=1e-9)

    def test_identical_is_inf(self):
        a = np.random.default_rng(0).random((8, 8))
        assert s.psnr(a, a.copy()) == float("inf")

    def test_symmetric(self):
        rng = np.random.default_rng(1)
        a, b = rng.random((8, 8)), rng.random((8, 8))
        assert s.psnr(a, b) == pytest.approx(s.psnr(b, a), abs=1e-12)

    def test_border_crop(self):
        a = np.zeros((6, 6))
        b = np.zeros((6, 6))
        b[0, 0] = 10.0  # error only in the border
        assert s.psnr(a, b, border_crop=1) == float("inf")
        assert s.psnr(a, b) < float("inf")

    def test_errors(self):
        with pytest.raises(ShapeError):
            s.psnr(np.zeros((4, 4)), np.zeros((4, 5)))
        with pytest.raises(ShapeError):
            s.psnr(np.zeros((4, 4)), np.zeros((4, 4)), border_crop=2)


class TestSsim:
    def test_constant_pair_golden(self):
        a = np.full((16, 16), 100.0)
        b = np.full((16, 16), 110.0)
        # zero-variance case: (2*100*110 + c1) / (100^2 + 110^2 + c1)
        c1 = (0.01 * 255.0) ** 2
        expected = (2 * 100.0 * 110.0 + c1) / (100.0 ** 2 + 110.0 ** 2 + c1)
        assert expected == pytest.approx(0.99548, abs=1e-4)
        assert s.ssim(a, b) == pytest.approx(expected, abs=1e-12)

    def test_identical_is_one(self):
        a = np.random.default_rng(2).random((16, 16)) * 255.0
        assert s.ssim(a, a.copy()) == pytest.approx(1.0, abs=1e-12)

    def test_bounded_and_symmetric(self):
        rng = np.random.default_rng(3)
        a = rng.random((20, 20)) * 255.0
        b = rng.random((20, 20)) * 255.0
        v = s.ssim(a, b)
        assert -1.0 <= v <= 1.0
        assert v == pytest.approx(s.ssim(b, a), abs=1e-12)

    def test_noise_lowers_score(self):
        rng = np.random.default_rng(4)
        a = rng.random((24, 24)) * 255.0
        small = s.ssim(a, a + rng.normal(0, 1.0, a.shape))
        large = s.ssim(a, a + rng.normal(0, 20.0, a.shape))
        assert large < small < 1.0

    def test_too_small(self):
        with pytest.raises(ShapeError):
            s.ssim(np.zeros((8, 8)), np.zeros((8, 8)))
