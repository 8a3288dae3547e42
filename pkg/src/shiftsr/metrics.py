"""Y-channel PSNR and SSIM (BT.601 studio-swing luma, 64-bit math)."""
from __future__ import annotations

import numpy as np

from .errors import ShapeError

# ITU-R BT.601 studio-swing luma coefficients for R,G,B in [0,1]
_Y_COEF = np.array([65.481, 128.553, 24.966], dtype=np.float64)
_Y_OFFSET = 16.0

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
_K1, _K2, _L = 0.01, 0.03, 255.0


def rgb_to_y(img: np.ndarray) -> np.ndarray:
    """(3, h, w) RGB in [0,1] -> (h, w) float64 luma in [16, 235]."""
    if img.ndim != 3 or img.shape[0] != 3:
        raise ShapeError(f"expected (3, h, w) image, got {img.shape}")
    img = img.astype(np.float64)
    return _Y_OFFSET + np.tensordot(_Y_COEF, img, axes=1)


def quantized_y(img: np.ndarray) -> np.ndarray:
    """Benchmark-protocol luma: clamp to [0,1], round-trip through 8-bit
    (round half up), then convert to Y."""
    q = np.floor(np.clip(img, 0.0, 1.0) * 255.0 + 0.5) / 255.0
    return rgb_to_y(q)


def _crop(a: np.ndarray, border: int) -> np.ndarray:
    if border == 0:
        return a
    if a.shape[0] <= 2 * border or a.shape[1] <= 2 * border:
        raise ShapeError(f"border crop {border} leaves no pixels of {a.shape}")
    return a[border:-border, border:-border]


def psnr(a: np.ndarray, b: np.ndarray, border_crop: int = 0) -> float:
    """10*log10(255^2 / MSE) in dB; +inf when the images are identical."""
    if a.shape != b.shape:
        raise ShapeError(f"psnr shape mismatch: {a.shape} vs {b.shape}")
    a = _crop(a.astype(np.float64), border_crop)
    b = _crop(b.astype(np.float64), border_crop)
    mse = np.mean((a - b) ** 2)
    if mse == 0.0:
        return float("inf")
    return float(10.0 * np.log10(255.0 ** 2 / mse))


def _gaussian_window(size: int, sigma: float) -> np.ndarray:
    x = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    g = np.exp(-(x ** 2) / (2.0 * sigma ** 2))
    return g / g.sum()


def _filter_valid(img: np.ndarray, win: np.ndarray) -> np.ndarray:
    """Separable correlation, valid positions only."""
    k = win.size
    h, w = img.shape
    rows = np.zeros((h, w - k + 1), dtype=np.float64)
    for i in range(k):
        rows += win[i] * img[:, i:i + w - k + 1]
    out = np.zeros((h - k + 1, w - k + 1), dtype=np.float64)
    for i in range(k):
        out += win[i] * rows[i:i + h - k + 1]
    return out


def ssim(a: np.ndarray, b: np.ndarray, border_crop: int = 0) -> float:
    """Mean SSIM over valid 11x11 Gaussian windows (sigma 1.5, L=255)."""
    if a.shape != b.shape:
        raise ShapeError(f"ssim shape mismatch: {a.shape} vs {b.shape}")
    a = _crop(a.astype(np.float64), border_crop)
    b = _crop(b.astype(np.float64), border_crop)
    if min(a.shape) < SSIM_WINDOW:
        raise ShapeError(f"image {a.shape} smaller than SSIM window {SSIM_WINDOW}")
    win = _gaussian_window(SSIM_WINDOW, SSIM_SIGMA)
    c1 = (_K1 * _L) ** 2
    c2 = (_K2 * _L) ** 2
    mu_a = _filter_valid(a, win)
    mu_b = _filter_valid(b, win)
    var_a = _filter_valid(a * a, win) - mu_a ** 2
    var_b = _filter_valid(b * b, win) - mu_b ** 2
    cov = _filter_valid(a * b, win) - mu_a * mu_b
    num = (2 * mu_a * mu_b + c1) * (2 * cov + c2)
    den = (mu_a ** 2 + mu_b ** 2 + c1) * (var_a + var_b + c2)
    return float(np.mean(num / den))
