"""Dense tensor algebra on NCHW arrays.

A "tensor" throughout this package is a C-contiguous numpy array of
shape (batch, channels, height, width) in float32 (float64 for the
gradient-checking paths).  A tensor with batch 1 reinterpreted as a
(channels) x (height*width) matrix shares the same buffer; no copies.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from . import alloc
from ._kernels import gemm_kernel
from .errors import ShapeError

RESIZE_MODES = ("nearest", "bilinear", "bicubic")


def check_nchw(f: np.ndarray, name: str = "tensor") -> np.ndarray:
    if f.ndim != 4:
        raise ShapeError(f"{name} must be 4-D NCHW, got shape {f.shape}")
    if f.dtype not in (np.float32, np.float64):
        raise ShapeError(f"{name} must be float32 or float64, got {f.dtype}")
    return np.ascontiguousarray(f)


def as_matrix(f: np.ndarray) -> np.ndarray:
    """View a single-item tensor as a (c, h*w) matrix without copying."""
    if f.shape[0] != 1:
        raise ShapeError(f"matrix view requires batch 1, got {f.shape[0]}")
    n, c, h, w = f.shape
    return f.reshape(c, h * w)


def gemm(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product with deterministic ascending-index accumulation."""
    if a.ndim != 2 or b.ndim != 2:
        raise ShapeError(f"gemm needs matrices, got {a.shape} and {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"gemm inner dimensions disagree: {a.shape} x {b.shape}")
    if a.dtype != b.dtype:
        raise ShapeError(f"gemm dtype mismatch: {a.dtype} vs {b.dtype}")
    out = np.zeros((a.shape[0], b.shape[1]), dtype=a.dtype)
    gemm_kernel(np.ascontiguousarray(a), np.ascontiguousarray(b), out)
    return out


def zero_pad(f: np.ndarray, pad: int) -> np.ndarray:
    f = check_nchw(f)
    if pad == 0:
        return f
    return np.pad(f, ((0, 0), (0, 0), (pad, pad), (pad, pad)))


def relu(f: np.ndarray) -> np.ndarray:
    return np.maximum(f, 0)


def pixel_shuffle(f: np.ndarray, s: int) -> np.ndarray:
    """(n, c, h, w) -> (n, c/s^2, h*s, w*s) sub-pixel rearrangement."""
    f = check_nchw(f)
    n, c, h, w = f.shape
    if s < 1 or c % (s * s) != 0:
        raise ShapeError(f"channels {c} not divisible by {s}^2")
    c2 = c // (s * s)
    out = f.reshape(n, c2, s, s, h, w).transpose(0, 1, 4, 2, 5, 3)
    return np.ascontiguousarray(out.reshape(n, c2, h * s, w * s))


def pixel_unshuffle(f: np.ndarray, s: int) -> np.ndarray:
    """Exact index-inverse of pixel_shuffle."""
    f = check_nchw(f)
    n, c, h, w = f.shape
    if s < 1 or h % s != 0 or w % s != 0:
        raise ShapeError(f"spatial size {h}x{w} not divisible by {s}")
    h2, w2 = h // s, w // s
    out = f.reshape(n, c, h2, s, w2, s).transpose(0, 1, 3, 5, 2, 4)
    return np.ascontiguousarray(out.reshape(n, c * s * s, h2, w2))


def _cubic_keys(x: np.ndarray) -> np.ndarray:
    # Keys kernel with a = -0.5
    a = -0.5
    ax = np.abs(x)
    out = np.where(
        ax <= 1.0,
        (a + 2.0) * ax**3 - (a + 3.0) * ax**2 + 1.0,
        np.where(ax < 2.0, a * ax**3 - 5.0 * a * ax**2 + 8.0 * a * ax - 4.0 * a, 0.0),
    )
    return out


def _triangle(x: np.ndarray) -> np.ndarray:
    return np.maximum(0.0, 1.0 - np.abs(x))


@lru_cache(maxsize=256)
def resample_matrix(in_size: int, out_size: int, mode: str) -> np.ndarray:
    """(out_size, in_size) float64 interpolation weights, half-pixel centers.

    Out-of-range taps are clamped to the edge pixel (replication).  For
    bicubic downscaling the kernel support is widened by the scale
    factor, which performs the antialiasing prefilter.
    """
    if mode not in RESIZE_MODES:
        raise ShapeError(f"unknown resize mode {mode!r}")
    weights = np.zeros((out_size, in_size), dtype=np.float64)
    scale = in_size / out_size
    if mode == "nearest":
        src = np.floor((np.arange(out_size) + 0.5) * scale).astype(np.int64)
        src = np.clip(src, 0, in_size - 1)
        weights[np.arange(out_size), src] = 1.0
        return weights
    kernel, support = (_triangle, 1.0) if mode == "bilinear" else (_cubic_keys, 2.0)
    fscale = max(1.0, scale) if mode == "bicubic" else 1.0
    for j in range(out_size):
        center = (j + 0.5) * scale - 0.5
        lo = int(np.floor(center - support * fscale)) + 1
        hi = int(np.ceil(center + support * fscale))
        taps = np.arange(lo, hi + 1)
        w = kernel((taps - center) / fscale)
        w = w / w.sum()
        idx = np.clip(taps, 0, in_size - 1)
        np.add.at(weights[j], idx, w)
    return weights


def resize(f: np.ndarray, out_h: int, out_w: int, mode: str) -> np.ndarray:
    """Separable resampling of every channel to (out_h, out_w)."""
    f = check_nchw(f)
    if out_h < 1 or out_w < 1:
        raise ShapeError(f"target size must be positive, got {out_h}x{out_w}")
    n, c, h, w = f.shape
    wh = resample_matrix(h, out_h, mode).astype(f.dtype)
    ww = resample_matrix(w, out_w, mode).astype(f.dtype)
    out = np.matmul(np.matmul(wh, f), ww.T)
    return np.ascontiguousarray(out)


def resize_adjoint(g: np.ndarray, in_h: int, in_w: int, mode: str) -> np.ndarray:
    """Transpose of the resize(. , out_h, out_w, mode) linear map."""
    g = check_nchw(g)
    out_h, out_w = g.shape[2], g.shape[3]
    wh = resample_matrix(in_h, out_h, mode).astype(g.dtype)
    ww = resample_matrix(in_w, out_w, mode).astype(g.dtype)
    return np.ascontiguousarray(np.matmul(np.matmul(wh.T, g), ww))
