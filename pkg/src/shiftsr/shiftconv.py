"""Grouped spatial-shift and the shift-conv (SC) layer.

The SC layer is a 1x1 convolution whose input channels are first
translated group-wise by integer offsets; it is equivalent to a sparse
large-kernel convolution with one tap per input-channel group.  Two
implementations are provided: a naive one that materializes the
shifted tensor and a fused one that reads the input through shifted
windows inside the GEMM, bit-identical to the naive path.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import alloc
from ._kernels import FUSED_YBLOCK, fused_shift_conv_kernel, gemm_kernel
from .errors import ConfigError, ShapeError
from .tensorops import check_nchw, zero_pad

Step = tuple[int, int]


@dataclass(frozen=True)
class ShiftStepSet:
    """Ordered (row, col) shift steps; step i governs channel group i."""

    steps: tuple[Step, ...]
    pad: int

    def __post_init__(self):
        if len(self.steps) == 0:
            raise ConfigError("step set must be non-empty")
        reach = max(max(abs(sh), abs(sw)) for sh, sw in self.steps)
        if self.pad < reach:
            raise ConfigError(f"pad {self.pad} smaller than max step reach {reach}")

    def negated(self) -> "ShiftStepSet":
        """Step set of the adjoint shift (every offset negated)."""
        return ShiftStepSet(tuple((-sh, -sw) for sh, sw in self.steps), self.pad)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.steps, dtype=np.int64)


_SHIFT8: tuple[Step, ...] = (
    (0, 1), (0, -1), (1, 0), (1, 1), (1, -1), (-1, 0), (-1, 1), (-1, -1),
)

STEP_PRESETS = ("Shift4-Cross", "Shift4-Diag", "Shift8", "Shift8-Dilated", "Shift16")


def preset_steps(name: str) -> ShiftStepSet:
    """Expand a named step preset into its ShiftStepSet."""
    if name == "Shift8":
        return ShiftStepSet(_SHIFT8, pad=1)
    if name == "Shift4-Cross":
        return ShiftStepSet(((0, 1), (0, -1), (1, 0), (-1, 0)), pad=1)
    if name == "Shift4-Diag":
        return ShiftStepSet(((1, 1), (1, -1), (-1, 1), (-1, -1)), pad=1)
    if name == "Shift8-Dilated":
        return ShiftStepSet(tuple((2 * sh, 2 * sw) for sh, sw in _SHIFT8), pad=2)
    if name == "Shift16":
        dilated = tuple((2 * sh, 2 * sw) for sh, sw in _SHIFT8)
        return ShiftStepSet(_SHIFT8 + dilated, pad=2)
    raise ConfigError(f"unknown step preset {name!r}")


@dataclass(frozen=True)
class Conv1x1Weights:
    """weight: (c_out, c_in) matrix; bias: (c_out,) vector."""

    weight: np.ndarray
    bias: np.ndarray

    @property
    def c_in(self) -> int:
        return self.weight.shape[1]

    @property
    def c_out(self) -> int:
        return self.weight.shape[0]


def _group_dim(channels: int, steps: ShiftStepSet) -> int:
    g, rem = divmod(channels, len(steps.steps))
    if rem != 0:
        raise ConfigError(
            f"{channels} channels not divisible into {len(steps.steps)} shift groups"
        )
    return g


def spatial_shift(f: np.ndarray, steps: ShiftStepSet) -> np.ndarray:
    """Translate each channel group by its step, zero-filling vacated pixels.

    Zero parameters, zero arithmetic: pure re-indexing via pad-then-slice.
    """
    f = check_nchw(f)
    n, c, h, w = f.shape
    g = _group_dim(c, steps)
    pad = steps.pad
    padded = zero_pad(f, pad)
    alloc.note_alloc(padded.nbytes)
    out = np.empty_like(f)
    alloc.note_alloc(out.nbytes)
    for i, (sh, sw) in enumerate(steps.steps):
        out[:, i * g:(i + 1) * g] = padded[
            :, i * g:(i + 1) * g, pad + sh:pad + sh + h, pad + sw:pad + sw + w
        ]
    alloc.note_free(padded.nbytes)
    return out


def conv1x1(f: np.ndarray, w: Conv1x1Weights) -> np.ndarray:
    """Per-pixel channel mixing: one GEMM per batch item plus bias."""
    f = check_nchw(f)
    n, c, h, w_ = f.shape
    if c != w.c_in:
        raise ShapeError(f"conv1x1 expects {w.c_in} channels, got {c}")
    out = np.zeros((n, w.c_out, h, w_), dtype=f.dtype)
    alloc.note_alloc(out.nbytes)
    weight = np.ascontiguousarray(w.weight, dtype=f.dtype)
    for b in range(n):
        gemm_kernel(weight, f[b].reshape(c, h * w_), out[b].reshape(w.c_out, h * w_))
    out += w.bias.astype(f.dtype)[None, :, None, None]
    return out


def sc_layer_naive(f: np.ndarray, w: Conv1x1Weights, steps: ShiftStepSet) -> np.ndarray:
    """Shift first, then 1x1 conv, with the shifted tensor materialized."""
    shifted = spatial_shift(f, steps)
    out = conv1x1(shifted, w)
    alloc.note_free(shifted.nbytes)
    return out


def sc_layer_fused(f: np.ndarray, w: Conv1x1Weights, steps: ShiftStepSet) -> np.ndarray:
    """Shift + conv in one pass; bit-identical to sc_layer_naive."""
    f = check_nchw(f)
    n, c, h, w_ = f.shape
    if c != w.c_in:
        raise ShapeError(f"sc layer expects {w.c_in} channels, got {c}")
    g = _group_dim(c, steps)
    out = np.zeros((n, w.c_out, h, w_), dtype=f.dtype)
    alloc.note_alloc(out.nbytes)
    weight = np.ascontiguousarray(w.weight, dtype=f.dtype)
    bias = np.ascontiguousarray(w.bias, dtype=f.dtype)
    step_arr = steps.as_array()
    # per-tile gather buffer, constant in the image height
    scratch = np.empty((c, min(FUSED_YBLOCK, h) * w_), dtype=f.dtype)
    alloc.note_alloc(scratch.nbytes)
    for b in range(n):
        fused_shift_conv_kernel(weight, bias, f[b], step_arr, g, scratch, out[b])
    alloc.note_free(scratch.nbytes)
    return out


def sc_to_dense3x3(w: Conv1x1Weights, steps: ShiftStepSet) -> np.ndarray:
    """Equivalent dense (2*pad+1)^2 correlation kernel, one tap per channel.

    Zero-padded correlation of the result with an input equals
    sc_layer_naive on that input; used as the correctness oracle.
    """
    g = _group_dim(w.c_in, steps)
    k = 2 * steps.pad + 1
    kernel = np.zeros((w.c_out, w.c_in, k, k), dtype=w.weight.dtype)
    for ci in range(w.c_in):
        sh, sw = steps.steps[ci // g]
        kernel[:, ci, steps.pad + sh, steps.pad + sw] = w.weight[:, ci]
    return kernel
