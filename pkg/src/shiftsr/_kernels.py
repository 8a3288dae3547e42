"""Numba inner loops for GEMM and the fused shift-conv kernel.

Both kernels accumulate every output element strictly in ascending
input-channel (inner-dimension) order, so the 32-bit results are
bit-identical to a plain triple loop and to each other.  Single
threaded by design; determinism is part of the contract.
"""
from __future__ import annotations

import numpy as np
from numba import njit

# Column-block width: keeps the streamed operand block resident in L2
# while the output row segment stays in L1.
_JBLOCK = 4096
# Rows per fused tile; the scratch block is c_in * FUSED_YBLOCK * width
# floats, constant in the image height.
FUSED_YBLOCK = 16


@njit(inline="always")
def _axpy(y, a, x):
    for j in range(y.shape[0]):
        y[j] += a * x[j]


@njit(cache=True)
def gemm_kernel(a, b, out):
    """out[i,j] += sum_p a[i,p]*b[p,j], p accumulated in ascending order."""
    m, k = a.shape
    n = b.shape[1]
    for j0 in range(0, n, _JBLOCK):
        j1 = min(j0 + _JBLOCK, n)
        for i in range(m):
            orow = out[i, j0:j1]
            for p in range(k):
                _axpy(orow, a[i, p], b[p, j0:j1])


@njit(cache=True)
def fused_shift_conv_kernel(w, bias, f, steps, gdim, scratch, out):
    """Shift + 1x1 conv in one pass over a single (C,H,W) item.

    Works tile by tile: the shifted values for a FUSED_YBLOCK-row strip
    are gathered into `scratch` (zero-filling out-of-range taps exactly
    like the materialized path), then multiply-accumulated into `out`
    with the same ascending input-channel order as the GEMM.  No full
    shifted intermediate ever exists.  `out` must be zero on entry.
    """
    cout, cin = w.shape
    h = f.shape[1]
    width = f.shape[2]
    out2 = out.reshape(cout, h * width)
    yblock = scratch.shape[1] // width
    for y0 in range(0, h, yblock):
        y1 = min(y0 + yblock, h)
        seg = (y1 - y0) * width
        for ci in range(cin):
            g = ci // gdim
            sh = steps[g, 0]
            sw = steps[g, 1]
            x0 = max(0, -sw)
            x1 = min(width, width - sw)
            for y in range(y0, y1):
                row = scratch[ci, (y - y0) * width:(y - y0 + 1) * width]
                ys = y + sh
                if ys < 0 or ys >= h or x0 >= x1:
                    for x in range(width):
                        row[x] = 0.0
                else:
                    for x in range(x0):
                        row[x] = 0.0
                    for x in range(x1, width):
                        row[x] = 0.0
                    src = f[ci, ys]
                    for x in range(x0, x1):
                        row[x] = src[x + sw]
        for co in range(cout):
            orow = out2[co, y0 * width:y0 * width + seg]
            for ci in range(cin):
                _axpy(orow, w[co, ci], scratch[ci, :seg])
    for co in range(cout):
        bv = bias[co]
        orow = out2[co]
        for j in range(h * width):
            orow[j] += bv
