"""Hot raster kernels: blob rendering, stroke rasterization, convolution, warping.

Each kernel has a pure-numpy implementation (``*_np``) and a numba-compiled
twin (``*_jit``).  The active implementation is chosen once at import time:
numba is used when it is importable and the environment variable
``VIDEOLOOM_JIT`` is not set to ``0``/``false``/``off``/``no``.  The numpy
path is the semantic reference; ``benchmarks/bench_kernels.py`` compares the
two for agreement and speed.
"""

from __future__ import annotations

import math
import os

import numpy as np

_env = os.environ.get("VIDEOLOOM_JIT", "1").strip().lower()
JIT_REQUESTED = _env not in ("0", "false", "off", "no")

try:
    if not JIT_REQUESTED:
        raise ImportError("jit disabled via VIDEOLOOM_JIT")
    from numba import njit

    JIT_ENABLED = True
except ImportError:  # pragma: no cover - exercised via env flag
    JIT_ENABLED = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap


# blob support is truncated at SUPPORT_RADII * radius
SUPPORT_RADII = 3.0


def render_blobs_np(height, width, centers, radii, intensities, background):
    """Render gaussian blobs over a constant background.

    centers: (B, 2) float64 (x, y) pixel coordinates.
    radii: (B,) float64.  intensities: (B, C) in [0, 1].
    background: (C,) in [0, 1].  Returns a (C, H, W) image in [0, 1].
    """
    channels = background.shape[0]
    acc = np.zeros((channels, height, width), dtype=np.float64)
    ys = np.arange(height, dtype=np.float64)[:, None]
    xs = np.arange(width, dtype=np.float64)[None, :]
    for b in range(centers.shape[0]):
        cx, cy = centers[b, 0], centers[b, 1]
        r = radii[b]
        d2 = (xs - cx) ** 2 + (ys - cy) ** 2
        cut = (SUPPORT_RADII * r) ** 2
        g = np.where(d2 <= cut, np.exp(-d2 / (2.0 * r * r)), 0.0)
        for c in range(channels):
            acc[c] += (intensities[b, c] - background[c]) * g
    out = background[:, None, None] + acc
    return np.clip(out, 0.0, 1.0)


@njit(cache=True)
def _render_blobs_loop(height, width, centers, radii, intensities, background):
    channels = background.shape[0]
    out = np.empty((channels, height, width), dtype=np.float64)
    for c in range(channels):
        for y in range(height):
            for x in range(width):
                out[c, y, x] = background[c]
    for b in range(centers.shape[0]):
        cx = centers[b, 0]
        cy = centers[b, 1]
        r = radii[b]
        cut = SUPPORT_RADII * r
        y_lo = max(0, int(math.floor(cy - cut)))
        y_hi = min(height - 1, int(math.ceil(cy + cut)))
        x_lo = max(0, int(math.floor(cx - cut)))
        x_hi = min(width - 1, int(math.ceil(cx + cut)))
        for y in range(y_lo, y_hi + 1):
            for x in range(x_lo, x_hi + 1):
                d2 = (x - cx) ** 2 + (y - cy) ** 2
                if d2 <= cut * cut:
                    g = math.exp(-d2 / (2.0 * r * r))
                    for c in range(channels):
                        out[c, y, x] += (intensities[b, c] - background[c]) * g
    for c in range(channels):
        for y in range(height):
            for x in range(width):
                v = out[c, y, x]
                if v < 0.0:
                    out[c, y, x] = 0.0
                elif v > 1.0:
                    out[c, y, x] = 1.0
    return out


def render_blobs_jit(height, width, centers, radii, intensities, background):
    return _render_blobs_loop(
        height,
        width,
        np.ascontiguousarray(centers, dtype=np.float64),
        np.ascontiguousarray(radii, dtype=np.float64),
        np.ascontiguousarray(intensities, dtype=np.float64),
        np.ascontiguousarray(background, dtype=np.float64),
    )


def stroke_mask_np(height, width, segments, radius):
    """Boolean mask of pixels within ``radius`` of any segment.

    segments: (S, 4) float64 rows (x1, y1, x2, y2); zero-length rows are
    treated as points.
    """
    mask = np.zeros((height, width), dtype=np.bool_)
    ys = np.arange(height, dtype=np.float64)[:, None]
    xs = np.arange(width, dtype=np.float64)[None, :]
    r2 = radius * radius
    for s in range(segments.shape[0]):
        x1, y1, x2, y2 = segments[s]
        vx, vy = x2 - x1, y2 - y1
        vv = vx * vx + vy * vy
        if vv == 0.0:
            d2 = (xs - x1) ** 2 + (ys - y1) ** 2
        else:
            t = np.clip(((xs - x1) * vx + (ys - y1) * vy) / vv, 0.0, 1.0)
            d2 = (xs - (x1 + t * vx)) ** 2 + (ys - (y1 + t * vy)) ** 2
        mask |= d2 <= r2
    return mask


@njit(cache=True)
def _stroke_mask_loop(height, width, segments, radius):
    mask = np.zeros((height, width), dtype=np.bool_)
    r2 = radius * radius
    for s in range(segments.shape[0]):
        x1 = segments[s, 0]
        y1 = segments[s, 1]
        x2 = segments[s, 2]
        y2 = segments[s, 3]
        vx = x2 - x1
        vy = y2 - y1
        vv = vx * vx + vy * vy
        y_lo = max(0, int(math.floor(min(y1, y2) - radius)))
        y_hi = min(height - 1, int(math.ceil(max(y1, y2) + radius)))
        x_lo = max(0, int(math.floor(min(x1, x2) - radius)))
        x_hi = min(width - 1, int(math.ceil(max(x1, x2) + radius)))
        for y in range(y_lo, y_hi + 1):
            for x in range(x_lo, x_hi + 1):
                if vv == 0.0:
                    dx = x - x1
                    dy = y - y1
                else:
                    t = ((x - x1) * vx + (y - y1) * vy) / vv
                    if t < 0.0:
                        t = 0.0
                    elif t > 1.0:
                        t = 1.0
                    dx = x - (x1 + t * vx)
                    dy = y - (y1 + t * vy)
                if dx * dx + dy * dy <= r2:
                    mask[y, x] = True
    return mask


def stroke_mask_jit(height, width, segments, radius):
    return _stroke_mask_loop(
        height, width, np.ascontiguousarray(segments, dtype=np.float64), float(radius)
    )


def conv2d_same_np(x, kernel, bias):
    """2-D convolution with zero same-padding.

    x: (Cin, H, W); kernel: (Cout, Cin, k, k) with odd k; bias: (Cout,).
    """
    c_out, c_in, k, _ = kernel.shape
    _, height, width = x.shape
    pad = k // 2
    padded = np.zeros((c_in, height + 2 * pad, width + 2 * pad), dtype=np.float64)
    padded[:, pad : pad + height, pad : pad + width] = x
    out = np.empty((c_out, height, width), dtype=np.float64)
    for co in range(c_out):
        acc = np.full((height, width), bias[co], dtype=np.float64)
        for ci in range(c_in):
            for ky in range(k):
                for kx in range(k):
                    acc += kernel[co, ci, ky, kx] * padded[
                        ci, ky : ky + height, kx : kx + width
                    ]
        out[co] = acc
    return out


@njit(cache=True)
def _conv2d_same_loop(x, kernel, bias):
    c_out = kernel.shape[0]
    c_in = kernel.shape[1]
    k = kernel.shape[2]
    height = x.shape[1]
    width = x.shape[2]
    pad = k // 2
    out = np.empty((c_out, height, width), dtype=np.float64)
    for co in range(c_out):
        for y in range(height):
            for x_ in range(width):
                acc = bias[co]
                for ci in range(c_in):
                    for ky in range(k):
                        yy = y + ky - pad
                        if yy < 0 or yy >= height:
                            continue
                        for kx in range(k):
                            xx = x_ + kx - pad
                            if xx < 0 or xx >= width:
                                continue
                            acc += kernel[co, ci, ky, kx] * x[ci, yy, xx]
                out[co, y, x_] = acc
    return out


def conv2d_same_jit(x, kernel, bias):
    return _conv2d_same_loop(
        np.ascontiguousarray(x, dtype=np.float64),
        np.ascontiguousarray(kernel, dtype=np.float64),
        np.ascontiguousarray(bias, dtype=np.float64),
    )


def shift_bilinear_np(img, dx, dy):
    """Translate a (C, H, W) image by (dx, dy) pixels, edge-replicated.

    Output pixel (y, x) samples the input at (y - dy, x - dx) bilinearly;
    sample coordinates are clamped to the image, so the operator is linear
    in the pixel values.
    """
    _, height, width = img.shape
    sy = np.clip(np.arange(height, dtype=np.float64) - dy, 0.0, height - 1.0)
    sx = np.clip(np.arange(width, dtype=np.float64) - dx, 0.0, width - 1.0)
    y0 = np.floor(sy).astype(np.int64)
    x0 = np.floor(sx).astype(np.int64)
    y1 = np.minimum(y0 + 1, height - 1)
    x1 = np.minimum(x0 + 1, width - 1)
    fy = (sy - y0)[None, :, None]
    fx = (sx - x0)[None, None, :]
    a = img[:, y0[:, None], x0[None, :]]
    b = img[:, y0[:, None], x1[None, :]]
    c = img[:, y1[:, None], x0[None, :]]
    d = img[:, y1[:, None], x1[None, :]]
    return (
        a * (1.0 - fy) * (1.0 - fx)
        + b * (1.0 - fy) * fx
        + c * fy * (1.0 - fx)
        + d * fy * fx
    )


@njit(cache=True)
def _shift_bilinear_loop(img, dx, dy):
    channels = img.shape[0]
    height = img.shape[1]
    width = img.shape[2]
    out = np.empty_like(img)
    for y in range(height):
        sy = y - dy
        if sy < 0.0:
            sy = 0.0
        elif sy > height - 1.0:
            sy = height - 1.0
        y0 = int(math.floor(sy))
        y1 = min(y0 + 1, height - 1)
        fy = sy - y0
        for x in range(width):
            sx = x - dx
            if sx < 0.0:
                sx = 0.0
            elif sx > width - 1.0:
                sx = width - 1.0
            x0 = int(math.floor(sx))
            x1 = min(x0 + 1, width - 1)
            fx = sx - x0
            for c in range(channels):
                out[c, y, x] = (
                    img[c, y0, x0] * (1.0 - fy) * (1.0 - fx)
                    + img[c, y0, x1] * (1.0 - fy) * fx
                    + img[c, y1, x0] * fy * (1.0 - fx)
                    + img[c, y1, x1] * fy * fx
                )
    return out


def shift_bilinear_jit(img, dx, dy):
    return _shift_bilinear_loop(
        np.ascontiguousarray(img, dtype=np.float64), float(dx), float(dy)
    )


if JIT_ENABLED:
    render_blobs = render_blobs_jit
    stroke_mask = stroke_mask_jit
    conv2d_same = conv2d_same_jit
    shift_bilinear = shift_bilinear_jit
else:
    render_blobs = render_blobs_np
    stroke_mask = stroke_mask_np
    conv2d_same = conv2d_same_np
    shift_bilinear = shift_bilinear_np
