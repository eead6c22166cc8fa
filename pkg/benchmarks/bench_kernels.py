"""Timing harness for the hot kernels: compiled path vs plain numpy.

Runs every kernel in both variants on identical random inputs, checks the
outputs agree, and prints median wall times with the speedup.  The compiled
variants exist for interactive latency, so the interesting number is the
per-call time at engine-sized inputs, not throughput on huge arrays.

Usage:
    python3 benchmarks/bench_kernels.py [--size 32] [--reps 200]
"""

import argparse
import statistics
import sys
import time

import numpy as np

from videoloom.kernels import (
    JIT_ENABLED,
    conv2d_same_jit,
    conv2d_same_np,
    render_blobs_jit,
    render_blobs_np,
    shift_bilinear_jit,
    shift_bilinear_np,
    stroke_mask_jit,
    stroke_mask_np,
)


def median_time(fn, args, reps):
    times = []
    for _ in range(reps):
        started = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - started)
    return statistics.median(times)


def build_cases(size, rng):
    h = w = size
    centers = rng.uniform(5, size - 5, size=(4, 2))
    radii = rng.uniform(2.5, 4.0, size=4)
    intensities = rng.uniform(0.3, 0.9, size=(4, 3))
    background = np.full(3, 0.1)
    image = rng.uniform(size=(3, h, w))
    kernel = rng.standard_normal((3, 3, 3, 3))
    bias = rng.standard_normal(3)
    points = rng.uniform(3, size - 3, size=(5, 2))
    segments = np.hstack([points[:-1], points[1:]])
    return [
        (
            "render_blobs",
            render_blobs_np,
            render_blobs_jit,
            (h, w, centers, radii, intensities, background),
        ),
        (
            "stroke_mask",
            stroke_mask_np,
            stroke_mask_jit,
            (h, w, segments, 2.0),
        ),
        (
            "conv2d_same",
            conv2d_same_np,
            conv2d_same_jit,
            (image, kernel, bias),
        ),
        (
            "shift_bilinear",
            shift_bilinear_np,
            shift_bilinear_jit,
            (image, 1.25, -0.75),
        ),
    ]


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--size", type=int, default=32, help="square frame size")
    parser.add_argument("--reps", type=int, default=200, help="timed calls per kernel")
    args = parser.parse_args(argv)

    if not JIT_ENABLED:
        print(
            "note: compilation disabled (VIDEOLOOM_JIT off or numba missing); "
            "the compiled column runs the same loops uncompiled"
        )

    rng = np.random.default_rng(0)
    cases = build_cases(args.size, rng)

    mismatches = 0
    print(f"{'kernel':<16} {'numpy':>12} {'compiled':>12} {'speedup':>9}   agree")
    for name, np_fn, jit_fn, fn_args in cases:
        out_np = np_fn(*fn_args)
        jit_fn(*fn_args)  # compile before timing
        out_jit = jit_fn(*fn_args)
        agree = np.allclose(out_np, out_jit, atol=1e-12)
        mismatches += not agree
        t_np = median_time(np_fn, fn_args, args.reps)
        t_jit = median_time(jit_fn, fn_args, args.reps)
        print(
            f"{name:<16} {t_np * 1e6:>9.1f} us {t_jit * 1e6:>9.1f} us "
            f"{t_np / t_jit:>8.1f}x   {agree}"
        )
    if mismatches:
        print(f"error: {mismatches} kernel(s) disagree between variants")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
