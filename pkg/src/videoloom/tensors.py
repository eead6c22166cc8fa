"""Shared validation helpers for image/video tensors.

Latents and noise are plain float64 ndarrays shaped (C, H, W) for a single
image or (N, C, H, W) for a frame stack; pixels live in [0, 1], latents in
[-1, 1].  These helpers enforce the shape/finiteness contracts at module
boundaries.
"""

from __future__ import annotations

import numpy as np

from .errors import ValidationError


def as_array(value, name: str = "array") -> np.ndarray:
    """Coerce to a finite float64 ndarray of any positive-dimensional shape.

    The diffusion math is rank-agnostic; this is the loose check it uses.
    """
    arr = np.asarray(value, dtype=np.float64)
    if arr.ndim < 1:
        raise ValidationError("expected an array, got a scalar", name)
    if any(d <= 0 for d in arr.shape):
        raise ValidationError(f"all dimensions must be positive, got {arr.shape}", name)
    if not np.all(np.isfinite(arr)):
        raise ValidationError("array contains non-finite values", name)
    return arr


def as_tensor(value, name: str = "tensor") -> np.ndarray:
    """Coerce to float64 ndarray, checking dimensionality and finiteness."""
    arr = as_array(value, name)
    if arr.ndim not in (3, 4):
        raise ValidationError(
            f"expected a (C,H,W) or (N,C,H,W) tensor, got shape {arr.shape}", name
        )
    return arr


def check_same_shape(a: np.ndarray, b: np.ndarray, a_name: str, b_name: str) -> None:
    if a.shape != b.shape:
        raise ValidationError(
            f"shape mismatch: {a_name} {a.shape} vs {b_name} {b.shape}"
        )


def check_pixels(arr: np.ndarray, name: str = "image") -> np.ndarray:
    arr = as_tensor(arr, name)
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise ValidationError("pixel values must lie in [0, 1]", name)
    return arr
