"""Synthetic blob scenes: the worlds the engine is verified against.

A scene is a handful of soft discs drifting over a flat background.  Content
and motion conditions come from small closed vocabularies instead of free
text; each label picks a family of scenes, and a seed picks one member.
Everything here is deterministic and cheap enough to render inside tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import CentroidUndefinedError, ValidationError
from .kernels import render_blobs
from .tensors import check_pixels

CONTENT_LABELS = ("one_blob", "two_blobs", "three_blobs", "big_blob")
MOTION_LABELS = ("static", "drift_right", "drift_down", "drift_diag")

# Unit direction of each motion family, in pixels per frame at magnitude 1.
MOTION_VELOCITIES = {
    "static": (0.0, 0.0),
    "drift_right": (1.0, 0.0),
    "drift_down": (0.0, 1.0),
    "drift_diag": (1.0, 1.0),
}

_BLOB_COUNTS = {"one_blob": 1, "two_blobs": 2, "three_blobs": 3, "big_blob": 1}

# Multi-blob scenes keep their blobs at least this many radii apart so that
# a two-blob scene never collapses into what reads as a single bright lump.
BLOB_SEPARATION_FACTOR = 3.0
_PLACEMENT_TRIES = 200

FOREGROUND_EPS = 1e-9


def check_content_label(label: str) -> str:
    if label not in CONTENT_LABELS:
        raise ValidationError(
            f"unknown content label {label!r}; expected one of {CONTENT_LABELS}"
        )
    return label


def check_motion_label(label: str) -> str:
    if label not in MOTION_LABELS:
        raise ValidationError(
            f"unknown motion label {label!r}; expected one of {MOTION_LABELS}"
        )
    return label


@dataclass(frozen=True)
class Blob:
    """One soft disc: position and velocity are (x, y) in pixels."""

    center: tuple[float, float]
    velocity: tuple[float, float]
    radius: float
    intensity: tuple[float, ...]

    def __post_init__(self):
        if self.radius <= 0.0:
            raise ValidationError(f"blob radius must be positive, got {self.radius}")
        if not self.intensity:
            raise ValidationError("blob intensity needs at least one channel")
        for v in self.intensity:
            if not 0.0 <= v <= 1.0:
                raise ValidationError(f"blob intensity {v} outside [0, 1]")


@dataclass(frozen=True)
class SceneSpec:
    blobs: tuple[Blob, ...]
    background: tuple[float, ...]
    content_label: str
    motion_label: str

    def __post_init__(self):
        check_content_label(self.content_label)
        check_motion_label(self.motion_label)
        if not self.background:
            raise ValidationError("background needs at least one channel")
        for v in self.background:
            if not 0.0 <= v <= 1.0:
                raise ValidationError(f"background value {v} outside [0, 1]")
        for blob in self.blobs:
            if len(blob.intensity) != len(self.background):
                raise ValidationError(
                    "blob intensity channel count must match background"
                )

    @property
    def channels(self) -> int:
        return len(self.background)


@dataclass(frozen=True)
class FrameStack:
    """Rendered or generated video: frames shaped (N_F, C, H, W) in [0, 1]."""

    frames: np.ndarray
    frame_rate: float = 8.0

    def __post_init__(self):
        frames = check_pixels(self.frames, "frames")
        if frames.ndim != 4:
            raise ValidationError(f"frames must be (N,C,H,W), got {frames.shape}")
        if self.frame_rate <= 0.0:
            raise ValidationError(f"frame_rate must be positive, got {self.frame_rate}")
        frames.setflags(write=False)
        object.__setattr__(self, "frames", frames)

    @property
    def num_frames(self) -> int:
        return int(self.frames.shape[0])

    def frame(self, index: int) -> np.ndarray:
        return self.frames[index]


def sample_scene(
    content_label: str,
    motion_label: str,
    seed: int,
    height: int = 32,
    width: int = 32,
    channels: int = 3,
    background=0.1,
) -> SceneSpec:
    """Draw one member of the (content, motion) family, deterministically.

    The rng is keyed on the seed and both label indices so that changing any
    one of them changes the draw.  background may be a single level or one
    value per channel.
    """
    content_label = check_content_label(content_label)
    motion_label = check_motion_label(motion_label)
    bg = np.atleast_1d(np.asarray(background, dtype=np.float64))
    if bg.shape == (1,):
        bg = np.full(channels, bg[0])
    elif bg.shape != (channels,):
        raise ValidationError(
            f"background must be scalar or {channels}-channel, got shape {bg.shape}"
        )
    rng = np.random.default_rng(
        [int(seed), CONTENT_LABELS.index(content_label), MOTION_LABELS.index(motion_label)]
    )
    count = _BLOB_COUNTS[content_label]
    # Radius and brightness ranges are deliberately tight so the families are
    # recognizable: total foreground mass then orders the vocabulary
    # (one < two < three < big) regardless of where the blobs happen to land.
    # Positions stay fully random within the margins.
    if content_label == "big_blob":
        radius_lo, radius_hi = 6.0, 7.0
    else:
        radius_lo, radius_hi = 2.8, 3.4

    direction = MOTION_VELOCITIES[motion_label]
    if motion_label == "static":
        velocity = (0.0, 0.0)
    else:
        speed = float(rng.uniform(0.5, 1.5))
        velocity = (direction[0] * speed, direction[1] * speed)

    blobs = []
    placed: list[tuple[float, float]] = []
    for _ in range(count):
        radius = float(rng.uniform(radius_lo, radius_hi))
        margin = min(2.0 * radius, 0.45 * min(height, width))
        min_sep = BLOB_SEPARATION_FACTOR * radius
        # Rejection-sample a center away from the blobs already placed; if the
        # frame is too crowded to satisfy the separation, keep the best try.
        best = None
        best_dist = -1.0
        for _attempt in range(_PLACEMENT_TRIES):
            cx = float(rng.uniform(margin, width - 1 - margin))
            cy = float(rng.uniform(margin, height - 1 - margin))
            dist = min(
                (float(np.hypot(cx - px, cy - py)) for px, py in placed),
                default=float("inf"),
            )
            if dist >= min_sep:
                best = (cx, cy)
                break
            if dist > best_dist:
                best_dist = dist
                best = (cx, cy)
        placed.append(best)
        intensity = tuple(float(v) for v in rng.uniform(0.7, 0.9, size=channels))
        blobs.append(
            Blob(center=best, velocity=velocity, radius=radius, intensity=intensity)
        )
    return SceneSpec(
        blobs=tuple(blobs),
        background=tuple(float(v) for v in bg),
        content_label=content_label,
        motion_label=motion_label,
    )


def render_scene_frame(
    scene: SceneSpec, frame_index: int, height: int, width: int
) -> np.ndarray:
    """Render frame ``frame_index`` (1-based): blobs at center + (i-1)*velocity."""
    if frame_index < 1:
        raise ValidationError(f"frame_index is 1-based, got {frame_index}")
    if height <= 0 or width <= 0:
        raise ValidationError("frame size must be positive")
    c = scene.channels
    background = np.asarray(scene.background, dtype=np.float64)
    if not scene.blobs:
        out = np.empty((c, height, width), dtype=np.float64)
        out[:] = background[:, None, None]
        return out
    step = float(frame_index - 1)
    centers = np.asarray(
        [
            (b.center[0] + step * b.velocity[0], b.center[1] + step * b.velocity[1])
            for b in scene.blobs
        ],
        dtype=np.float64,
    )
    radii = np.asarray([b.radius for b in scene.blobs], dtype=np.float64)
    intensities = np.asarray([b.intensity for b in scene.blobs], dtype=np.float64)
    return render_blobs(height, width, centers, radii, intensities, background)


def render_frames(
    scene: SceneSpec, num_frames: int, height: int, width: int, frame_rate: float = 8.0
) -> FrameStack:
    if num_frames < 1:
        raise ValidationError(f"num_frames must be >= 1, got {num_frames}")
    frames = np.stack(
        [render_scene_frame(scene, i, height, width) for i in range(1, num_frames + 1)]
    )
    return FrameStack(frames=frames, frame_rate=frame_rate)


def centroid(image: np.ndarray, background: Sequence[float]) -> tuple[float, float]:
    """Intensity-weighted mean position of everything brighter than background.

    Weights are the channel-mean excess over the declared background level;
    an image with no such excess has no centroid and raises.
    """
    image = check_pixels(image, "image")
    if image.ndim != 3:
        raise ValidationError(f"centroid expects (C,H,W), got shape {image.shape}")
    bg = np.asarray(background, dtype=np.float64)
    if bg.shape != (image.shape[0],):
        raise ValidationError(
            f"background must have {image.shape[0]} channels, got shape {bg.shape}"
        )
    excess = np.clip(image - bg[:, None, None], 0.0, None).mean(axis=0)
    total = float(excess.sum())
    if total <= FOREGROUND_EPS:
        raise CentroidUndefinedError(
            "no foreground above background; centroid undefined"
        )
    h, w = excess.shape
    ys, xs = np.mgrid[0:h, 0:w]
    x = float((excess * xs).sum() / total)
    y = float((excess * ys).sum() / total)
    return (x, y)
