"""User instructions and the editing operators they trigger.

Four kinds of steering input: a starting image, painted content edits with a
content label, a motion label, and an optional drag (handles, targets, and a
region mask).  An InstructionSet bundles all four with the interaction weight
lam that balances the original and edited conditions downstream.

The editing operators are exact raster transforms so their effects can be
checked to the pixel: paint is opaque overwrite, drag is a rigid translation
of the masked region by the mean handle displacement snapped to whole pixels.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ValidationError
from .kernels import stroke_mask
from .scenes import check_content_label, check_motion_label
from .tensors import check_pixels


def _check_point(x: float, y: float, width: int, height: int, what: str) -> None:
    if not (0.0 <= x <= width - 1 and 0.0 <= y <= height - 1):
        raise ValidationError(
            f"{what} ({x}, {y}) outside frame bounds {width}x{height}"
        )


@dataclass(frozen=True)
class ImageInstruction:
    """The starting image, pixels shaped (C, H, W) in [0, 1]."""

    pixels: np.ndarray

    def __post_init__(self):
        pixels = check_pixels(self.pixels, "image instruction")
        if pixels.ndim != 3:
            raise ValidationError(
                f"image instruction must be (C,H,W), got shape {pixels.shape}"
            )
        pixels.setflags(write=False)
        object.__setattr__(self, "pixels", pixels)

    @property
    def shape(self) -> tuple[int, int, int]:
        return tuple(self.pixels.shape)


@dataclass(frozen=True)
class Stroke:
    """One painted polyline: opaque disc brush of the given radius and color."""

    polyline: tuple[tuple[float, float], ...]
    radius: float
    color: tuple[float, ...]

    def __post_init__(self):
        if not self.polyline:
            raise ValidationError("stroke polyline needs at least one point")
        if self.radius <= 0.0:
            raise ValidationError(f"stroke radius must be positive, got {self.radius}")
        if not self.color:
            raise ValidationError("stroke color needs at least one channel")
        for v in self.color:
            if not 0.0 <= v <= 1.0:
                raise ValidationError(f"stroke color value {v} outside [0, 1]")


@dataclass(frozen=True)
class ContentInstruction:
    text: str
    strokes: tuple[Stroke, ...] = ()

    def __post_init__(self):
        check_content_label(self.text)


@dataclass(frozen=True)
class MotionInstruction:
    motion: str
    magnitude: Optional[float] = None

    def __post_init__(self):
        check_motion_label(self.motion)
        if self.magnitude is not None and self.magnitude <= 0.0:
            raise ValidationError(
                f"motion magnitude must be positive, got {self.magnitude}"
            )


@dataclass(frozen=True)
class TrajectoryInstruction:
    """A drag: handle points, matching targets, and the region mask to move."""

    handles: tuple[tuple[float, float], ...]
    targets: tuple[tuple[float, float], ...]
    mask: np.ndarray

    def __post_init__(self):
        mask = np.asarray(self.mask)
        if mask.ndim != 2:
            raise ValidationError(f"mask must be 2-D, got shape {mask.shape}")
        if mask.dtype != np.bool_:
            values = np.unique(mask)
            if not np.all(np.isin(values, (0, 1))):
                raise ValidationError("mask must be binary (0/1 or bool)")
            mask = mask.astype(np.bool_)
        if not mask.any():
            raise ValidationError("trajectory mask is empty")
        mask.setflags(write=False)
        object.__setattr__(self, "mask", mask)
        if not self.handles:
            raise ValidationError("trajectory needs at least one handle")
        if len(self.handles) != len(self.targets):
            raise ValidationError(
                f"handles and targets must pair up, got {len(self.handles)} "
                f"vs {len(self.targets)}"
            )
        h, w = mask.shape
        for i, (x, y) in enumerate(self.handles):
            _check_point(x, y, w, h, f"handle {i}")
            if not mask[int(round(y)), int(round(x))]:
                raise ValidationError(f"handle {i} ({x}, {y}) lies outside the mask")
        # Targets may lie outside the frame: they are gesture endpoints, and a
        # drag past the edge simply pushes pixels off-frame.  They still have
        # to be finite numbers.
        for i, (x, y) in enumerate(self.targets):
            if not (np.isfinite(x) and np.isfinite(y)):
                raise ValidationError(f"target {i} ({x}, {y}) must be finite")

    def displacement(self) -> tuple[int, int]:
        """Mean target-minus-handle shift, snapped to whole pixels."""
        handles = np.asarray(self.handles, dtype=np.float64)
        targets = np.asarray(self.targets, dtype=np.float64)
        d = (targets - handles).mean(axis=0)
        return (int(np.rint(d[0])), int(np.rint(d[1])))


@dataclass(frozen=True)
class InstructionSet:
    image: ImageInstruction
    content: ContentInstruction
    motion: MotionInstruction
    trajectory: Optional[TrajectoryInstruction] = None
    lam: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise ValidationError(f"lam must lie in [0, 1], got {self.lam}")
        c, h, w = self.image.shape
        for s, stroke in enumerate(self.content.strokes):
            if len(stroke.color) != c:
                raise ValidationError(
                    f"stroke {s} color has {len(stroke.color)} channels, image has {c}"
                )
            for x, y in stroke.polyline:
                _check_point(x, y, w, h, f"stroke {s} point")
        if self.trajectory is not None and self.trajectory.mask.shape != (h, w):
            raise ValidationError(
                f"trajectory mask shape {self.trajectory.mask.shape} does not "
                f"match image {h}x{w}"
            )


def apply_paint(image: np.ndarray, strokes: Sequence[Stroke]) -> np.ndarray:
    """Stamp each stroke onto the image in order; later strokes overwrite."""
    image = check_pixels(image, "image")
    if image.ndim != 3:
        raise ValidationError(f"apply_paint expects (C,H,W), got {image.shape}")
    c, h, w = image.shape
    out = image.copy()
    for s, stroke in enumerate(strokes):
        if len(stroke.color) != c:
            raise ValidationError(
                f"stroke {s} color has {len(stroke.color)} channels, image has {c}"
            )
        points = stroke.polyline
        for x, y in points:
            _check_point(x, y, w, h, f"stroke {s} point")
        if len(points) == 1:
            points = (points[0], points[0])
        segments = np.asarray(
            [(*points[i], *points[i + 1]) for i in range(len(points) - 1)],
            dtype=np.float64,
        )
        mask = stroke_mask(h, w, segments, float(stroke.radius))
        color = np.asarray(stroke.color, dtype=np.float64)
        out[:, mask] = color[:, None]
    return out


def apply_trajectory(
    image: np.ndarray, trajectory: TrajectoryInstruction, background: Sequence[float]
) -> np.ndarray:
    """Translate the masked region by the snapped mean displacement.

    Vacated pixels take the background color; pixels pushed past the frame
    edge are dropped.  Zero displacement reproduces the input exactly because
    the paste restores every vacated value.
    """
    image = check_pixels(image, "image")
    if image.ndim != 3:
        raise ValidationError(f"apply_trajectory expects (C,H,W), got {image.shape}")
    c, h, w = image.shape
    if trajectory.mask.shape != (h, w):
        raise ValidationError(
            f"mask shape {trajectory.mask.shape} does not match image {h}x{w}"
        )
    bg = np.asarray(background, dtype=np.float64)
    if bg.shape != (c,):
        raise ValidationError(f"background must have {c} channels, got {bg.shape}")
    if np.any(bg < 0.0) or np.any(bg > 1.0):
        raise ValidationError("background values must lie in [0, 1]")
    dx, dy = trajectory.displacement()
    ys, xs = np.nonzero(trajectory.mask)
    out = image.copy()
    out[:, ys, xs] = bg[:, None]
    ny = ys + dy
    nx = xs + dx
    keep = (ny >= 0) & (ny < h) & (nx >= 0) & (nx < w)
    out[:, ny[keep], nx[keep]] = image[:, ys[keep], xs[keep]]
    return out


@dataclass(frozen=True)
class ImageCondition:
    """Inputs the image stage consumes: starting pixels plus content edits."""

    pixels: np.ndarray
    text: str
    strokes: tuple[Stroke, ...]


@dataclass(frozen=True)
class VideoCondition:
    """Inputs the video stage consumes: motion plus optional drag and lam."""

    motion: str
    magnitude: Optional[float]
    trajectory: Optional[TrajectoryInstruction]
    lam: float


@dataclass(frozen=True)
class CompiledConditions:
    image_condition: ImageCondition
    video_condition: VideoCondition


def compile_instructions(instructions: InstructionSet) -> CompiledConditions:
    """Group the set into per-stage conditions; a pure projection."""
    return CompiledConditions(
        image_condition=ImageCondition(
            pixels=instructions.image.pixels,
            text=instructions.content.text,
            strokes=instructions.content.strokes,
        ),
        video_condition=VideoCondition(
            motion=instructions.motion.motion,
            magnitude=instructions.motion.magnitude,
            trajectory=instructions.trajectory,
            lam=instructions.lam,
        ),
    )
