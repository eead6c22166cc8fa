"""Desk-scale alignment metrics and latency measurement.

The embedding is deliberately tiny and has two parts.  A brightness-profile
block sorts each channel's pixel values and area-pools the sorted sequence
onto a fixed number of cells; it describes what fills the frame (how much
bright mass, spread over how large an area) no matter where it sits, which
is what separates the content vocabulary.  A layout block area-pools the
image onto a coarse spatial grid; it ties the embedding to where things sit,
so two scenes with the same content but different arrangements still get
different vectors.  Both blocks carry per-cell means and standard deviations
and the weighted concatenation is L2-normalized.  Cosine similarity between
such embeddings plays the role a learned image encoder would play at full
scale.  Scores are raw cosines in [-1, 1] and are never meant to be compared
against any published similarity scale.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import ValidationError
from .pipeline import EngineConfig, generate
from .instructions import InstructionSet
from .scenes import CONTENT_LABELS, FrameStack, check_content_label, render_scene_frame, sample_scene
from .tensors import check_pixels

EMBED_GRID = 4
PROFILE_GRID = 64
PROFILE_WEIGHT = 0.8
PROTOTYPE_RENDERS = 16
_DEGENERATE_NORM = 1e-12

# Phases reported per run, in table order; the last two are artifact extras.
LATENCY_PHASES = ("image", "content", "motion", "trajectory")
EXTRA_PHASES = ("align", "total")


@dataclass(frozen=True)
class EmbeddingVector:
    values: np.ndarray
    degenerate: bool = False

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size == 0:
            raise ValidationError(f"embedding must be a vector, got {values.shape}")
        norm = float(np.linalg.norm(values))
        if not np.isfinite(norm) or abs(norm - 1.0) > 1e-6:
            raise ValidationError(f"embedding must be unit-norm, got norm {norm}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)


def _pool_weights(size: int, grid: int) -> np.ndarray:
    """(grid, size) area weights of each grid cell along one axis.

    Cell g covers [g*size/grid, (g+1)*size/grid); pixels crossing a boundary
    contribute fractionally, so pooling commutes with integer upsampling.
    """
    weights = np.zeros((grid, size), dtype=np.float64)
    step = size / grid
    for g in range(grid):
        lo, hi = g * step, (g + 1) * step
        for p in range(int(np.floor(lo)), int(np.ceil(hi))):
            overlap = min(hi, p + 1) - max(lo, p)
            if overlap > 0:
                weights[g, p] = overlap
    return weights / step


def _cell_stats(values: np.ndarray, weights: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Weighted per-cell mean and std of a 1-D value sequence."""
    mean = weights @ values
    mean_sq = weights @ (values**2)
    std = np.sqrt(np.clip(mean_sq - mean**2, 0.0, None))
    return mean, std


def _profile_block(image: np.ndarray, grid: int) -> np.ndarray:
    """Sorted-brightness features: position-free, content-sensitive."""
    parts = []
    for channel in image:
        values = np.sort(channel.ravel())[::-1]
        weights = _pool_weights(values.size, grid)
        mean, std = _cell_stats(values, weights)
        parts.extend([mean, std])
    return np.concatenate(parts)


def _layout_block(image: np.ndarray, grid: int) -> np.ndarray:
    """Spatial grid features: where the bright mass sits."""
    _, h, w = image.shape
    wy = _pool_weights(h, grid)
    wx = _pool_weights(w, grid)
    # area-weighted E[x] and E[x^2] per (channel, cell_y, cell_x)
    mean = np.einsum("gh,chw,fw->cgf", wy, image, wx, optimize=True)
    mean_sq = np.einsum("gh,chw,fw->cgf", wy, image**2, wx, optimize=True)
    std = np.sqrt(np.clip(mean_sq - mean**2, 0.0, None))
    return np.concatenate([mean.ravel(), std.ravel()])


def _unit_or_zero(block: np.ndarray) -> np.ndarray:
    norm = float(np.linalg.norm(block))
    return block / norm if norm >= _DEGENERATE_NORM else np.zeros_like(block)


def embed(
    image: np.ndarray, grid: int = EMBED_GRID, profile_grid: int = PROFILE_GRID
) -> EmbeddingVector:
    """Brightness-profile plus layout features, unit-normalized.

    Both blocks pool with fractional-area weights, so the vector is exactly
    invariant to integer pixel replication (a 2x nearest-neighbor upsample
    embeds to the same vector).
    """
    image = check_pixels(image, "image")
    if image.ndim != 3:
        raise ValidationError(f"embed expects (C,H,W), got shape {image.shape}")
    if grid < 1 or profile_grid < 1:
        raise ValidationError(f"grids must be positive, got {grid}, {profile_grid}")
    profile = _unit_or_zero(_profile_block(image, profile_grid))
    layout = _unit_or_zero(_layout_block(image, grid))
    features = np.concatenate(
        [PROFILE_WEIGHT * profile, (1.0 - PROFILE_WEIGHT) * layout]
    )
    norm = float(np.linalg.norm(features))
    if norm < _DEGENERATE_NORM:
        fallback = np.zeros_like(features)
        fallback[0] = 1.0
        return EmbeddingVector(values=fallback, degenerate=True)
    return EmbeddingVector(values=features / norm)


def cosine(a: EmbeddingVector, b: EmbeddingVector) -> float:
    if a.values.shape != b.values.shape:
        raise ValidationError(
            f"embedding sizes differ: {a.values.shape} vs {b.values.shape}"
        )
    return float(np.dot(a.values, b.values))


def image_alignment(frames: FrameStack, reference: np.ndarray) -> float:
    """Mean cosine between each frame's embedding and the reference's."""
    ref = embed(reference)
    scores = [cosine(embed(frames.frame(i)), ref) for i in range(frames.num_frames)]
    return float(np.mean(scores))


@lru_cache(maxsize=None)
def _prototype(label: str, height: int, width: int, channels: int, background: float):
    renders = []
    for seed in range(PROTOTYPE_RENDERS):
        scene = sample_scene(
            label, "static", seed, height=height, width=width,
            channels=channels, background=background,
        )
        renders.append(embed(render_scene_frame(scene, 1, height, width)).values)
    mean = np.mean(renders, axis=0)
    norm = float(np.linalg.norm(mean))
    if norm < _DEGENERATE_NORM:
        raise ValidationError(f"degenerate prototype for label {label!r}")
    return EmbeddingVector(values=mean / norm)


def label_prototype(
    label: str,
    height: int = 32,
    width: int = 32,
    channels: int = 3,
    background: float = 0.1,
) -> EmbeddingVector:
    """Mean embedding of the label's canonical renders, renormalized."""
    check_content_label(label)
    return _prototype(label, int(height), int(width), int(channels), float(background))


def text_alignment(
    frames: FrameStack,
    label: str,
    height: int | None = None,
    width: int | None = None,
    background: float = 0.1,
) -> float:
    """Mean cosine between frame embeddings and the label's prototype."""
    check_content_label(label)
    _, c, h, w = frames.frames.shape
    proto = label_prototype(
        label,
        height=h if height is None else height,
        width=w if width is None else width,
        channels=c,
        background=background,
    )
    scores = [cosine(embed(frames.frame(i)), proto) for i in range(frames.num_frames)]
    return float(np.mean(scores))


def best_label(frames: FrameStack, background: float = 0.1) -> str:
    """Content label whose prototype the frames align with most."""
    scores = {
        label: text_alignment(frames, label, background=background)
        for label in CONTENT_LABELS
    }
    return max(scores, key=scores.get)


@dataclass(frozen=True)
class LatencyReport:
    """Median seconds per phase over the measured repetitions."""

    phases: dict[str, float]
    repetitions: int
    total: float = field(init=False)

    def __post_init__(self):
        for name in LATENCY_PHASES + EXTRA_PHASES:
            if name not in self.phases:
                raise ValidationError(f"latency report missing phase {name!r}")
        for name, value in self.phases.items():
            if value < 0.0:
                raise ValidationError(f"phase {name!r} duration is negative")
        if self.repetitions < 1:
            raise ValidationError("repetitions must be >= 1")
        object.__setattr__(self, "total", float(self.phases["total"]))

    def to_dict(self) -> dict:
        return {
            "repetitions": self.repetitions,
            "phases": {k: float(v) for k, v in self.phases.items()},
        }

    def to_table(self) -> str:
        header = [p.capitalize() for p in LATENCY_PHASES] + ["Align", "Total"]
        keys = list(LATENCY_PHASES) + list(EXTRA_PHASES)
        cells = [f"{self.phases[k] * 1000.0:.2f} ms" for k in keys]
        width = max(len(a) for a in header + cells) + 2
        line = "".join(h.rjust(width) for h in header)
        vals = "".join(c.rjust(width) for c in cells)
        return f"{line}\n{vals}"


def measure_latency(
    instructions: InstructionSet,
    config: EngineConfig,
    repetitions: int,
    seed: int = 0,
) -> LatencyReport:
    """Generate `repetitions` times and take per-phase medians."""
    if repetitions < 1:
        raise ValidationError(f"repetitions must be >= 1, got {repetitions}")
    samples: dict[str, list[float]] = {}
    for rep in range(repetitions):
        result = generate(instructions, config, seed)
        for name, value in result.timings.items():
            samples.setdefault(name, []).append(value)
    medians = {name: float(statistics.median(vals)) for name, vals in samples.items()}
    return LatencyReport(phases=medians, repetitions=repetitions)
