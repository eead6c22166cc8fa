"""The two-stage generator: image stage, video stage, frame alignment.

Stage one turns the starting image plus content edits into an intermediate
image.  An optional drag then produces an edited copy.  Stage two runs a
single reverse-diffusion chain over the video latent in which, at every step,
noise is predicted under both the original and the edited condition and the
two predictions are blended by the interaction weight lam.  Each decoded
frame is finally aligned against the intermediate image by a
normalize-activate-convolve stack with an optional residual connection.

Generation is a pure function of (instructions, config, seed); composing the
stage functions by hand gives bit-identical results to generate().
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .diffusion import (
    BlendCondition,
    NoiseSchedule,
    blended_denoiser,
    build_schedule,
    forward_diffuse,
    sample,
)
from .errors import ValidationError
from .instructions import (
    ContentInstruction,
    InstructionSet,
    MotionInstruction,
    apply_paint,
    apply_trajectory,
    compile_instructions,
)
from .kernels import conv2d_same, shift_bilinear
from .scenes import (
    MOTION_VELOCITIES,
    FrameStack,
    check_content_label,
    render_scene_frame,
    sample_scene,
)
from .tensors import check_pixels, check_same_shape
from .worlds import GaussianWorld, analytic_denoiser

# rng substream tags, so the image and video stages never share noise
_IMAGE_STREAM = 0
_VIDEO_STREAM = 1

# seed of the fixed representative scene behind each content label
CONTENT_WORLD_SEED = 0


def encode(pixels: np.ndarray) -> np.ndarray:
    """Pixels [0,1] to latents [-1,1]; a fixed affine stand-in for E(.)."""
    pixels = check_pixels(pixels, "pixels")
    return 2.0 * pixels - 1.0


def decode(latent: np.ndarray) -> np.ndarray:
    latent = np.asarray(latent, dtype=np.float64)
    return np.clip((latent + 1.0) / 2.0, 0.0, 1.0)


# The default alignment parameters put the stack in its linear regime: with
# epsilon far above the variance of any frame difference (pixels live in
# [0,1], so var <= 1), group normalization collapses to centering plus a
# fixed 1/sqrt(epsilon) scale, SiLU at small inputs is u/2 + u^2/4 + O(u^4),
# and a 1x1 kernel of 2*sqrt(epsilon) undoes both factors.  Alignment then
# reproduces the frame up to a quadratic term bounded by |d|^2/200, which
# keeps post-alignment geometry (centroids in particular) faithful to the
# raw frames.  An identity kernel with a small epsilon instead amplifies the
# difference by its data-dependent inverse standard deviation and lets SiLU
# crush the negative half of any displacement pattern, which visibly smears
# moved content back toward its old position.
LINEAR_REGIME_EPSILON = 1.0e4


@dataclass(frozen=True, eq=False)
class AlignParams:
    """GroupNorm/SiLU/Conv2D parameters for the frame-alignment stack."""

    groups: int
    epsilon: float
    kernel: np.ndarray
    bias: np.ndarray
    residual_add: bool = True

    def __post_init__(self):
        if self.groups < 1:
            raise ValidationError(f"groups must be positive, got {self.groups}")
        if not self.epsilon > 0.0:
            raise ValidationError(f"epsilon must be positive, got {self.epsilon}")
        kernel = np.asarray(self.kernel, dtype=np.float64)
        if kernel.ndim != 4 or kernel.shape[0] != kernel.shape[1]:
            raise ValidationError(
                f"kernel must be (C, C, k, k), got shape {kernel.shape}"
            )
        if kernel.shape[2] != kernel.shape[3] or kernel.shape[2] % 2 == 0:
            raise ValidationError(
                f"kernel window must be square with odd side, got {kernel.shape[2:]}"
            )
        if not np.all(np.isfinite(kernel)):
            raise ValidationError("kernel contains non-finite values")
        channels = kernel.shape[0]
        if channels % self.groups != 0:
            raise ValidationError(
                f"groups ({self.groups}) must divide channels ({channels})"
            )
        bias = np.asarray(self.bias, dtype=np.float64)
        if bias.shape != (channels,):
            raise ValidationError(
                f"bias must have shape ({channels},), got {bias.shape}"
            )
        if not np.all(np.isfinite(bias)):
            raise ValidationError("bias contains non-finite values")
        kernel.setflags(write=False)
        bias.setflags(write=False)
        object.__setattr__(self, "kernel", kernel)
        object.__setattr__(self, "bias", bias)

    @property
    def channels(self) -> int:
        return int(self.kernel.shape[0])


def default_align_params(channels: int, residual_add: bool = True) -> AlignParams:
    if channels < 1:
        raise ValidationError(f"channels must be positive, got {channels}")
    scale = 2.0 * math.sqrt(LINEAR_REGIME_EPSILON)
    kernel = np.zeros((channels, channels, 1, 1), dtype=np.float64)
    for c in range(channels):
        kernel[c, c, 0, 0] = scale
    return AlignParams(
        groups=channels,
        epsilon=LINEAR_REGIME_EPSILON,
        kernel=kernel,
        bias=np.zeros(channels, dtype=np.float64),
        residual_add=residual_add,
    )


@dataclass(frozen=True)
class EngineConfig:
    """Everything generate() needs besides the instructions and the seed."""

    height: int = 32
    width: int = 32
    channels: int = 3
    num_frames: int = 8
    num_steps: int = 50
    # the classic 1e-4..0.02 ramp scaled by 1000/T so a 50-step chain still
    # ends at negligible signal
    beta_start: float = 0.002
    beta_end: float = 0.4
    schedule_kind: str = "linear"
    strength: float = 0.0
    sigma_image: float = 0.05
    sigma_video: float = 0.0
    background: tuple[float, ...] = (0.1, 0.1, 0.1)
    frame_rate: float = 8.0
    align_residual: bool = True

    def __post_init__(self):
        for name in ("height", "width", "channels", "num_frames", "num_steps"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or isinstance(v, bool) or v < 1:
                raise ValidationError(f"{name} must be a positive integer, got {v!r}")
        if not 0.0 <= self.strength <= 1.0:
            raise ValidationError(f"strength must lie in [0, 1], got {self.strength}")
        if self.sigma_image < 0.0 or self.sigma_video < 0.0:
            raise ValidationError("sigma values must be nonnegative")
        if len(self.background) != self.channels:
            raise ValidationError(
                f"background needs {self.channels} channels, got {len(self.background)}"
            )
        for v in self.background:
            if not 0.0 <= v <= 1.0:
                raise ValidationError(f"background value {v} outside [0, 1]")
        if self.frame_rate <= 0.0:
            raise ValidationError(f"frame_rate must be positive, got {self.frame_rate}")
        # delegates range checks on num_steps/betas/kind
        self.schedule()

    def schedule(self) -> NoiseSchedule:
        return build_schedule(
            self.num_steps, self.beta_start, self.beta_end, self.schedule_kind
        )

    def align_params(self) -> AlignParams:
        return default_align_params(self.channels, residual_add=self.align_residual)

    def blank_image(self) -> np.ndarray:
        """Background-filled starting image for fresh sessions."""
        out = np.empty((self.channels, self.height, self.width), dtype=np.float64)
        out[:] = np.asarray(self.background, dtype=np.float64)[:, None, None]
        return out


def group_normalize(x: np.ndarray, groups: int, epsilon: float) -> np.ndarray:
    """Normalize (C,H,W) by per-group statistics over channels and space."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 3:
        raise ValidationError(f"group_normalize expects (C,H,W), got {x.shape}")
    c = x.shape[0]
    if groups < 1 or c % groups != 0:
        raise ValidationError(f"groups ({groups}) must divide channels ({c})")
    if not epsilon > 0.0:
        raise ValidationError(f"epsilon must be positive, got {epsilon}")
    grouped = x.reshape(groups, c // groups, *x.shape[1:])
    mean = grouped.mean(axis=(1, 2, 3), keepdims=True)
    var = grouped.var(axis=(1, 2, 3), keepdims=True)
    normed = (grouped - mean) / np.sqrt(var + epsilon)
    return normed.reshape(x.shape)


def silu(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=np.float64)
    out = np.empty_like(u)
    pos = u >= 0
    out[pos] = u[pos] / (1.0 + np.exp(-u[pos]))
    eu = np.exp(u[~pos])
    out[~pos] = u[~pos] * eu / (1.0 + eu)
    return out


def align_frame(
    frame: np.ndarray, intermediate: np.ndarray, params: AlignParams
) -> np.ndarray:
    """Conv2D(SiLU(GroupNorm(frame - intermediate))), plus the intermediate
    image back on top when params.residual_add is set.

    Returns the unclamped result; callers assembling a FrameStack clip it.
    """
    frame = np.asarray(frame, dtype=np.float64)
    intermediate = np.asarray(intermediate, dtype=np.float64)
    check_same_shape(frame, intermediate, "frame", "intermediate")
    if frame.ndim != 3:
        raise ValidationError(f"align_frame expects (C,H,W), got {frame.shape}")
    if frame.shape[0] != params.channels:
        raise ValidationError(
            f"params built for {params.channels} channels, frame has {frame.shape[0]}"
        )
    d = frame - intermediate
    normed = group_normalize(d, params.groups, params.epsilon)
    activated = silu(normed)
    out = conv2d_same(activated, params.kernel, params.bias)
    if params.residual_add:
        out = out + intermediate
    return out


def content_world(label: str, config: EngineConfig) -> GaussianWorld:
    """Label-specific latent Gaussian: mean is the encoded fixed
    representative render of that label, spread is sigma_image."""
    label = check_content_label(label)
    scene = sample_scene(
        label,
        "static",
        CONTENT_WORLD_SEED,
        height=config.height,
        width=config.width,
        channels=config.channels,
        background=config.background,
    )
    mean = encode(render_scene_frame(scene, 1, config.height, config.width))
    return GaussianWorld.single(mean, config.sigma_image)


def make_image_denoiser(config: EngineConfig, sched: NoiseSchedule):
    """Image-stage denoiser: condition is a content label."""
    base = analytic_denoiser(sched)
    cache: dict[str, GaussianWorld] = {}

    def predict(z_t: np.ndarray, t: int, condition) -> np.ndarray:
        label = check_content_label(condition)
        world = cache.get(label)
        if world is None:
            world = content_world(label, config)
            cache[label] = world
        return base(z_t, t, world)

    return predict


def p_img(
    image: np.ndarray,
    content: ContentInstruction,
    strength: float,
    seed: int,
    sched: NoiseSchedule,
    denoiser,
) -> np.ndarray:
    """Image stage: paint the content edits, then optionally renoise to step
    ceil(strength*T) and denoise under the content label.

    strength 0 skips diffusion entirely, so the output is exactly the
    painted input.
    """
    if not 0.0 <= strength <= 1.0:
        raise ValidationError(f"strength must lie in [0, 1], got {strength}")
    painted = apply_paint(image, content.strokes)
    if strength == 0.0:
        return painted
    start = math.ceil(strength * sched.num_steps)
    z0 = encode(painted)
    rng = np.random.default_rng([int(seed), _IMAGE_STREAM])
    eps = rng.standard_normal(z0.shape)
    z_start = forward_diffuse(z0, eps, start, sched)
    z_out = sample(
        denoiser,
        sched,
        z_start,
        condition=content.text,
        mode="deterministic",
        start_step=start,
    )
    return decode(z_out)


def video_world(
    condition_latent: np.ndarray,
    motion: MotionInstruction,
    num_frames: int,
    sigma: float,
) -> GaussianWorld:
    """Latent video distribution implied by one condition image and a motion.

    Frame i's mean is the condition latent resampled at a displacement of
    (i-1) times the motion velocity.  The warp is linear in the condition,
    which is what makes interior-lam runs land exactly between the two
    endpoint runs.
    """
    condition_latent = np.asarray(condition_latent, dtype=np.float64)
    if condition_latent.ndim != 3:
        raise ValidationError(
            f"condition latent must be (C,H,W), got {condition_latent.shape}"
        )
    if num_frames < 1:
        raise ValidationError(f"num_frames must be >= 1, got {num_frames}")
    base = MOTION_VELOCITIES[motion.motion]
    mag = 1.0 if motion.magnitude is None else float(motion.magnitude)
    vx, vy = base[0] * mag, base[1] * mag
    means = np.stack(
        [
            shift_bilinear(condition_latent, i * vx, i * vy)
            for i in range(num_frames)
        ]
    )
    return GaussianWorld.single(means, sigma)


def p_video(
    intermediate: np.ndarray,
    edited: np.ndarray,
    motion: MotionInstruction,
    lam: float,
    num_frames: int,
    seed: int,
    sched: NoiseSchedule,
    denoiser=None,
    sigma: float = 0.0,
    frame_rate: float = 8.0,
) -> FrameStack:
    """Video stage: one shared reverse chain, two conditions, blended noise.

    Both noise predictions are made from the same current latent; only the
    conditioning image differs.  lam=1 runs bit-identically to conditioning
    on the intermediate image alone, lam=0 to the edited image alone.
    """
    intermediate = check_pixels(intermediate, "intermediate")
    edited = check_pixels(edited, "edited")
    check_same_shape(intermediate, edited, "intermediate", "edited")
    if not 0.0 <= lam <= 1.0:
        raise ValidationError(f"lam must lie in [0, 1], got {lam}")
    z0 = encode(intermediate)
    z0_edited = encode(edited)
    primary = video_world(z0, motion, num_frames, sigma)
    alternate = video_world(z0_edited, motion, num_frames, sigma)
    if denoiser is None:
        denoiser = analytic_denoiser(sched)
    rng = np.random.default_rng([int(seed), _VIDEO_STREAM])
    z_start = rng.standard_normal((num_frames,) + intermediate.shape)
    z_out = sample(
        blended_denoiser(denoiser),
        sched,
        z_start,
        condition=BlendCondition(primary=primary, edited=alternate, lam=lam),
        mode="deterministic",
    )
    return FrameStack(frames=decode(z_out), frame_rate=frame_rate)


@dataclass(frozen=True)
class GenerationResult:
    intermediate: np.ndarray
    edited: np.ndarray
    raw: FrameStack
    aligned: FrameStack
    lam: float
    seed: int
    timings: dict[str, float] = field(repr=False)

    def __post_init__(self):
        check_same_shape(self.intermediate, self.edited, "intermediate", "edited")
        if self.raw.frames.shape != self.aligned.frames.shape:
            raise ValidationError(
                "raw and aligned stacks must share a shape, got "
                f"{self.raw.frames.shape} vs {self.aligned.frames.shape}"
            )


def generate(
    instructions: InstructionSet, config: EngineConfig, seed: int
) -> GenerationResult:
    """Run the full pipeline and record per-phase wall-clock timings.

    Phase attribution mirrors the four instruction channels: "image" covers
    instruction compilation and input prep, "content" the paint-plus-denoise
    image stage, "trajectory" the drag edit, "motion" the video chain, and
    "align" the per-frame alignment pass.
    """
    total_start = time.perf_counter()
    sched = config.schedule()
    params = config.align_params()

    phase_start = time.perf_counter()
    compiled = compile_instructions(instructions)
    image_cond = compiled.image_condition
    expected = (config.channels, config.height, config.width)
    if image_cond.pixels.shape != expected:
        raise ValidationError(
            f"instruction image shape {image_cond.pixels.shape} does not match "
            f"config {expected}"
        )
    timings = {"image": time.perf_counter() - phase_start}

    phase_start = time.perf_counter()
    intermediate = p_img(
        image_cond.pixels,
        instructions.content,
        config.strength,
        seed,
        sched,
        make_image_denoiser(config, sched),
    )
    timings["content"] = time.perf_counter() - phase_start

    video_cond = compiled.video_condition
    phase_start = time.perf_counter()
    if video_cond.trajectory is None:
        edited = intermediate
        lam_run = 1.0  # degenerate blend; the chain sees one condition
    else:
        edited = apply_trajectory(intermediate, video_cond.trajectory, config.background)
        lam_run = video_cond.lam
    timings["trajectory"] = time.perf_counter() - phase_start

    phase_start = time.perf_counter()
    raw = p_video(
        intermediate,
        edited,
        instructions.motion,
        lam_run,
        config.num_frames,
        seed,
        sched,
        sigma=config.sigma_video,
        frame_rate=config.frame_rate,
    )
    timings["motion"] = time.perf_counter() - phase_start

    phase_start = time.perf_counter()
    aligned_frames = np.stack(
        [
            np.clip(align_frame(raw.frame(i), intermediate, params), 0.0, 1.0)
            for i in range(raw.num_frames)
        ]
    )
    aligned = FrameStack(frames=aligned_frames, frame_rate=config.frame_rate)
    timings["align"] = time.perf_counter() - phase_start

    timings["total"] = time.perf_counter() - total_start
    return GenerationResult(
        intermediate=intermediate,
        edited=edited,
        raw=raw,
        aligned=aligned,
        lam=instructions.lam,
        seed=int(seed),
        timings=timings,
    )
