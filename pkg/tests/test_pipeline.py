"""The two-stage generator: image stage, video stage, alignment, composition.

The endpoint and composition checks are bit-exact by design; the quantitative
checks ride on the closed-form denoisers, whose zero-spread chains land on
the world mean exactly, making midpoints and centroids predictable.
"""

import dataclasses
import math

import numpy as np
import pytest

from videoloom import (
    AlignParams,
    ContentInstruction,
    EngineConfig,
    GenerationResult,
    MotionInstruction,
    ValidationError,
    align_frame,
    analytic_denoiser,
    apply_paint,
    apply_trajectory,
    centroid,
    decode,
    default_align_params,
    encode,
    generate,
    p_img,
    p_video,
    sample,
    video_world,
)
from videoloom.diffusion import BlendCondition, blended_denoiser
from videoloom.kernels import shift_bilinear
from videoloom.pipeline import (
    _VIDEO_STREAM,
    CONTENT_WORLD_SEED,
    content_world,
    group_normalize,
    make_image_denoiser,
    silu,
)
from videoloom.scenes import render_scene_frame, sample_scene
from videoloom.serialization import result_digests

from .support import (
    FAST_CONFIG,
    INTERIOR_BLOB_SEED,
    drag_instructions,
    plain_instructions,
    scalar_group_norm_silu,
    scene_image,
)


# ---------------------------------------------------------------------------
# pixel/latent map


def test_encode_endpoints():
    pixels = np.array([0.0, 1.0, 0.5]).reshape(3, 1, 1)
    latent = encode(pixels)
    np.testing.assert_array_equal(latent.ravel(), [-1.0, 1.0, 0.0])


def test_decode_inverts_encode():
    rng = np.random.default_rng(0)
    x = rng.uniform(0.0, 1.0, size=(3, 5, 5))
    np.testing.assert_allclose(decode(encode(x)), x, atol=1e-7)


def test_decode_clamps_out_of_range_latents():
    out = decode(np.array([-3.0, 3.0]))
    np.testing.assert_array_equal(out, [0.0, 1.0])


# ---------------------------------------------------------------------------
# alignment stack


def test_align_params_validation():
    kernel = np.zeros((3, 3, 1, 1))
    bias = np.zeros(3)
    with pytest.raises(ValidationError):
        AlignParams(groups=2, epsilon=1e-5, kernel=kernel, bias=bias)
    with pytest.raises(ValidationError):
        AlignParams(groups=1, epsilon=0.0, kernel=kernel, bias=bias)
    with pytest.raises(ValidationError):
        AlignParams(groups=1, epsilon=1e-5, kernel=np.zeros((3, 3, 2, 2)), bias=bias)
    with pytest.raises(ValidationError):
        AlignParams(groups=1, epsilon=1e-5, kernel=kernel, bias=np.zeros(2))


def test_align_frame_zero_difference_cases():
    rng = np.random.default_rng(1)
    x = rng.uniform(0.0, 1.0, size=(3, 8, 8))
    plain = default_align_params(3, residual_add=False)
    with_res = default_align_params(3, residual_add=True)
    np.testing.assert_array_equal(align_frame(x, x, plain), np.zeros_like(x))
    np.testing.assert_array_equal(align_frame(x, x, with_res), x)


def test_silu_zero_and_signs():
    out = silu(np.array([0.0, 1.0, -1.0]))
    assert out[0] == 0.0
    assert out[1] == pytest.approx(1.0 / (1.0 + math.exp(-1.0)), abs=1e-15)
    assert out[2] == pytest.approx(-1.0 * math.exp(-1.0) / (1.0 + math.exp(-1.0)), abs=1e-15)


def test_group_normalize_single_group_statistics():
    rng = np.random.default_rng(2)
    x = rng.standard_normal((2, 3, 3))
    out = group_normalize(x, 1, 1e-5)
    mean = x.mean()
    var = x.var()
    np.testing.assert_allclose(out, (x - mean) / np.sqrt(var + 1e-5), atol=1e-12)


def test_align_frame_matches_scalar_oracle():
    """Hand-computed single-group normalization through SiLU, identity conv."""
    rng = np.random.default_rng(3)
    x = rng.uniform(0.2, 0.8, size=(1, 4, 4))
    v = rng.uniform(0.2, 0.8, size=(1, 4, 4))
    eps = 1e-5
    params = AlignParams(
        groups=1,
        epsilon=eps,
        kernel=np.ones((1, 1, 1, 1)),
        bias=np.zeros(1),
        residual_add=False,
    )
    got = align_frame(v, x, params)
    want = scalar_group_norm_silu(v - x, eps)
    np.testing.assert_allclose(got, want, atol=1e-6)


def test_align_frame_residual_is_additive():
    rng = np.random.default_rng(4)
    x = rng.uniform(0.0, 1.0, size=(3, 6, 6))
    v = rng.uniform(0.0, 1.0, size=(3, 6, 6))
    plain = default_align_params(3, residual_add=False)
    with_res = default_align_params(3, residual_add=True)
    np.testing.assert_array_equal(
        align_frame(v, x, with_res), align_frame(v, x, plain) + x
    )


def test_align_frame_rejects_channel_mismatch():
    params = default_align_params(3)
    with pytest.raises(ValidationError):
        align_frame(np.zeros((2, 4, 4)), np.zeros((2, 4, 4)), params)


# ---------------------------------------------------------------------------
# engine config


def test_engine_config_defaults_build():
    config = EngineConfig()
    assert config.schedule().num_steps == 50
    assert config.align_params().channels == 3
    blank = config.blank_image()
    assert blank.shape == (3, 32, 32)
    np.testing.assert_array_equal(blank, np.full((3, 32, 32), 0.1))


@pytest.mark.parametrize(
    "kwargs",
    [
        {"height": 0},
        {"num_frames": 0},
        {"strength": 1.5},
        {"sigma_image": -0.1},
        {"background": (0.1, 0.1)},
        {"frame_rate": 0.0},
        {"beta_start": 0.0},
        {"schedule_kind": "spline"},
    ],
)
def test_engine_config_validation(kwargs):
    with pytest.raises(ValidationError):
        EngineConfig(**kwargs)


# ---------------------------------------------------------------------------
# image stage


def test_content_world_mean_is_canonical_render():
    config = FAST_CONFIG
    world = content_world("one_blob", config)
    scene = sample_scene(
        "one_blob", "static", CONTENT_WORLD_SEED,
        height=config.height, width=config.width,
        channels=config.channels, background=config.background,
    )
    want = encode(render_scene_frame(scene, 1, config.height, config.width))
    np.testing.assert_array_equal(world.mean, want)
    assert world.sigma == config.sigma_image


def test_p_img_strength_zero_is_identity():
    config = FAST_CONFIG
    sched = config.schedule()
    den = make_image_denoiser(config, sched)
    _, frame = scene_image("one_blob", "static", 3, config)
    out = p_img(frame, ContentInstruction(text="one_blob"), 0.0, 0, sched, den)
    np.testing.assert_array_equal(out, frame)


def test_p_img_strength_zero_with_strokes_is_painting():
    from videoloom import Stroke

    config = FAST_CONFIG
    sched = config.schedule()
    den = make_image_denoiser(config, sched)
    _, frame = scene_image("one_blob", "static", 3, config)
    strokes = (Stroke(polyline=((4.0, 4.0),), radius=1.5, color=(1.0, 1.0, 1.0)),)
    content = ContentInstruction(text="one_blob", strokes=strokes)
    out = p_img(frame, content, 0.0, 0, sched, den)
    np.testing.assert_array_equal(out, apply_paint(frame, strokes))


def test_p_img_full_strength_lands_near_world_mean():
    """At strength 1 the chain starts from nearly pure noise; deterministic
    sampling under the label world contracts toward that world's mean."""
    config = EngineConfig()
    sched = config.schedule()
    den = make_image_denoiser(config, sched)
    target = decode(content_world("one_blob", config).mean)
    _, frame = scene_image("one_blob", "static", 9, config)
    out = p_img(frame, ContentInstruction(text="one_blob"), 1.0, 0, sched, den)
    err = np.abs(out - target)
    assert float(err.mean()) <= 0.02
    assert float(err.max()) <= 0.15


def test_p_img_rejects_bad_strength():
    config = FAST_CONFIG
    sched = config.schedule()
    with pytest.raises(ValidationError):
        p_img(config.blank_image(), ContentInstruction(text="one_blob"), 1.5, 0, sched, None)


def test_p_img_is_deterministic_in_seed():
    config = FAST_CONFIG
    sched = config.schedule()
    den = make_image_denoiser(config, sched)
    _, frame = scene_image("one_blob", "static", 3, config)
    content = ContentInstruction(text="one_blob")
    a = p_img(frame, content, 0.5, 11, sched, den)
    b = p_img(frame, content, 0.5, 11, sched, den)
    c = p_img(frame, content, 0.5, 12, sched, den)
    np.testing.assert_array_equal(a, b)
    assert np.any(a != c)


# ---------------------------------------------------------------------------
# video stage


def test_video_world_means_are_warped_condition():
    _, frame = scene_image("one_blob", "static", 3, FAST_CONFIG)
    latent = encode(frame)
    motion = MotionInstruction(motion="drift_right", magnitude=2.0)
    world = video_world(latent, motion, 3, 0.0)
    assert world.mean.shape == (3,) + latent.shape
    np.testing.assert_array_equal(world.mean[0], latent)
    np.testing.assert_array_equal(world.mean[1], shift_bilinear(latent, 2.0, 0.0))
    np.testing.assert_array_equal(world.mean[2], shift_bilinear(latent, 4.0, 0.0))


def test_video_world_default_magnitude_is_unit():
    latent = np.zeros((1, 4, 4))
    world = video_world(latent, MotionInstruction(motion="drift_down"), 2, 0.3)
    assert world.sigma == 0.3
    assert world.mean.shape == (2, 1, 4, 4)


def test_video_world_validation():
    with pytest.raises(ValidationError):
        video_world(np.zeros((4, 4)), MotionInstruction(motion="static"), 2, 0.0)
    with pytest.raises(ValidationError):
        video_world(np.zeros((1, 4, 4)), MotionInstruction(motion="static"), 0, 0.0)


def run_single_condition_chain(condition_image, motion, num_frames, seed, sched):
    """The unblended video chain, reproduced step for step."""
    z0 = encode(condition_image)
    world = video_world(z0, motion, num_frames, 0.0)
    rng = np.random.default_rng([int(seed), _VIDEO_STREAM])
    z_start = rng.standard_normal((num_frames,) + condition_image.shape)
    return decode(sample(analytic_denoiser(sched), sched, z_start, condition=world))


@pytest.mark.parametrize("lam,which", [(1.0, "intermediate"), (0.0, "edited")])
def test_p_video_endpoints_match_single_condition_chain(lam, which):
    config = FAST_CONFIG
    sched = config.schedule()
    _, intermediate = scene_image("one_blob", "static", 3, config)
    edited = apply_trajectory(
        intermediate,
        drag_instructions(config, (2, 0), scene_seed=3).trajectory,
        config.background,
    )
    motion = MotionInstruction(motion="drift_right")
    stack = p_video(intermediate, edited, motion, lam, 3, 7, sched)
    source = intermediate if which == "intermediate" else edited
    want = run_single_condition_chain(source, motion, 3, 7, sched)
    np.testing.assert_array_equal(stack.frames, want)


def test_p_video_midpoint_blend_is_elementwise_midpoint():
    """The analytic denoiser is affine in its condition mean and the blended
    chain collapses to a single chain at the blended mean, so lam=0.5 output
    sits exactly between the endpoint outputs."""
    config = FAST_CONFIG
    sched = config.schedule()
    _, intermediate = scene_image("one_blob", "static", 3, config)
    edited = apply_trajectory(
        intermediate,
        drag_instructions(config, (2, 1), scene_seed=3).trajectory,
        config.background,
    )
    motion = MotionInstruction(motion="static")
    hi = p_video(intermediate, edited, motion, 1.0, 3, 7, sched)
    lo = p_video(intermediate, edited, motion, 0.0, 3, 7, sched)
    mid = p_video(intermediate, edited, motion, 0.5, 3, 7, sched)
    np.testing.assert_allclose(
        mid.frames, 0.5 * (hi.frames + lo.frames), atol=1e-6
    )


def test_p_video_no_edit_degeneracy():
    config = FAST_CONFIG
    sched = config.schedule()
    _, frame = scene_image("two_blobs", "static", 5, config)
    motion = MotionInstruction(motion="drift_down")
    baseline = p_video(frame, frame, motion, 1.0, 3, 2, sched)
    for lam in (0.0, 0.3, 0.8):
        stack = p_video(frame, frame, motion, lam, 3, 2, sched)
        np.testing.assert_allclose(stack.frames, baseline.frames, atol=1e-12)


def test_p_video_validation():
    config = FAST_CONFIG
    sched = config.schedule()
    frame = config.blank_image()
    with pytest.raises(ValidationError):
        p_video(frame, frame[:, :8, :], MotionInstruction(motion="static"), 0.5, 2, 0, sched)
    with pytest.raises(ValidationError):
        p_video(frame, frame, MotionInstruction(motion="static"), 1.5, 2, 0, sched)


def test_p_video_zero_sigma_static_chain_reproduces_condition():
    config = FAST_CONFIG
    sched = config.schedule()
    _, frame = scene_image("one_blob", "static", 3, config)
    stack = p_video(frame, frame, MotionInstruction(motion="static"), 1.0, 3, 0, sched)
    for i in range(3):
        np.testing.assert_allclose(stack.frames[i], frame, atol=1e-7)


# ---------------------------------------------------------------------------
# full pipeline


def test_generate_without_trajectory_ignores_lambda():
    config = FAST_CONFIG
    results = [
        generate(plain_instructions(config, lam=lam), config, 4)
        for lam in (0.0, 0.5, 1.0)
    ]
    for other in results[1:]:
        np.testing.assert_array_equal(results[0].raw.frames, other.raw.frames)
        np.testing.assert_array_equal(results[0].aligned.frames, other.aligned.frames)
        np.testing.assert_array_equal(results[0].edited, other.edited)


def test_generate_is_deterministic():
    config = FAST_CONFIG
    bundle = drag_instructions(config, (1, 1), scene_seed=3, lam=0.25)
    a = generate(bundle, config, 9)
    b = generate(bundle, config, 9)
    assert result_digests(a) == result_digests(b)


def test_generate_matches_manual_composition():
    """generate() is literally the composition of the stage operations."""
    config = FAST_CONFIG
    bundle = drag_instructions(config, (2, 0), scene_seed=3, lam=0.5)
    seed = 6
    result = generate(bundle, config, seed)

    sched = config.schedule()
    intermediate = p_img(
        bundle.image.pixels, bundle.content, config.strength, seed, sched,
        make_image_denoiser(config, sched),
    )
    edited = apply_trajectory(intermediate, bundle.trajectory, config.background)
    raw = p_video(
        intermediate, edited, bundle.motion, bundle.lam, config.num_frames,
        seed, sched, sigma=config.sigma_video, frame_rate=config.frame_rate,
    )
    params = config.align_params()
    aligned = np.stack(
        [
            np.clip(align_frame(raw.frame(i), intermediate, params), 0.0, 1.0)
            for i in range(raw.num_frames)
        ]
    )
    np.testing.assert_array_equal(result.intermediate, intermediate)
    np.testing.assert_array_equal(result.edited, edited)
    np.testing.assert_array_equal(result.raw.frames, raw.frames)
    np.testing.assert_array_equal(result.aligned.frames, aligned)


def test_generate_drag_moves_first_aligned_frame_centroid():
    config = EngineConfig()
    bundle = drag_instructions(config, (2, 0), scene_seed=INTERIOR_BLOB_SEED, lam=0.0)
    result = generate(bundle, config, 0)
    base = centroid(result.intermediate, config.background)
    moved = centroid(result.aligned.frame(0), config.background)
    assert moved[0] - base[0] == pytest.approx(2.0, abs=0.5)
    assert moved[1] - base[1] == pytest.approx(0.0, abs=0.5)


def test_generate_records_run_metadata():
    config = FAST_CONFIG
    bundle = drag_instructions(config, (1, 0), scene_seed=3, lam=0.3)
    result = generate(bundle, config, 21)
    assert result.lam == 0.3
    assert result.seed == 21
    for phase in ("image", "content", "trajectory", "motion", "align", "total"):
        assert result.timings[phase] >= 0.0
    assert result.raw.frames.shape == (3, 3, 16, 16)
    assert result.raw.frames.shape == result.aligned.frames.shape


def test_generate_rejects_config_resolution_mismatch():
    config = FAST_CONFIG
    bundle = plain_instructions(config)
    other = dataclasses.replace(config, height=32, width=32)
    with pytest.raises(ValidationError):
        generate(bundle, other, 0)


def test_generation_result_shape_invariants():
    from videoloom import FrameStack

    frames = FrameStack(frames=np.zeros((2, 1, 4, 4)))
    with pytest.raises(ValidationError):
        GenerationResult(
            intermediate=np.zeros((1, 4, 4)),
            edited=np.zeros((1, 5, 5)),
            raw=frames,
            aligned=frames,
            lam=0.5,
            seed=0,
            timings={},
        )
    with pytest.raises(ValidationError):
        GenerationResult(
            intermediate=np.zeros((1, 4, 4)),
            edited=np.zeros((1, 4, 4)),
            raw=frames,
            aligned=FrameStack(frames=np.zeros((3, 1, 4, 4))),
            lam=0.5,
            seed=0,
            timings={},
        )
