"""Shared test helpers: independent oracles and session builders.

The oracles here deliberately avoid the library's own code paths wherever a
claim is being verified: the Monte-Carlo posterior mean samples the prior
directly, the finite-difference score only consumes log densities, and the
log-domain schedule product recomputes cumulative alphas without cumprod.
"""

from __future__ import annotations

import math

import numpy as np

from videoloom import (
    ContentInstruction,
    EngineConfig,
    GaussianWorld,
    ImageInstruction,
    InstructionSet,
    MotionInstruction,
    NoiseSchedule,
    TrajectoryInstruction,
    log_marginal_density,
    render_scene_frame,
    sample_scene,
)

# ---------------------------------------------------------------------------
# oracles

def log_domain_alpha_bar(betas) -> float:
    """Cumulative alpha via summed logs, cross-checked in two accumulation
    orders; disagreement beyond 1e-10 relative means the oracle itself is
    unsound for these betas."""
    logs = [math.log1p(-float(b)) for b in betas]
    forward = math.fsum(logs)
    backward = math.fsum(reversed(logs))
    assert abs(forward - backward) <= 1e-10 * max(abs(forward), 1e-300)
    return math.exp(forward)


def mc_posterior_eps(
    world: GaussianWorld,
    z_t: np.ndarray,
    t: int,
    sched: NoiseSchedule,
    num_samples: int,
    seed: int,
) -> np.ndarray:
    """Brute-force E[eps | z_t] by importance weighting over the prior.

    Draw clean samples from the world, weight each by the likelihood of z_t
    under the forward marginal given that sample, and average the implied
    noise values.  Only the forward-process definition is assumed.
    """
    rng = np.random.default_rng(seed)
    comps = world.components()
    weights = np.array([w for w, _, _ in comps])
    z_t = np.asarray(z_t, dtype=np.float64)
    dim = z_t.size
    abar = sched.alpha_bar(t)

    picks = rng.choice(len(comps), size=num_samples, p=weights)
    z0 = np.empty((num_samples, dim))
    for k, (_, mu, sig) in enumerate(comps):
        rows = picks == k
        n_k = int(rows.sum())
        z0[rows] = mu.ravel() + sig * rng.standard_normal((n_k, dim))

    resid = z_t.ravel() - math.sqrt(abar) * z0
    log_w = -np.sum(resid**2, axis=1) / (2.0 * (1.0 - abar))
    log_w -= log_w.max()
    w = np.exp(log_w)
    eps = resid / math.sqrt(1.0 - abar)
    post = (w[:, None] * eps).sum(axis=0) / w.sum()
    return post.reshape(z_t.shape)


def fd_score_epsilon(
    world: GaussianWorld,
    z_t: np.ndarray,
    t: int,
    sched: NoiseSchedule,
    step: float = 1e-5,
) -> np.ndarray:
    """eps = -sqrt(1 - abar_t) * grad log p_t(z_t), gradient by central
    differences of the log marginal density."""
    z_t = np.asarray(z_t, dtype=np.float64)
    abar = sched.alpha_bar(t)
    grad = np.empty_like(z_t)
    it = np.nditer(z_t, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        plus = z_t.copy()
        minus = z_t.copy()
        plus[idx] += step
        minus[idx] -= step
        hi = log_marginal_density(world, plus, t, sched)
        lo = log_marginal_density(world, minus, t, sched)
        grad[idx] = (hi - lo) / (2.0 * step)
    return -math.sqrt(1.0 - abar) * grad


def scalar_group_norm_silu(values, epsilon: float):
    """Single-group GroupNorm + SiLU computed with plain Python floats."""
    flat = [float(v) for v in np.asarray(values).ravel()]
    n = len(flat)
    mean = math.fsum(flat) / n
    var = math.fsum((v - mean) ** 2 for v in flat) / n
    out = []
    for v in flat:
        u = (v - mean) / math.sqrt(var + epsilon)
        out.append(u / (1.0 + math.exp(-u)))
    return np.asarray(out).reshape(np.asarray(values).shape)


# ---------------------------------------------------------------------------
# session builders

# scene seed whose one_blob sits far enough inside the frame for +-3 px drags
INTERIOR_BLOB_SEED = 11


def scene_image(content: str, motion: str, seed: int, config: EngineConfig):
    scene = sample_scene(
        content,
        motion,
        seed,
        height=config.height,
        width=config.width,
        channels=config.channels,
        background=config.background,
    )
    return scene, render_scene_frame(scene, 1, config.height, config.width)


def disc_mask(center, radius: float, height: int, width: int) -> np.ndarray:
    ys, xs = np.mgrid[0:height, 0:width]
    return (xs - center[0]) ** 2 + (ys - center[1]) ** 2 <= radius * radius


def drag_instructions(
    config: EngineConfig,
    delta: tuple[int, int],
    scene_seed: int = INTERIOR_BLOB_SEED,
    content: str = "one_blob",
    motion: str = "static",
    lam: float = 0.0,
) -> InstructionSet:
    """Instruction set that drags the scene's first blob by ``delta``."""
    scene, frame = scene_image(content, motion, scene_seed, config)
    blob = scene.blobs[0]
    mask = disc_mask(
        blob.center, 3.0 * blob.radius + 1.0, config.height, config.width
    )
    handle = (float(round(blob.center[0])), float(round(blob.center[1])))
    target = (handle[0] + delta[0], handle[1] + delta[1])
    return InstructionSet(
        image=ImageInstruction(pixels=frame),
        content=ContentInstruction(text=content),
        motion=MotionInstruction(motion=motion),
        trajectory=TrajectoryInstruction(
            handles=(handle,), targets=(target,), mask=mask
        ),
        lam=lam,
    )


def plain_instructions(
    config: EngineConfig,
    content: str = "one_blob",
    motion: str = "static",
    scene_seed: int = INTERIOR_BLOB_SEED,
    lam: float = 0.5,
) -> InstructionSet:
    _, frame = scene_image(content, motion, scene_seed, config)
    return InstructionSet(
        image=ImageInstruction(pixels=frame),
        content=ContentInstruction(text=content),
        motion=MotionInstruction(motion=motion),
        trajectory=None,
        lam=lam,
    )


FAST_CONFIG = EngineConfig(
    height=16, width=16, channels=3, num_frames=3, num_steps=8
)


def assert_instructions_equal(a: InstructionSet, b: InstructionSet) -> None:
    np.testing.assert_array_equal(a.image.pixels, b.image.pixels)
    assert a.content == b.content
    assert a.motion == b.motion
    assert a.lam == b.lam
    if a.trajectory is None or b.trajectory is None:
        assert a.trajectory is None and b.trajectory is None
    else:
        assert a.trajectory.handles == b.trajectory.handles
        assert a.trajectory.targets == b.trajectory.targets
        np.testing.assert_array_equal(a.trajectory.mask, b.trajectory.mask)
