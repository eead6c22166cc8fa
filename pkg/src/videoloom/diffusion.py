"""Diffusion mathematics: variance schedules, noising, reverse sampling,
and the interaction-controlled noise blend.

Conventions:
    forward marginal   z_t = sqrt(abar_t) * z_0 + sqrt(1 - abar_t) * eps
    abar_t = prod_{s<=t} (1 - beta_s), with abar_0 = 1 (clean data).

Steps are 1-based: t runs from T (most noised) down to 1.  All operations
are pure functions over immutable inputs; the deterministic reverse update
re-projects the predicted clean sample with the same predicted noise, so a
chain is a pure function of its starting latent and conditions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ValidationError
from .tensors import as_array, check_same_shape

# floor applied to abar_t before divisions; avoids blow-up at chain end
ALPHA_BAR_FLOOR = 1e-8

# a predicted-noise model: (z_t, t, condition) -> noise tensor of z_t's shape
Denoiser = Callable[[np.ndarray, int, object], np.ndarray]


@dataclass(frozen=True)
class NoiseSchedule:
    """Per-step beta_t with derived alpha_t and cumulative abar_t."""

    betas: np.ndarray
    alphas: np.ndarray
    alpha_bars: np.ndarray

    @classmethod
    def from_betas(cls, betas) -> "NoiseSchedule":
        betas = np.asarray(betas, dtype=np.float64)
        if betas.ndim != 1 or betas.size < 1:
            raise ValidationError("betas must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(betas)):
            raise ValidationError("betas must be finite")
        if np.any(betas <= 0.0) or np.any(betas >= 1.0):
            raise ValidationError("every beta_t must lie in (0, 1)")
        alphas = 1.0 - betas
        alpha_bars = np.cumprod(alphas)
        sched = cls(betas=betas, alphas=alphas, alpha_bars=alpha_bars)
        for arr in (sched.betas, sched.alphas, sched.alpha_bars):
            arr.setflags(write=False)
        return sched

    @property
    def num_steps(self) -> int:
        return int(self.betas.size)

    def alpha_bar(self, t: int) -> float:
        """abar_t for t in 0..T (abar_0 = 1 by convention)."""
        if not 0 <= t <= self.num_steps:
            raise ValidationError(f"step {t} outside 0..{self.num_steps}")
        if t == 0:
            return 1.0
        return float(self.alpha_bars[t - 1])

    def check_step(self, t: int) -> int:
        if not isinstance(t, (int, np.integer)):
            raise ValidationError(f"step index must be an integer, got {t!r}")
        if not 1 <= t <= self.num_steps:
            raise ValidationError(f"step {t} outside 1..{self.num_steps}")
        return int(t)


def build_schedule(
    num_steps: int,
    beta_start: float,
    beta_end: float,
    kind: str = "linear",
) -> NoiseSchedule:
    """Build a variance schedule of ``num_steps`` steps.

    ``linear`` interpolates beta evenly from ``beta_start`` to ``beta_end``.
    ``cosine`` derives betas from the squared-cosine cumulative-alpha curve
    and clips each beta into [beta_start, beta_end].
    """
    if not isinstance(num_steps, (int, np.integer)) or num_steps < 1:
        raise ValidationError(f"num_steps must be a positive integer, got {num_steps!r}")
    if not (0.0 < beta_start <= beta_end < 1.0):
        raise ValidationError(
            f"need 0 < beta_start <= beta_end < 1, got ({beta_start}, {beta_end})"
        )
    if kind == "linear":
        betas = np.linspace(beta_start, beta_end, num_steps, dtype=np.float64)
    elif kind == "cosine":
        s = 0.008
        u = np.arange(num_steps + 1, dtype=np.float64) / num_steps
        f = np.cos((u + s) / (1.0 + s) * np.pi / 2.0) ** 2
        abar = f / f[0]
        betas = np.clip(1.0 - abar[1:] / abar[:-1], beta_start, beta_end)
    else:
        raise ValidationError(f"unknown schedule kind {kind!r}")
    return NoiseSchedule.from_betas(betas)


def forward_diffuse(
    z0: np.ndarray, eps: np.ndarray, t: int, sched: NoiseSchedule
) -> np.ndarray:
    """Noise a clean latent to step t: sqrt(abar_t)*z0 + sqrt(1-abar_t)*eps."""
    z0 = as_array(z0, "z0")
    eps = as_array(eps, "eps")
    check_same_shape(z0, eps, "z0", "eps")
    t = sched.check_step(t)
    abar = sched.alpha_bar(t)
    return np.sqrt(abar) * z0 + np.sqrt(1.0 - abar) * eps


def blend_noise(eps: np.ndarray, eps_prime: np.ndarray, lam: float) -> np.ndarray:
    """Convex blend lam*eps + (1-lam)*eps_prime.

    The endpoints are exact: lam=1 returns eps bit-for-bit and lam=0 returns
    eps_prime bit-for-bit, which the interaction contract relies on.
    """
    eps = as_array(eps, "eps")
    eps_prime = as_array(eps_prime, "eps_prime")
    check_same_shape(eps, eps_prime, "eps", "eps_prime")
    if not 0.0 <= lam <= 1.0:
        raise ValidationError(f"lambda must lie in [0, 1], got {lam}")
    if lam == 1.0:
        return eps.copy()
    if lam == 0.0:
        return eps_prime.copy()
    return lam * eps + (1.0 - lam) * eps_prime


def predict_clean(
    z_t: np.ndarray, eps_hat: np.ndarray, t: int, sched: NoiseSchedule
) -> np.ndarray:
    """Invert the forward marginal: (z_t - sqrt(1-abar_t)*eps) / sqrt(abar_t)."""
    z_t = as_array(z_t, "z_t")
    eps_hat = as_array(eps_hat, "eps_hat")
    check_same_shape(z_t, eps_hat, "z_t", "eps_hat")
    t = sched.check_step(t)
    abar = max(sched.alpha_bar(t), ALPHA_BAR_FLOOR)
    return (z_t - np.sqrt(1.0 - abar) * eps_hat) / np.sqrt(abar)


def reverse_step(
    z_t: np.ndarray,
    eps_hat: np.ndarray,
    t: int,
    sched: NoiseSchedule,
    mode: str = "deterministic",
    noise: Optional[np.ndarray] = None,
) -> np.ndarray:
    """One reverse update from step t to step t-1.

    Deterministic mode predicts the clean latent and re-noises it to t-1
    with the same predicted noise (the noise-free limit of the standard
    reverse process).  Stochastic mode keeps the posterior variance and
    adds schedule-scaled fresh ``noise``, which is required for t > 1.
    """
    t = sched.check_step(t)
    z0_hat = predict_clean(z_t, eps_hat, t, sched)
    abar_prev = sched.alpha_bar(t - 1)
    if mode == "deterministic":
        return np.sqrt(abar_prev) * z0_hat + np.sqrt(1.0 - abar_prev) * eps_hat
    if mode != "stochastic":
        raise ValidationError(f"unknown mode {mode!r}")
    if t == 1:
        return z0_hat
    if noise is None:
        raise ValidationError("stochastic mode requires a noise tensor for t > 1")
    noise = as_array(noise, "noise")
    check_same_shape(noise, z_t, "noise", "z_t")
    abar = max(sched.alpha_bar(t), ALPHA_BAR_FLOOR)
    beta_t = 1.0 - abar / max(abar_prev, ALPHA_BAR_FLOOR)
    var = beta_t * (1.0 - abar_prev) / (1.0 - abar)
    var = min(max(var, 0.0), 1.0 - abar_prev)
    return (
        np.sqrt(abar_prev) * z0_hat
        + np.sqrt(1.0 - abar_prev - var) * eps_hat
        + np.sqrt(var) * noise
    )


def sample(
    denoiser: Denoiser,
    sched: NoiseSchedule,
    z_start: np.ndarray,
    condition: object = None,
    mode: str = "deterministic",
    seed: Optional[int] = None,
    start_step: Optional[int] = None,
) -> np.ndarray:
    """Run the reverse chain from ``start_step`` (default T) down to 1.

    Deterministic mode is a pure function of (z_start, condition);
    stochastic mode additionally consumes a seeded noise stream.
    """
    z = as_array(z_start, "z_start").copy()
    top = sched.num_steps if start_step is None else sched.check_step(start_step)
    if mode == "stochastic":
        if seed is None:
            raise ValidationError("stochastic sampling requires a seed")
        rng = np.random.default_rng(seed)
    elif mode != "deterministic":
        raise ValidationError(f"unknown mode {mode!r}")
    for t in range(top, 0, -1):
        eps_hat = as_array(denoiser(z, t, condition), "eps_hat")
        check_same_shape(eps_hat, z, "eps_hat", "z_t")
        noise = None
        if mode == "stochastic" and t > 1:
            noise = rng.standard_normal(z.shape)
        z = reverse_step(z, eps_hat, t, sched, mode=mode, noise=noise)
    return z


@dataclass(frozen=True)
class BlendCondition:
    """Condition pair plus blend weight for the interaction-steered chain."""

    primary: object
    edited: object
    lam: float


def blended_denoiser(inner: Denoiser) -> Denoiser:
    """Lift a denoiser to accept a BlendCondition.

    At each step the two predictions are taken from the same latent state;
    only the condition differs.  Endpoint weights skip the unused branch so
    lam=1 / lam=0 chains are bit-identical to single-condition chains.
    """

    def predict(z_t: np.ndarray, t: int, condition: BlendCondition) -> np.ndarray:
        lam = condition.lam
        if not 0.0 <= lam <= 1.0:
            raise ValidationError(f"lambda must lie in [0, 1], got {lam}")
        if lam == 1.0:
            return inner(z_t, t, condition.primary)
        if lam == 0.0:
            return inner(z_t, t, condition.edited)
        return blend_noise(
            inner(z_t, t, condition.primary), inner(z_t, t, condition.edited), lam
        )

    return predict
