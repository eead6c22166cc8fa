"""Analytic data distributions with closed-form optimal denoisers.

A GaussianWorld is a known distribution over clean latents (an isotropic
Gaussian or a finite mixture of them).  For such worlds the Bayes-optimal
predicted noise at any step has a closed form, which makes them the ground
truth for verifying samplers end to end: the optimal prediction is
E[eps | z_t] = -sqrt(1 - abar_t) * grad log p_t(z_t), where p_t is the
marginal density of the noised latent.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .diffusion import NoiseSchedule
from .errors import ValidationError
from .tensors import as_array, check_same_shape

WEIGHT_SUM_TOL = 1e-9


@dataclass(frozen=True)
class GaussianWorld:
    """Isotropic Gaussian (mean, sigma) or mixture of them.

    When ``mixture`` is given it defines the distribution; ``mean`` then
    holds the mixture's overall mean for convenience.
    """

    mean: np.ndarray
    sigma: float
    mixture: Optional[tuple[tuple[float, np.ndarray, float], ...]] = None

    @classmethod
    def single(cls, mean, sigma: float) -> "GaussianWorld":
        mean = as_array(mean, "mean")
        if sigma < 0.0:
            raise ValidationError(f"sigma must be >= 0, got {sigma}")
        mean.setflags(write=False)
        return cls(mean=mean, sigma=float(sigma))

    @classmethod
    def of_mixture(cls, components: Sequence[tuple[float, object, float]]) -> "GaussianWorld":
        if not components:
            raise ValidationError("mixture needs at least one component")
        comps = []
        total = 0.0
        first_shape = None
        for i, (w, mu, sig) in enumerate(components):
            if w <= 0.0:
                raise ValidationError(f"mixture weight {i} must be positive, got {w}")
            mu = as_array(mu, f"mixture[{i}].mean")
            if sig < 0.0:
                raise ValidationError(f"mixture sigma {i} must be >= 0, got {sig}")
            if first_shape is None:
                first_shape = mu.shape
            elif mu.shape != first_shape:
                raise ValidationError("mixture component means must share one shape")
            mu.setflags(write=False)
            comps.append((float(w), mu, float(sig)))
            total += w
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise ValidationError(f"mixture weights must sum to 1, got {total}")
        overall = sum(w * mu for w, mu, _ in comps)
        overall.setflags(write=False)
        sigma = float(sum(w * sig for w, _, sig in comps))
        return cls(mean=overall, sigma=sigma, mixture=tuple(comps))

    def components(self) -> tuple[tuple[float, np.ndarray, float], ...]:
        if self.mixture is not None:
            return self.mixture
        return ((1.0, self.mean, self.sigma),)


def _marginal_params(abar: float, sigma: float) -> float:
    # variance of the noised marginal of one component
    return abar * sigma * sigma + 1.0 - abar


def _component_logpdfs(
    world: GaussianWorld, z_t: np.ndarray, abar: float
) -> np.ndarray:
    dim = z_t.size
    logs = []
    for w, mu, sig in world.components():
        s2 = _marginal_params(abar, sig)
        diff = z_t - np.sqrt(abar) * mu
        sq = float(np.sum(diff * diff))
        logs.append(np.log(w) - 0.5 * dim * np.log(2.0 * np.pi * s2) - sq / (2.0 * s2))
    return np.asarray(logs, dtype=np.float64)


def analytic_epsilon(
    world: GaussianWorld, z_t: np.ndarray, t: int, sched: NoiseSchedule
) -> np.ndarray:
    """Closed-form optimal noise prediction for a Gaussian(-mixture) world.

    Per component: sqrt(1-abar) * (z_t - sqrt(abar)*mu) / (abar*sigma^2 + 1-abar);
    mixtures combine components by posterior responsibility under the noised
    marginal.
    """
    z_t = as_array(z_t, "z_t")
    check_same_shape(z_t, world.components()[0][1], "z_t", "world mean")
    t = sched.check_step(t)
    abar = sched.alpha_bar(t)
    comps = world.components()
    if len(comps) == 1:
        _, mu, sig = comps[0]
        s2 = _marginal_params(abar, sig)
        return np.sqrt(1.0 - abar) * (z_t - np.sqrt(abar) * mu) / s2
    logs = _component_logpdfs(world, z_t, abar)
    logs = logs - logs.max()
    resp = np.exp(logs)
    resp /= resp.sum()
    eps = np.zeros_like(z_t)
    for r, (_, mu, sig) in zip(resp, comps):
        s2 = _marginal_params(abar, sig)
        eps += r * (np.sqrt(1.0 - abar) * (z_t - np.sqrt(abar) * mu) / s2)
    return eps


def log_marginal_density(
    world: GaussianWorld, z_t: np.ndarray, t: int, sched: NoiseSchedule
) -> float:
    """Log density of the noised marginal p_t(z_t) under the world."""
    z_t = as_array(z_t, "z_t")
    check_same_shape(z_t, world.components()[0][1], "z_t", "world mean")
    t = sched.check_step(t)
    abar = sched.alpha_bar(t)
    logs = _component_logpdfs(world, z_t, abar)
    peak = logs.max()
    return float(peak + np.log(np.sum(np.exp(logs - peak))))


def analytic_denoiser(sched: NoiseSchedule):
    """Denoiser whose condition is the GaussianWorld to denoise toward."""

    def predict(z_t: np.ndarray, t: int, condition: GaussianWorld) -> np.ndarray:
        if not isinstance(condition, GaussianWorld):
            raise ValidationError("analytic denoiser expects a GaussianWorld condition")
        return analytic_epsilon(condition, z_t, t, sched)

    return predict
