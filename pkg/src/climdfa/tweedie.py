"""Compound Poisson-Gamma sampling for Tweedie-distributed losses.

For power p in (1, 2) a Tweedie(mu, phi) variable is a Poisson sum of
Gamma jumps with

    rate  = mu**(2-p) / (phi * (2-p))
    shape = (2-p) / (p-1)
    scale = phi * (p-1) * mu**(p-1)

so the draw has mean mu, variance phi * mu**p and an atom at zero of
mass exp(-rate).
"""

from __future__ import annotations

import numpy as np


def tweedie_components(mu: float, phi: float, power: float) -> tuple[float, float, float]:
    """Return (poisson_rate, gamma_shape, gamma_scale) for Tweedie(mu, phi)."""
    if not mu > 0.0:
        raise ValueError("mu must be positive")
    if not phi > 0.0:
        raise ValueError("phi must be positive")
    if not 1.0 < power < 2.0:
        raise ValueError("power must lie strictly between 1 and 2")
    rate = mu ** (2.0 - power) / (phi * (2.0 - power))
    shape = (2.0 - power) / (power - 1.0)
    scale = phi * (power - 1.0) * mu ** (power - 1.0)
    return rate, shape, scale


def sample_tweedie(
    mu: float,
    phi: float,
    power: float,
    size: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Draw `size` independent Tweedie(mu, phi) variates."""
    rate, shape, scale = tweedie_components(mu, phi, power)
    counts = rng.poisson(rate, size)
    total = int(counts.sum())
    if total == 0:
        return np.zeros(size)
    jumps = rng.gamma(shape, scale, total)
    return np.bincount(np.repeat(np.arange(size), counts), weights=jumps, minlength=size)
