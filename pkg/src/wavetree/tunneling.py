"""Stationary square-barrier transmission: plane-wave closed form and
packet-averaged quadrature.

This is the static counterpart of the time-dependent scattering runs: a
Gaussian packet's transmitted fraction is predicted by averaging the
plane-wave transmission coefficient over the packet's momentum density.
"""

from __future__ import annotations

import numpy as np


def plane_wave_transmission(k, height: float, width: float,
                            mass: float = 1.0) -> np.ndarray:
    """Transmission coefficient T(k) through a square barrier (hbar = 1).

    Components with k <= 0 move away from the barrier and count as not
    transmitted.  Zero (or negative) height transmits fully.
    """
    if width <= 0:
        raise ValueError("width must be positive")
    k = np.asarray(k, dtype=float)
    if height <= 0:
        return np.where(k > 0, 1.0, 0.0)
    energy = k ** 2 / (2.0 * mass)
    with np.errstate(divide="ignore", invalid="ignore"):
        gap = height - energy
        near = np.abs(gap) < 1e-12 * height

        kappa = np.sqrt(2.0 * mass * np.abs(gap))
        below = 1.0 + height ** 2 * np.sinh(np.minimum(kappa * width, 350.0)) ** 2 \
            / (4.0 * energy * np.abs(gap))
        above = 1.0 + height ** 2 * np.sin(kappa * width) ** 2 \
            / (4.0 * energy * np.abs(gap))
        # E -> height limit: sinh^2(kappa w)/gap -> 2 m w^2
        at_top = 1.0 + height ** 2 * 2.0 * mass * width ** 2 / (4.0 * energy)

        inv = np.where(near, at_top, np.where(energy < height, below, above))
        t = np.where(k > 0, 1.0 / inv, 0.0)
    return np.where(np.isfinite(t), t, 0.0)


def packet_transmission(momentum: float, width: float, height: float,
                        barrier_width: float, mass: float = 1.0,
                        samples: int = 4001) -> float:
    """Momentum-averaged transmission of a Gaussian packet.

    The packet's spectral density is a Gaussian of standard deviation
    1/(2 width) around ``momentum``; T(k) is integrated against it on a
    +-8 sigma_k window by the trapezoid rule.
    """
    sigma_k = 1.0 / (2.0 * width)
    k = np.linspace(momentum - 8 * sigma_k, momentum + 8 * sigma_k, samples)
    density = np.sqrt(2.0 * width ** 2 / np.pi) * np.exp(-2.0 * width ** 2 * (k - momentum) ** 2)
    t = plane_wave_transmission(k, height, barrier_width, mass)
    return float(np.trapezoid(density * t, k))
