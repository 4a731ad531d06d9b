"""Unitary Schrödinger evolution: spectral split-step with Strang ordering.

Kinetic half lives in momentum space, potential half in position space,
periodic boundaries, hbar = 1.  Norm is preserved unconditionally; scenarios
are responsible for keeping packets away from the box boundaries.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericsError
from .grid import Grid
from .wavefunction import WaveFunction


@dataclass(frozen=True)
class EvolutionEngine:
    grid: Grid
    dt: float
    mass: float = 1.0
    potential: np.ndarray | None = None
    method: str = field(default="split-step", init=False)

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.mass <= 0:
            raise ValueError("mass must be positive")
        v = self.potential
        if v is None:
            v = np.zeros(self.grid.shape)
        v = np.asarray(v, dtype=float)
        if v.shape != self.grid.shape:
            raise ValueError(f"potential shape {v.shape} != grid shape {self.grid.shape}")
        if not np.isfinite(v).all():
            raise ValueError("potential must be finite")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "potential", v)

        k2 = sum(k ** 2 for k in self.grid.wavenumbers())
        object.__setattr__(self, "_half_potential_phase",
                           np.exp(-0.5j * v * self.dt))
        object.__setattr__(self, "_kinetic_phase",
                           np.exp(-1j * k2 / (2.0 * self.mass) * self.dt))

    def steps_for(self, t: float) -> tuple[int, float]:
        """Whole steps fitting in t (rounded down) and the effective time."""
        if t < 0:
            raise ValueError("t must be non-negative")
        # tolerate float noise just below an exact multiple
        n = int(np.floor(t / self.dt + 1e-9))
        return n, n * self.dt

    def evolve_steps(self, psi: WaveFunction, n: int) -> WaveFunction:
        if n < 0:
            raise ValueError("step count must be non-negative")
        if psi.grid != self.grid:
            raise NumericsError("wave function grid does not match the engine grid")
        amp = psi.amplitudes
        hv = self._half_potential_phase
        kin = self._kinetic_phase
        for _ in range(n):
            amp = hv * amp
            amp = np.fft.ifftn(kin * np.fft.fftn(amp))
            amp = hv * amp
        if not np.isfinite(amp).all():
            raise NumericsError("non-finite amplitudes after evolution "
                                f"({n} steps, dt={self.dt})")
        return WaveFunction(self.grid, amp)

    def evolve(self, psi: WaveFunction, t: float) -> WaveFunction:
        """Evolve by (the largest whole-step multiple of dt inside) t."""
        n, t_eff = self.steps_for(t)
        if abs(t_eff - t) > 1e-9 * max(t, self.dt):
            warnings.warn(f"t={t} is not a multiple of dt={self.dt}; "
                          f"evolving for effective t={t_eff}", stacklevel=2)
        return self.evolve_steps(psi, n)


def evolve(psi: WaveFunction, engine: EvolutionEngine, t: float) -> WaveFunction:
    return engine.evolve(psi, t)


def square_barrier(grid: Grid, height: float, width: float,
                   center: float = 0.0, axis: int = 0) -> np.ndarray:
    """Rectangular barrier along one axis, constant across the others."""
    if width <= 0:
        raise ValueError("barrier width must be positive")
    x = grid.coordinates()[axis]
    return np.where(np.abs(x - center) <= width / 2, float(height), 0.0)


def harmonic_potential(grid: Grid, omega: float, mass: float = 1.0,
                       center=0.0) -> np.ndarray:
    """Isotropic harmonic well (1/2) m omega^2 |x - c|^2."""
    center = np.broadcast_to(np.atleast_1d(np.asarray(center, dtype=float)),
                             (grid.dimension,))
    r2 = sum((c - c0) ** 2 for c, c0 in zip(grid.coordinates(), center))
    return 0.5 * mass * omega ** 2 * r2
