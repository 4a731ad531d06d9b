"""Wave functions on grids, the projection-valued measure, Gaussian packets.

Wave functions are immutable values: every operation returns a new instance.
Inner products and norms use grid quadrature (sum times cell volume).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import GridMismatchError, NumericsError
from .grid import Grid, Partition, Region, require_same_grid


@dataclass(frozen=True)
class WaveFunction:
    grid: Grid
    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=np.complex128)
        if amp.shape != self.grid.shape:
            raise ValueError(f"amplitude shape {amp.shape} != grid shape {self.grid.shape}")
        amp = amp.copy()
        amp.flags.writeable = False
        object.__setattr__(self, "amplitudes", amp)

    # -- elementary algebra (same-grid checked) --

    def __add__(self, other: "WaveFunction") -> "WaveFunction":
        require_same_grid(self, other)
        return WaveFunction(self.grid, self.amplitudes + other.amplitudes)

    def __sub__(self, other: "WaveFunction") -> "WaveFunction":
        require_same_grid(self, other)
        return WaveFunction(self.grid, self.amplitudes - other.amplitudes)

    def __mul__(self, scalar: complex) -> "WaveFunction":
        return WaveFunction(self.grid, self.amplitudes * scalar)

    __rmul__ = __mul__

    def density(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm_sq(self) -> float:
        return float(np.sum(self.density()) * self.grid.cell_volume)

    def norm(self) -> float:
        return float(np.sqrt(self.norm_sq()))

    def normalized(self) -> "WaveFunction":
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize the zero function")
        return WaveFunction(self.grid, self.amplitudes / n)

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.amplitudes).all())

    def mean_position(self) -> np.ndarray:
        rho = self.density()
        total = rho.sum()
        return np.array([float((rho * c).sum() / total) for c in self.grid.coordinates()])

    def mean_momentum(self) -> np.ndarray:
        """First moment of the spectral density (grid momentum resolution)."""
        ft = np.fft.fftn(self.amplitudes)
        w = np.abs(ft) ** 2
        total = w.sum()
        return np.array([float((w * k).sum() / total) for k in self.grid.wavenumbers()])

    # -- serialization: grid metadata + interleaved (re, im), row-major --

    def to_record(self) -> dict:
        flat = self.amplitudes.ravel()
        inter = np.empty(2 * flat.size)
        inter[0::2] = flat.real
        inter[1::2] = flat.imag
        return {"grid": self.grid.to_dict(), "amplitudes": inter.tolist()}

    @classmethod
    def from_record(cls, record: dict) -> "WaveFunction":
        grid = Grid.from_dict(record["grid"])
        inter = np.asarray(record["amplitudes"], dtype=float)
        if inter.size != 2 * grid.size:
            raise ValueError("amplitude record length does not match the grid")
        amp = (inter[0::2] + 1j * inter[1::2]).reshape(grid.shape)
        return cls(grid, amp)


def inner(psi: WaveFunction, phi: WaveFunction) -> complex:
    """Grid inner product <psi|phi>, conjugate-linear in the first argument."""
    require_same_grid(psi, phi)
    return complex(np.vdot(psi.amplitudes, phi.amplitudes) * psi.grid.cell_volume)


def project(psi: WaveFunction, region: Region) -> WaveFunction:
    """Apply the projection E(region): zero amplitudes outside the region."""
    if psi.grid != region.grid:
        raise GridMismatchError("wave function and region live on different grids")
    return WaveFunction(psi.grid, np.where(region.mask, psi.amplitudes, 0.0))


def decompose_by_partition(psi: WaveFunction, part: Partition):
    """Exact spatial decomposition {E(block_i) psi}; components sum to psi bit-exactly.

    Raises NumericsError when a block carries no amplitude mass (the component
    would be zero, breaking linear independence).
    """
    from .decomposition import Decomposition

    if psi.grid != part.grid:
        raise GridMismatchError("wave function and partition live on different grids")
    masses = part.block_masses(psi.density())
    if (masses <= 0.0).any():
        empty = int(np.nonzero(masses <= 0.0)[0][0])
        raise NumericsError(f"partition block {empty} carries zero amplitude mass")
    comps = [project(psi, part.block(i)) for i in range(part.n_blocks)]
    return Decomposition(comps, parent=psi)


def gaussian_packet(grid: Grid, center, momentum=0.0, width=1.0,
                    phase: float = 0.0) -> WaveFunction:
    """Normalized Gaussian packet exp(-(x-c)^2/(4 w^2) + i k.(x-c) + i phase).

    Per-axis ``center``/``momentum``/``width`` accept scalars on 1D grids.
    Width below 2 cells is rejected (unresolvable); packets closer than
    6 widths to a boundary trigger a warning (periodic wrap-around).
    """
    dim = grid.dimension
    center = np.broadcast_to(np.atleast_1d(np.asarray(center, dtype=float)), (dim,))
    momentum = np.broadcast_to(np.atleast_1d(np.asarray(momentum, dtype=float)), (dim,))
    width = np.broadcast_to(np.atleast_1d(np.asarray(width, dtype=float)), (dim,))
    if (width <= 0).any():
        raise ValueError("width must be positive")
    for i in range(dim):
        if width[i] < 2 * grid.spacing[i]:
            raise ValueError(f"width {width[i]} along axis {i} is below 2 cells "
                             f"({2 * grid.spacing[i]:g}); unresolvable")
        half = grid.extent[i] / 2
        if abs(center[i]) + 6 * width[i] > half:
            warnings.warn(f"packet along axis {i} is within 6 widths of the boundary; "
                          "periodic images may interfere", stacklevel=2)

    coords = grid.coordinates()
    exponent = np.zeros(grid.shape, dtype=np.complex128)
    for i in range(dim):
        dx = coords[i] - center[i]
        exponent += -(dx ** 2) / (4 * width[i] ** 2) + 1j * momentum[i] * dx
    amp = np.exp(exponent + 1j * phase)
    psi = WaveFunction(grid, amp)
    return psi.normalized()
