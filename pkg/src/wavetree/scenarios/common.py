"""Branch bookkeeping and joint-grid conditional operations.

Scenario states are kept as lists of branches; each branch is a grid field
optionally dressed with an internal (non-configurational) factor and a
qubit-register environment.  Conditional unitaries act exactly: an operator
conditioned on a half-space splits a branch into its two projected pieces,
and pieces of negligible mass are pruned (the dropped mass is accounted).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..register import UniformRegister, dressed_pair_overlap
from ..wavefunction import WaveFunction


@dataclass(frozen=True)
class Branch:
    field: WaveFunction
    register: UniformRegister = UniformRegister(0)
    internal: tuple[complex, ...] | None = None   # e.g. a system-qubit factor

    def internal_weight(self) -> float:
        if self.internal is None:
            return 1.0
        v = np.asarray(self.internal)
        return float(np.vdot(v, v).real)

    def mass(self) -> float:
        return self.field.norm_sq() * self.internal_weight()


def total_mass(branches: list[Branch]) -> float:
    return sum(b.mass() for b in branches)


def branch_pair_overlap(a: Branch, b: Branch) -> float:
    """Two-branch overlap on the joint (grid x register) configuration space."""
    return dressed_pair_overlap(a.field, a.register, b.field, b.register,
                                a.internal_weight(), b.internal_weight())


def translate(field: WaveFunction, shift: float, axis: int) -> WaveFunction:
    """Exact periodic translation along one axis via the spectral phase."""
    grid = field.grid
    k = 2 * np.pi * np.fft.fftfreq(grid.cells[axis], d=grid.spacing[axis])
    shape = [1] * grid.dimension
    shape[axis] = -1
    phase = np.exp(-1j * k * shift).reshape(shape)
    amp = np.fft.ifft(np.fft.fft(field.amplitudes, axis=axis) * phase, axis=axis)
    return WaveFunction(grid, amp)


def conditional_displacement(field: WaveFunction, cond_axis: int, move_axis: int,
                             shift: float, boundary: float = 0.0) -> WaveFunction:
    """Translate ``move_axis`` by +shift where the conditioning coordinate is
    above ``boundary`` and by -shift elsewhere.  Exact unitary on the grid."""
    coords = field.grid.coordinates()[cond_axis]
    above = coords > boundary
    plus = translate(field, shift, move_axis).amplitudes
    minus = translate(field, -shift, move_axis).amplitudes
    return WaveFunction(field.grid, np.where(above, plus, minus))


def momentum_reversed(field: WaveFunction) -> WaveFunction:
    """Complex conjugation: reverses all momenta, leaves densities unchanged.

    Applying this once and continuing with the same (real-potential) engine
    retraces the prior dynamics; this is the constructed reversal protocol.
    """
    return WaveFunction(field.grid, np.conj(field.amplitudes))


def split_by_halfspace(branch: Branch, axis: int, boundary: float = 0.0) -> list[Branch]:
    """Project a branch onto the two half-spaces of one coordinate (exact)."""
    coords = branch.field.grid.coordinates()[axis]
    above = coords > boundary
    out = []
    for mask in (~above, above):
        amp = np.where(mask, branch.field.amplitudes, 0.0)
        out.append(replace(branch, field=WaveFunction(branch.field.grid, amp)))
    return out


def apply_conditional_rotation(branches: list[Branch], cond_axis: int, dphi: float,
                               boundary: float = 0.0, mass_tol: float = 1e-12) -> tuple[list[Branch], float]:
    """Rotate each branch register by +-dphi conditioned on a half-space.

    The exact operator is P_above (x) R(+dphi) + P_below (x) R(-dphi); each
    branch splits into its two conditioned pieces and pieces below
    ``mass_tol`` are pruned.  Returns the new branch list and the pruned mass.
    """
    out: list[Branch] = []
    pruned = 0.0
    for br in branches:
        below, above = split_by_halfspace(br, cond_axis, boundary)
        for piece, sign in ((below, -1.0), (above, +1.0)):
            m = piece.mass()
            if m < mass_tol:
                pruned += m
                continue
            out.append(replace(piece, register=piece.register.rotated(sign * dphi)))
    return out, pruned


def mean_coordinate(field: WaveFunction, axis: int) -> float:
    rho = field.density()
    total = rho.sum()
    if total <= 0:
        return 0.0
    return float((rho * field.grid.coordinates()[axis]).sum() / total)


def halfspace_mass(field: WaveFunction, axis: int, boundary: float = 0.0) -> tuple[float, float]:
    """(mass at or below boundary, mass above boundary)."""
    coords = field.grid.coordinates()[axis]
    rho = field.density() * field.grid.cell_volume
    above = float(rho[coords > boundary].sum())
    return float(rho.sum()) - above, above
