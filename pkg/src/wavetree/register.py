"""Qubit-register environments for the scenario pipelines.

Scenario environments are registers of K qubits whose branches pick up
opposite conditional rotations.  The register's computational basis plays
the role of its configuration space: starting every qubit in the symmetric
reference state R_x(pi/2)|0> and rotating branch registers by +-phi about x
moves their basis *populations* apart (not just their phases), so branch
registers become non-overlapping in configuration, not merely orthogonal.

For two branches with uniform accumulated angles the joint min-density
integral over (grid cells) x (register bitstrings) collapses to a Hamming
weight sum, which keeps the dressed two-branch overlap exact at any K.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import comb

from .wavefunction import WaveFunction


@dataclass(frozen=True)
class UniformRegister:
    """K qubits, each in R_x(pi/2 + angle)|0>; ``angle`` is the accumulated
    conditional rotation (signed, radians)."""

    n_qubits: int
    angle: float = 0.0

    def __post_init__(self):
        if self.n_qubits < 0:
            raise ValueError("qubit count must be non-negative")

    def rotated(self, delta: float) -> "UniformRegister":
        return UniformRegister(self.n_qubits, self.angle + delta)

    def qubit_state(self) -> np.ndarray:
        theta = math.pi / 2 + self.angle
        return np.array([math.cos(theta / 2.0), -1j * math.sin(theta / 2.0)])

    def population_one(self) -> float:
        """Probability of |1> per qubit: (1 + sin angle) / 2."""
        return 0.5 * (1.0 + math.sin(self.angle))

    def overlap(self, other: "UniformRegister") -> float:
        """<self|other> = cos((other.angle - self.angle)/2)^K (real by construction)."""
        if self.n_qubits != other.n_qubits:
            raise ValueError("register sizes differ")
        return float(math.cos((other.angle - self.angle) / 2.0) ** self.n_qubits)

    def config_overlap(self, other: "UniformRegister") -> float:
        """sum_s min(q_self(s), q_other(s)) over register bitstrings."""
        return float(min_weighted_config_overlap(np.ones(1), np.ones(1), self, other))


def _hamming_densities(reg: UniformRegister) -> np.ndarray:
    """q(h) for a bitstring of Hamming weight h (without the binomial count)."""
    k = reg.n_qubits
    p = reg.population_one()
    h = np.arange(k + 1)
    with np.errstate(divide="ignore"):
        logp = np.where(h > 0, h * np.log(np.maximum(p, 1e-300)), 0.0)
        logq = np.where(k - h > 0, (k - h) * np.log(np.maximum(1.0 - p, 1e-300)), 0.0)
    return np.exp(logp + logq)


def min_weighted_config_overlap(weights_a: np.ndarray, weights_b: np.ndarray,
                                reg_a: UniformRegister, reg_b: UniformRegister) -> float:
    """sum_{cell, s} min(weights_a[cell] q_a(s), weights_b[cell] q_b(s)).

    Exact for uniform registers: bitstrings of equal Hamming weight share one
    likelihood ratio, so the 2^K sum reduces to K + 1 terms.
    """
    if reg_a.n_qubits != reg_b.n_qubits:
        raise ValueError("register sizes differ")
    k = reg_a.n_qubits
    if k == 0:
        return float(np.minimum(weights_a, weights_b).sum())
    qa = _hamming_densities(reg_a)
    qb = _hamming_densities(reg_b)
    counts = comb(k, np.arange(k + 1))
    terms = np.minimum(weights_a[:, None] * qa[None, :],
                       weights_b[:, None] * qb[None, :])
    return float((terms * counts[None, :]).sum())


def dressed_pair_overlap(field_a: WaveFunction, reg_a: UniformRegister,
                         field_b: WaveFunction, reg_b: UniformRegister,
                         weight_a: float = 1.0, weight_b: float = 1.0) -> float:
    """Two-branch spatial overlap on the joint (grid x register) configuration space.

    This is the closed pair form evaluated on the product configuration
    space: min-density integral over cells and register bitstrings, divided
    by the smaller branch norm.  ``weight_*`` carry the squared norms of any
    non-configurational internal factors (registers are normalized).
    """
    vol = field_a.grid.cell_volume
    rho_a = field_a.density().ravel() * vol * weight_a
    rho_b = field_b.density().ravel() * vol * weight_b
    min_integral = min_weighted_config_overlap(rho_a, rho_b, reg_a, reg_b)
    norm_a = field_a.norm_sq() * weight_a
    norm_b = field_b.norm_sq() * weight_b
    low = min(norm_a, norm_b)
    if low <= 0:
        raise ValueError("zero-norm branch")
    return float(math.sqrt(min_integral / low))
