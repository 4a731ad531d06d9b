"""Constructive toy model of ideal decoherence.

Pointer states are exactly stable: the joint unitary is a sum of
|S_i><S_i| (x) U_i(t) terms where U_i rotates every environment qubit about
its own in-plane axis by an angle proportional to the pointer index.  The
environment overlaps then have the closed form

    <E_i(t)|E_j(t)> = prod_k cos((j - i) kappa t w_k)

(w_k are per-qubit angle weights, all 1 by default), giving the familiar
cos(kappa t)^K suppression between adjacent pointer states while the
diagonal of the reduced density matrix stays frozen.

Environment states stay product states, so the joint state is kept in a
factored representation; materializing the dense 2^K register is optional
and capped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericsError

DENSE_CAP = 1 << 22


def _rotation_about_inplane_axis(theta: float, azimuth: float) -> np.ndarray:
    """SU(2) rotation by ``theta`` about the axis (cos az, sin az, 0)."""
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    nx, ny = math.cos(azimuth), math.sin(azimuth)
    sigma = np.array([[0.0, nx - 1j * ny], [nx + 1j * ny, 0.0]])
    return c * np.eye(2) - 1j * s * sigma


@dataclass(frozen=True)
class IdealModelConfig:
    dimension: int                 # number of pointer states
    n_qubits: int                  # environment register size K
    kappa: float                   # coupling angle rate
    dt: float = 0.01
    angle_weights: tuple[float, ...] | None = None   # per-qubit multipliers
    pointer_basis: np.ndarray | None = None          # columns = pointer vectors
    dense_cap: int = DENSE_CAP

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("need at least one pointer state")
        if self.n_qubits < 1:
            raise ValueError("need at least one environment qubit")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.angle_weights is not None:
            w = tuple(float(v) for v in self.angle_weights)
            if len(w) != self.n_qubits:
                raise ValueError("one angle weight per qubit required")
            object.__setattr__(self, "angle_weights", w)
        if self.pointer_basis is not None:
            u = np.asarray(self.pointer_basis, dtype=complex)
            if u.shape != (self.dimension, self.dimension):
                raise ValueError("pointer basis must be square of the system dimension")
            if not np.allclose(u.conj().T @ u, np.eye(self.dimension), atol=1e-10):
                raise ValueError("pointer vectors must be orthonormal")
            object.__setattr__(self, "pointer_basis", u)

    def weights(self) -> np.ndarray:
        if self.angle_weights is None:
            return np.ones(self.n_qubits)
        return np.asarray(self.angle_weights)

    def azimuths(self) -> np.ndarray:
        """Distinct in-plane rotation axes, one per qubit."""
        return np.pi * np.arange(self.n_qubits) / (self.n_qubits + 1.0)


@dataclass(frozen=True)
class IdealModelResult:
    config: IdealModelConfig
    time: float
    coefficients: np.ndarray        # pointer-basis amplitudes of the system
    env_states: np.ndarray          # (n, K, 2): per-pointer product environment
    env_overlaps: np.ndarray        # (n, n): <E_i|E_j>
    rho_s: np.ndarray               # reduced density matrix, pointer basis

    def dense_joint_state(self) -> np.ndarray:
        """Materialize the joint state as an (n * 2^K,) vector (capped)."""
        n, k = self.config.dimension, self.config.n_qubits
        dim = n * (1 << k)
        if dim > self.config.dense_cap:
            raise NumericsError(f"dimension overflow: n * 2^K = {dim} exceeds cap "
                                f"{self.config.dense_cap}")
        out = np.zeros(dim, dtype=complex)
        for i in range(n):
            env = np.array([1.0 + 0j])
            for q in range(k):
                env = np.kron(env, self.env_states[i, q])
            out[i * (1 << k):(i + 1) * (1 << k)] = self.coefficients[i] * env
        return out

    def rho_s_system_basis(self) -> np.ndarray:
        """Reduced density matrix rotated into the computational basis."""
        u = self.config.pointer_basis
        if u is None:
            return self.rho_s
        return u @ self.rho_s @ u.conj().T


def env_overlap_closed_form(config: IdealModelConfig, i: int, j: int, t: float) -> float:
    """prod_k cos((j - i) kappa t w_k); exact for this construction."""
    return float(np.prod(np.cos((j - i) * config.kappa * t * config.weights())))


def ideal_model_evolve(config: IdealModelConfig, coefficients,
                       steps: int) -> IdealModelResult:
    """Apply the constructive pointer-conditioned unitary for ``steps`` steps.

    The environment starts in the all-qubits |0> reference product state.
    Pointer state i rotates qubit k by 2 i kappa dt w_k per step about the
    qubit's own axis; rotations about a fixed axis compose additively, so
    ``steps`` steps equal one rotation at the accumulated angle.
    """
    c = np.asarray(coefficients, dtype=complex)
    if c.shape != (config.dimension,):
        raise ValueError("one coefficient per pointer state required")
    if abs(np.vdot(c, c).real - 1.0) > 1e-10:
        raise ValueError("coefficients must be normalized")
    if steps < 0:
        raise ValueError("steps must be non-negative")

    t = steps * config.dt
    n, k = config.dimension, config.n_qubits
    w = config.weights()
    az = config.azimuths()

    env = np.zeros((n, k, 2), dtype=complex)
    ket0 = np.array([1.0, 0.0], dtype=complex)
    for i in range(n):
        for q in range(k):
            rot = _rotation_about_inplane_axis(2.0 * i * config.kappa * t * w[q], az[q])
            env[i, q] = rot @ ket0

    overlaps = np.ones((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            overlaps[i, j] = np.prod(np.sum(env[i].conj() * env[j], axis=1))

    # rho_S[i, j] = c_i conj(c_j) <E_j|E_i>
    rho = c[:, None] * c.conj()[None, :] * overlaps.T

    return IdealModelResult(config=config, time=t, coefficients=c,
                            env_states=env, env_overlaps=overlaps, rho_s=rho)
