"""Damped harmonic oscillator at zero temperature in a truncated Fock basis.

Coherent states are the pointer states of this model: the dissipator maps
|alpha><beta| seeds onto shrunken coherent dyads with a scalar prefactor, so
the numerical integrator can be cross-checked entry-by-entry against the
closed form.  Truncation is monitored through the top two Fock levels.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericsError

logger = logging.getLogger(__name__)

DEFAULT_N_MAX = 40


@dataclass(frozen=True)
class FockSpace:
    """Truncated Fock space with ladder matrices.

    The commutator [a, a+] equals the identity except on the top level,
    where truncation breaks it; states must keep negligible population there.
    """

    n_max: int = DEFAULT_N_MAX

    def __post_init__(self):
        if self.n_max < 4:
            raise ValueError("n_max must be at least 4")

    @property
    def levels(self) -> np.ndarray:
        return np.arange(self.n_max)

    def annihilation(self) -> np.ndarray:
        a = np.zeros((self.n_max, self.n_max), dtype=complex)
        ns = np.arange(1, self.n_max)
        a[ns - 1, ns] = np.sqrt(ns)
        return a

    def creation(self) -> np.ndarray:
        return self.annihilation().conj().T

    def number_operator(self) -> np.ndarray:
        return np.diag(self.levels.astype(float)).astype(complex)


@dataclass(frozen=True)
class LindbladParams:
    omega: float
    gamma: float

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")

    @property
    def rate_scale(self) -> float:
        return max(abs(self.omega), self.gamma)


@dataclass(frozen=True)
class DensityMatrix:
    space: FockSpace
    entries: np.ndarray
    time: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=complex)
        if e.shape != (self.space.n_max, self.space.n_max):
            raise ValueError("entry shape does not match the Fock space")
        object.__setattr__(self, "entries", e)

    def trace(self) -> complex:
        return complex(np.trace(self.entries))

    def hermiticity_deviation(self) -> float:
        return float(np.abs(self.entries - self.entries.conj().T).max())

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(0.5 * (self.entries + self.entries.conj().T))[0])

    def mean_occupation(self) -> float:
        return float(np.real(np.sum(self.space.levels * np.diag(self.entries))))

    def top_level_population(self) -> float:
        d = np.abs(np.diag(self.entries).real)
        return float(d[-2:].max())

    def to_record(self) -> dict:
        return {
            "n_max": self.space.n_max,
            "time": self.time,
            "re": self.entries.real.tolist(),
            "im": self.entries.imag.tolist(),
        }


def coherent_state(alpha: complex, space: FockSpace = FockSpace()) -> np.ndarray:
    """Normalized coherent-state vector exp(-|a|^2/2) a^n / sqrt(n!).

    Amplitudes with |alpha|^2 > n_max / 4 are rejected: the Poisson tail
    would leak into the truncated levels.
    """
    alpha = complex(alpha)
    if abs(alpha) ** 2 > space.n_max / 4.0:
        raise ValueError(f"|alpha|^2 = {abs(alpha)**2:.3f} exceeds n_max/4 = "
                         f"{space.n_max / 4}; truncation unsafe")
    n = space.levels
    log_fact = np.cumsum(np.concatenate(([0.0], np.log(np.arange(1, space.n_max)))))
    if alpha == 0:
        vec = np.zeros(space.n_max, dtype=complex)
        vec[0] = 1.0
        return vec
    # alpha^n / sqrt(n!) with the modulus in log space
    phase = np.exp(1j * n * np.angle(alpha))
    mag = np.exp(n * math.log(abs(alpha)) - 0.5 * log_fact - 0.5 * abs(alpha) ** 2)
    return phase * mag


def coherent_overlap(alpha: complex, beta: complex) -> complex:
    """<alpha|beta> = exp(-|a|^2/2 - |b|^2/2 + conj(a) b), conjugate-linear on the left."""
    alpha, beta = complex(alpha), complex(beta)
    return complex(np.exp(-0.5 * abs(alpha) ** 2 - 0.5 * abs(beta) ** 2
                          + np.conj(alpha) * beta))


@dataclass(frozen=True)
class CompletenessReport:
    radius: float
    samples: int
    sector: int
    matrix: np.ndarray          # Riemann-sum approximation of the identity, sector block
    max_diag_deviation: float
    max_offdiag: float

    def to_dict(self) -> dict:
        return {
            "radius": self.radius,
            "samples": self.samples,
            "sector": self.sector,
            "max_diag_deviation": self.max_diag_deviation,
            "max_offdiag": self.max_offdiag,
        }


def completeness_check(space: FockSpace = FockSpace(), radius: float | None = None,
                       samples: int = 40_000) -> CompletenessReport:
    """Riemann sum of (1/pi) integral |alpha><alpha| d^2 alpha over a disc.

    Restricted to the Fock sector n <= R^2/4, where the missing tail of the
    disc integral is negligible.  Discs with R^2 > n_max are rejected (the
    integrand is then dominated by states the truncation cannot hold);
    sample counts below 10^4 are rejected as too coarse for the oscillatory
    integrand.
    """
    if radius is None:
        radius = math.sqrt(space.n_max)
    if radius ** 2 > space.n_max * (1.0 + 1e-12):
        raise ValueError(f"R^2 = {radius**2:.1f} exceeds n_max = {space.n_max}; "
                         "tail dominated")
    if samples < 10_000:
        raise ValueError("need at least 10^4 samples for the phase integral")

    n_r = max(int(math.sqrt(samples / (2 * math.pi))), 4)
    n_t = max(int(math.ceil(samples / n_r)), 8)
    # midpoint rule in s = r^2 (the radial measure r dr = ds/2) and in angle
    s = (np.arange(n_r) + 0.5) * (radius ** 2 / n_r)
    theta = (np.arange(n_t) + 0.5) * (2 * math.pi / n_t)
    r = np.sqrt(s)
    alphas = (r[:, None] * np.exp(1j * theta[None, :])).ravel()
    w = (radius ** 2 / n_r) / 2.0 * (2 * math.pi / n_t)

    sector = int(radius ** 2 / 4) + 1
    mat = np.zeros((sector, sector), dtype=complex)
    # coherent components up to the sector cutoff; normalization exp(-|a|^2/2)
    n = np.arange(sector)
    log_fact = np.cumsum(np.concatenate(([0.0], np.log(np.arange(1, sector)))))
    batch = 4096
    for start in range(0, alphas.size, batch):
        a = alphas[start:start + batch]
        mag = np.exp(n[None, :] * np.log(np.abs(a))[:, None]
                     - 0.5 * log_fact[None, :] - 0.5 * (np.abs(a) ** 2)[:, None])
        comp = mag * np.exp(1j * n[None, :] * np.angle(a)[:, None])
        mat += (comp.T * w) @ comp.conj()
    mat /= math.pi

    diag = np.real(np.diag(mat))
    off = mat - np.diag(np.diag(mat))
    return CompletenessReport(
        radius=float(radius),
        samples=int(alphas.size),
        sector=sector,
        matrix=mat,
        max_diag_deviation=float(np.abs(diag - 1.0).max()),
        max_offdiag=float(np.abs(off).max()),
    )


# ---------------------------------------------------------------------------
# master equation

def _rhs(rho: np.ndarray, omega: float, gamma: float, levels: np.ndarray) -> np.ndarray:
    """(-i w - g/2) N rho + (i w - g/2) rho N + g a rho a+, N = a+ a."""
    out = (-1j * omega - 0.5 * gamma) * (levels[:, None] * rho) \
        + (1j * omega - 0.5 * gamma) * (rho * levels[None, :])
    lowered = np.zeros_like(rho)
    root = np.sqrt(levels[1:].astype(float))
    lowered[:-1, :-1] = np.outer(root, root) * rho[1:, 1:]
    return out + gamma * lowered


def lindblad_evolve(rho0: DensityMatrix, params: LindbladParams, t: float,
                    dt: float | None = None) -> DensityMatrix:
    """Fixed-step classical 4th-order integration of the master equation.

    Hermitian initial data is kept Hermitian by symmetrizing each step (the
    removed deviation is logged); non-Hermitian seeds such as |a><b| evolve
    as general matrices, which the linear equation permits.  Population in
    the top two Fock levels above 1e-6 aborts the run.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    max_dt = 0.01 / params.rate_scale
    if dt is None:
        dt = max_dt
    if dt > max_dt * (1 + 1e-12):
        raise ValueError(f"dt = {dt} exceeds the stability budget 0.01/max(omega, gamma)"
                         f" = {max_dt}")
    space = rho0.space
    rho = rho0.entries.astype(complex)
    if t == 0:
        return DensityMatrix(space, rho, rho0.time, {"steps": 0})

    hermitian = rho0.hermiticity_deviation() <= 1e-12
    n_steps = max(int(round(t / dt)), 1)
    h = t / n_steps
    levels = space.levels.astype(float)
    omega, gamma = params.omega, params.gamma

    sym_dev = 0.0
    for step in range(n_steps):
        k1 = _rhs(rho, omega, gamma, levels)
        k2 = _rhs(rho + 0.5 * h * k1, omega, gamma, levels)
        k3 = _rhs(rho + 0.5 * h * k2, omega, gamma, levels)
        k4 = _rhs(rho + h * k3, omega, gamma, levels)
        rho = rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if hermitian:
            dev = float(np.abs(rho - rho.conj().T).max())
            sym_dev = max(sym_dev, dev)
            rho = 0.5 * (rho + rho.conj().T)
        if step % 50 == 0 or step == n_steps - 1:
            top = float(np.abs(np.diag(rho).real)[-2:].max())
            if top > 1e-6:
                raise NumericsError(f"truncation leakage: top-level population {top:.2e} "
                                    f"at t = {(step + 1) * h:.4f}")
            if not np.isfinite(rho).all():
                raise NumericsError("non-finite density matrix during integration")
    if sym_dev > 0:
        logger.debug("hermiticity deviation removed by symmetrization: %.3e", sym_dev)

    return DensityMatrix(space, rho, rho0.time + t,
                         {"steps": n_steps, "dt": h, "symmetrization_deviation": sym_dev})


def analytic_solution(alpha: complex, beta: complex, params: LindbladParams,
                      t: float, space: FockSpace = FockSpace()) -> DensityMatrix:
    """Closed-form evolution of the seed |alpha><beta|:

        f(t) |alpha_t><beta_t|,   alpha_t = alpha exp((-i omega - gamma/2) t),
        f(t) = <beta|alpha>^(1 - exp(-gamma t))  (principal branch).
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    decay = np.exp((-1j * params.omega - 0.5 * params.gamma) * t)
    alpha_t = complex(alpha * decay)
    beta_t = complex(beta * decay)
    log_overlap = (-0.5 * abs(beta) ** 2 - 0.5 * abs(alpha) ** 2
                   + np.conj(beta) * alpha)
    f = np.exp((1.0 - math.exp(-params.gamma * t)) * log_overlap)
    entries = f * np.outer(coherent_state(alpha_t, space),
                           np.conj(coherent_state(beta_t, space)))
    return DensityMatrix(space, entries, t, {"f": complex(f)})


def trace_norm(matrix: np.ndarray) -> float:
    return float(np.linalg.svd(matrix, compute_uv=False).sum())


def normalize_superposition(c1: complex, alpha: complex,
                            c2: complex, beta: complex) -> tuple[complex, complex]:
    """Scale (c1, c2) so that c1|alpha> + c2|beta> has unit norm."""
    ov = coherent_overlap(alpha, beta)
    n_sq = abs(c1) ** 2 + abs(c2) ** 2 + 2 * np.real(np.conj(c1) * c2 * ov)
    if n_sq <= 0:
        raise ValueError("degenerate superposition")
    scale = 1.0 / math.sqrt(n_sq)
    return c1 * scale, c2 * scale


@dataclass(frozen=True)
class SuperpositionResult:
    rho: DensityMatrix
    coherence: float            # trace norm of the cross terms
    cross_magnitude: float      # |f(t)| for the (alpha, beta) pair
    mean_occupation: float
    numeric_coherence: float | None = None
    max_numeric_deviation: float | None = None

    def to_dict(self) -> dict:
        return {
            "time": self.rho.time,
            "coherence": self.coherence,
            "cross_magnitude": self.cross_magnitude,
            "mean_occupation": self.mean_occupation,
            "numeric_coherence": self.numeric_coherence,
            "max_numeric_deviation": self.max_numeric_deviation,
        }


def superposition_decoherence(c1: complex, alpha: complex, c2: complex, beta: complex,
                              params: LindbladParams, t: float,
                              space: FockSpace = FockSpace(),
                              cross_check: bool = False) -> SuperpositionResult:
    """Evolve |S><S| for |S> = c1|alpha> + c2|beta| via the four closed-form terms.

    The caller must pass normalized coefficients (see
    :func:`normalize_superposition`); the coherence metric is the trace norm
    of the two cross terms.  With ``cross_check`` the same state is evolved
    numerically and the maximum entry deviation is reported.
    """
    if abs(alpha - beta) < 1e-12:
        raise ValueError("alpha = beta: branches are linearly dependent")
    ov = coherent_overlap(alpha, beta)
    n_sq = abs(c1) ** 2 + abs(c2) ** 2 + 2 * np.real(np.conj(c1) * c2 * ov)
    if abs(n_sq - 1.0) > 1e-8:
        raise ValueError(f"superposition is not normalized: |S|^2 = {n_sq}")

    taa = analytic_solution(alpha, alpha, params, t, space)
    tbb = analytic_solution(beta, beta, params, t, space)
    tab = analytic_solution(alpha, beta, params, t, space)
    tba = analytic_solution(beta, alpha, params, t, space)
    cross = (c1 * np.conj(c2)) * tab.entries + (np.conj(c1) * c2) * tba.entries
    entries = (abs(c1) ** 2 * taa.entries + abs(c2) ** 2 * tbb.entries + cross)
    rho = DensityMatrix(space, entries, t)

    numeric_coherence = None
    max_dev = None
    if cross_check:
        seed = DensityMatrix(space, abs(c1) ** 2 * np.outer(coherent_state(alpha, space),
                                                            np.conj(coherent_state(alpha, space)))
                             + abs(c2) ** 2 * np.outer(coherent_state(beta, space),
                                                       np.conj(coherent_state(beta, space)))
                             + (c1 * np.conj(c2)) * np.outer(coherent_state(alpha, space),
                                                             np.conj(coherent_state(beta, space)))
                             + (np.conj(c1) * c2) * np.outer(coherent_state(beta, space),
                                                             np.conj(coherent_state(alpha, space))))
        numeric = lindblad_evolve(seed, params, t)
        max_dev = float(np.abs(numeric.entries - entries).max())
        numeric_cross = numeric.entries - (abs(c1) ** 2 * taa.entries
                                           + abs(c2) ** 2 * tbb.entries)
        numeric_coherence = trace_norm(numeric_cross)

    return SuperpositionResult(
        rho=rho,
        coherence=trace_norm(cross),
        cross_magnitude=float(abs(tab.meta["f"])),
        mean_occupation=rho.mean_occupation(),
        numeric_coherence=numeric_coherence,
        max_numeric_deviation=max_dev,
    )
