import numpy as np
import pytest

from wavetree import (
    EvolutionEngine,
    Grid,
    WaveFunction,
    gaussian_packet,
    harmonic_potential,
    inner,
    square_barrier,
)


def free_gaussian(grid, center, momentum, width, t, mass=1.0):
    """Closed-form free evolution of a Gaussian packet (independent oracle)."""
    x = grid.axis(0)
    s = width * (1 + 1j * t / (2 * mass * width ** 2))
    norm = (2 * np.pi * width ** 2) ** -0.25 * np.sqrt(width / s)
    drift = center + momentum * t / mass
    phase = momentum * (x - center) - momentum ** 2 * t / (2 * mass)
    return norm * np.exp(-(x - drift) ** 2 / (4 * width * s) + 1j * phase)


def test_free_packet_matches_closed_form():
    g = Grid.line(80.0, 1024)
    engine = EvolutionEngine(g, dt=0.002)
    psi0 = gaussian_packet(g, -10.0, 2.0, 1.5)
    out = engine.evolve(psi0, 6.0)
    oracle = free_gaussian(g, -10.0, 2.0, 1.5, 6.0)
    # discrete normalization differs from the continuum one only at 1e-12
    assert np.abs(out.amplitudes - oracle).max() < 1e-8


def test_free_packet_moments_follow_dispersion_law():
    g = Grid.line(80.0, 1024)
    engine = EvolutionEngine(g, dt=0.002, mass=2.0)
    k, sigma = 1.5, 1.2
    psi = engine.evolve(gaussian_packet(g, -12.0, k, sigma), 8.0)
    assert psi.mean_position()[0] == pytest.approx(-12.0 + k / 2.0 * 8.0, abs=0.05)
    x = g.axis(0)
    rho = psi.density() * g.cell_volume
    mean = float((rho * x).sum())
    var = float((rho * (x - mean) ** 2).sum())
    expected = sigma ** 2 * (1 + (8.0 / (2 * 2.0 * sigma ** 2)) ** 2)
    assert var == pytest.approx(expected, rel=1e-3)


def test_zero_time_is_identity():
    g = Grid.line(40.0, 256)
    engine = EvolutionEngine(g, dt=0.01)
    psi = gaussian_packet(g, 0.0, 1.0, 1.0)
    assert np.array_equal(engine.evolve(psi, 0.0).amplitudes, psi.amplitudes)


def test_harmonic_ground_state_is_stationary():
    g = Grid.line(30.0, 1024)
    omega, mass = 1.0, 1.0
    period = 2 * np.pi / omega
    engine = EvolutionEngine(g, dt=period / 4096, mass=mass,
                             potential=harmonic_potential(g, omega, mass))
    # ground state width sigma^2 = 1/(2 m omega) in packet convention
    sigma = np.sqrt(1.0 / (2 * mass * omega))
    psi0 = gaussian_packet(g, 0.0, 0.0, sigma)
    out = engine.evolve(psi0, period)
    assert np.abs(np.abs(out.amplitudes) - np.abs(psi0.amplitudes)).max() < 1e-6


def test_unitarity_random_states_and_engine():
    g = Grid.line(40.0, 512)
    rng = np.random.default_rng(11)
    smooth = rng.normal(size=(2, 512)) + 1j * rng.normal(size=(2, 512))
    # band-limit so the states are grid-resolved
    for row in smooth:
        ft = np.fft.fft(row)
        ft[60:-60] = 0.0
        row[:] = np.fft.ifft(ft)
    psi = WaveFunction(g, smooth[0]).normalized()
    phi = WaveFunction(g, smooth[1]).normalized()
    potential = 0.5 * rng.normal(size=512) ** 2
    engine = EvolutionEngine(g, dt=0.003, potential=potential)
    before = inner(psi, phi)
    psi_t = engine.evolve_steps(psi, 1000)
    phi_t = engine.evolve_steps(phi, 1000)
    assert abs(inner(psi_t, phi_t) - before) <= 1e-8
    assert abs(psi_t.norm_sq() - 1.0) <= 1e-8


def test_steps_for_rounds_down_and_warns():
    g = Grid.line(40.0, 256)
    engine = EvolutionEngine(g, dt=0.1)
    assert engine.steps_for(0.55) == (5, pytest.approx(0.5))
    assert engine.steps_for(0.6000000001) == (6, pytest.approx(0.6))
    with pytest.warns(UserWarning, match="effective"):
        engine.evolve(gaussian_packet(g, 0, 0, 1.0), 0.55)


def test_engine_validation():
    g = Grid.line(40.0, 256)
    with pytest.raises(ValueError):
        EvolutionEngine(g, dt=-1.0)
    with pytest.raises(ValueError):
        EvolutionEngine(g, dt=0.1, mass=0.0)
    with pytest.raises(ValueError, match="finite"):
        EvolutionEngine(g, dt=0.1, potential=np.full(256, np.nan))
    with pytest.raises(ValueError, match="shape"):
        EvolutionEngine(g, dt=0.1, potential=np.zeros(128))


def test_square_barrier_and_harmonic_builders():
    g = Grid.line(40.0, 256)
    v = square_barrier(g, 2.0, 4.0, center=1.0)
    x = g.axis(0)
    inside = np.abs(x - 1.0) <= 2.0
    assert (v[inside] == 2.0).all() and (v[~inside] == 0.0).all()
    h = harmonic_potential(g, omega=2.0, mass=0.5)
    # cell centers sit half a cell off the origin
    assert h.min() <= 0.5 * 0.5 * 4.0 * (g.spacing[0] / 2) ** 2 + 1e-12
    assert h[0] == pytest.approx(0.5 * 0.5 * 4.0 * x[0] ** 2)


def test_2d_free_evolution_matches_product_of_closed_forms():
    g = Grid.plane(60.0, (128, 128))
    engine = EvolutionEngine(g, dt=0.01, mass=1.5)
    psi0 = gaussian_packet(g, (-5.0, 3.0), (1.0, -0.5), (2.0, 1.5))
    out = engine.evolve(psi0, 4.0)
    gx, gy = Grid.line(60.0, 128), Grid.line(60.0, 128)
    fx = free_gaussian(gx, -5.0, 1.0, 2.0, 4.0, mass=1.5)
    fy = free_gaussian(gy, 3.0, -0.5, 1.5, 4.0, mass=1.5)
    oracle = np.outer(fx, fy)
    # normalize both to kill the continuum-vs-grid normalization offset
    oracle /= np.linalg.norm(oracle)
    target = out.amplitudes / np.linalg.norm(out.amplitudes)
    assert np.abs(target - oracle).max() < 1e-8
