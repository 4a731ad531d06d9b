import numpy as np
import pytest
from scipy.integrate import quad

from wavetree.tunneling import packet_transmission, plane_wave_transmission


def test_zero_height_transmits_forward_only():
    k = np.array([-1.0, 0.0, 1.0, 2.0])
    assert plane_wave_transmission(k, 0.0, 1.0).tolist() == [0.0, 0.0, 1.0, 1.0]


def test_high_barrier_blocks():
    t = plane_wave_transmission(1.0, 50.0, 2.0)
    assert t < 1e-10


def test_resonance_at_full_wavelength():
    # above-barrier resonance: T = 1 when k' w = n pi
    height, width, mass = 1.0, 2.0, 1.0
    kp = np.pi / width
    k = np.sqrt(kp ** 2 + 2 * mass * height)
    assert plane_wave_transmission(k, height, width, mass) == pytest.approx(1.0, abs=1e-12)


def test_continuity_through_barrier_top():
    height, width = 2.0, 1.5
    k_top = np.sqrt(2 * height)
    below = plane_wave_transmission(k_top * (1 - 1e-7), height, width)
    at = plane_wave_transmission(k_top, height, width)
    above = plane_wave_transmission(k_top * (1 + 1e-7), height, width)
    assert below == pytest.approx(at, rel=1e-5)
    assert above == pytest.approx(at, rel=1e-5)


def test_packet_average_matches_direct_quadrature():
    k0, sigma, height, width = 2.0, 5.0, 1.65, 2.0

    def integrand(k):
        density = np.sqrt(2 * sigma ** 2 / np.pi) * np.exp(-2 * sigma ** 2 * (k - k0) ** 2)
        return density * plane_wave_transmission(k, height, width)

    oracle, _ = quad(integrand, k0 - 1.5, k0 + 1.5, limit=200)
    assert packet_transmission(k0, sigma, height, width) == pytest.approx(oracle, abs=1e-9)


def test_packet_average_monotone_in_height():
    values = [packet_transmission(2.0, 5.0, v, 2.0) for v in (0.5, 1.0, 1.5, 2.0, 3.0)]
    assert all(a > b for a, b in zip(values, values[1:]))
