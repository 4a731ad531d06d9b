import numpy as np
import pytest
from scipy.integrate import quad

from wavetree import (
    Grid,
    GridMismatchError,
    NumericsError,
    Partition,
    Region,
    WaveFunction,
    decompose_by_partition,
    gaussian_packet,
    inner,
    pair_overlap,
    project,
)


@pytest.fixture
def line():
    return Grid.line(40.0, 1024)


def test_inner_normalization(line):
    psi = gaussian_packet(line, 0.0, 1.0, 1.0)
    assert inner(psi, psi) == pytest.approx(1.0, abs=1e-12)


def test_inner_disjoint_supports(line):
    psi = gaussian_packet(line, -10.0, 0.0, 1.0)
    phi = gaussian_packet(line, 10.0, 0.0, 1.0)
    left = project(psi, Region.where(line, lambda x: x < 0))
    right = project(phi, Region.where(line, lambda x: x >= 0))
    assert inner(left, right) == 0.0


def test_inner_gaussian_overlap_quadrature_oracle(line):
    # continuum quadrature of the overlap integrand, independent of the grid sum
    sigma = 1.0
    d = 4.0 * sigma

    def integrand(x):
        a = (2 * np.pi * sigma ** 2) ** -0.25
        return (a * np.exp(-x ** 2 / (4 * sigma ** 2))
                * a * np.exp(-(x - d) ** 2 / (4 * sigma ** 2)))

    oracle, _ = quad(integrand, -30, 30)
    psi = gaussian_packet(line, 0.0, 0.0, sigma)
    phi = gaussian_packet(line, d, 0.0, sigma)
    val = inner(psi, phi)
    assert val.imag == pytest.approx(0.0, abs=1e-12)
    assert val.real == pytest.approx(oracle, abs=1e-10)
    assert oracle == pytest.approx(np.exp(-d ** 2 / (8 * sigma ** 2)), rel=1e-10)


def test_inner_narrow_width_convention_matches_e_minus_4(line):
    # packets with amplitude profile exp(-x^2 / (2 s^2)) at separation 4 s
    # overlap at exp(-4); that profile is width s / sqrt(2) in our convention
    s = 1.0
    psi = gaussian_packet(line, 0.0, 0.0, s / np.sqrt(2))
    phi = gaussian_packet(line, 4 * s, 0.0, s / np.sqrt(2))
    assert inner(psi, phi).real == pytest.approx(np.exp(-4), rel=1e-9)


def test_inner_conjugate_symmetry(line):
    rng = np.random.default_rng(7)
    a = WaveFunction(line, rng.normal(size=1024) + 1j * rng.normal(size=1024))
    b = WaveFunction(line, rng.normal(size=1024) + 1j * rng.normal(size=1024))
    assert inner(a, b) == pytest.approx(np.conj(inner(b, a)), abs=1e-12)


def test_inner_grid_mismatch(line):
    other = Grid.line(40.0, 512)
    with pytest.raises(GridMismatchError):
        inner(gaussian_packet(line, 0, 0, 1.0), gaussian_packet(other, 0, 0, 1.0))


def test_project_identity_and_zero(line):
    psi = gaussian_packet(line, 0.0, 2.0, 1.0)
    assert np.array_equal(project(psi, Region.all_cells(line)).amplitudes,
                          psi.amplitudes)
    # an all-false region is a legal raw mask and gives the zero function
    nothing = Region(line, np.zeros(line.shape, dtype=bool))
    assert project(psi, nothing).norm() == 0.0


def test_project_support_containment(line):
    psi = gaussian_packet(line, -10.0, 0.0, 1.0)
    left = Region.where(line, lambda x: x < 0)
    supported = project(psi, left)
    assert np.array_equal(project(supported, left).amplitudes, supported.amplitudes)


def test_projection_idempotent_bit_exact(line):
    rng = np.random.default_rng(3)
    psi = WaveFunction(line, rng.normal(size=1024) + 1j * rng.normal(size=1024))
    region = Region(line, rng.random(1024) < 0.4)
    once = project(psi, region)
    twice = project(once, region)
    assert np.array_equal(once.amplitudes, twice.amplitudes)


def test_pvm_completeness_and_orthogonality(line):
    rng = np.random.default_rng(5)
    psi = WaveFunction(line, rng.normal(size=1024) + 1j * rng.normal(size=1024))
    labels = rng.integers(0, 3, size=1024).astype(np.int32)
    labels[:3] = [0, 1, 2]  # keep every block occupied
    part = Partition(line, labels, 3)
    pieces = [project(psi, part.block(i)) for i in range(3)]
    total = pieces[0].amplitudes + pieces[1].amplitudes + pieces[2].amplitudes
    assert np.array_equal(total, psi.amplitudes)
    for i in range(3):
        for j in range(i + 1, 3):
            assert inner(pieces[i], pieces[j]) == 0.0


def test_decompose_by_partition_two_bumps(line):
    psi = (gaussian_packet(line, -8.0, 0.0, 1.0) + gaussian_packet(line, 8.0, 0.0, 1.0)).normalized()
    part = Partition.split_1d(line, 0.0)
    d = decompose_by_partition(psi, part)
    assert d.n == 2
    assert np.array_equal((d.components[0] + d.components[1]).amplitudes, psi.amplitudes)
    assert (d.components[0].density() * d.components[1].density()).max() == 0.0
    # its own partition scores zero overlap: exact spatial decomposition
    assert pair_overlap(d).value == pytest.approx(0.0, abs=1e-14)


def test_decompose_identity_single_block(line):
    psi = gaussian_packet(line, 0.0, 1.0, 1.0)
    d = decompose_by_partition(psi, Partition.trivial(line))
    assert d.n == 1
    assert np.array_equal(d.components[0].amplitudes, psi.amplitudes)


def test_decompose_rejects_zero_mass_block(line):
    psi = project(gaussian_packet(line, -10.0, 0.0, 1.0),
                  Region.where(line, lambda x: x < 0))
    with pytest.raises(NumericsError, match="zero amplitude mass"):
        decompose_by_partition(psi, Partition.split_1d(line, 0.0))


def test_gaussian_packet_moments(line):
    psi = gaussian_packet(line, 3.0, 2.5, 1.5)
    assert psi.norm() == pytest.approx(1.0, abs=1e-10)
    assert abs(psi.mean_position()[0] - 3.0) < 0.5 * line.spacing[0]
    # spectral first moment; grid momentum resolution is 2 pi / extent
    assert abs(psi.mean_momentum()[0] - 2.5) < 2 * np.pi / line.extent[0]


def test_gaussian_packet_opposite_momenta_nearly_orthogonal(line):
    k, sigma = 4.0, 1.5
    plus = gaussian_packet(line, 0.0, k, sigma)
    minus = gaussian_packet(line, 0.0, -k, sigma)
    expected = np.exp(-2 * k ** 2 * sigma ** 2)  # = 3e-32 here
    assert abs(inner(plus, minus)) <= expected + 1e-12


def test_gaussian_packet_rejects_unresolvable_width(line):
    with pytest.raises(ValueError, match="unresolvable"):
        gaussian_packet(line, 0.0, 0.0, 0.01)


def test_gaussian_packet_warns_near_boundary(line):
    with pytest.warns(UserWarning, match="boundary"):
        gaussian_packet(line, 18.0, 0.0, 1.0)


def test_wavefunction_record_roundtrip(line):
    psi = gaussian_packet(line, 1.0, -2.0, 1.0, phase=0.3)
    back = WaveFunction.from_record(psi.to_record())
    assert back.grid == psi.grid
    assert np.allclose(back.amplitudes, psi.amplitudes, atol=0, rtol=1e-15)


def test_2d_packet_and_projection():
    g = Grid.plane(20.0, (64, 64))
    psi = gaussian_packet(g, (2.0, -1.0), (0.5, 0.0), (1.0, 1.5))
    assert psi.norm() == pytest.approx(1.0, abs=1e-10)
    mean = psi.mean_position()
    assert abs(mean[0] - 2.0) < 0.5 * g.spacing[0]
    assert abs(mean[1] + 1.0) < 0.5 * g.spacing[1]
