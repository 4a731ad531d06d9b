import itertools
import math

import numpy as np
import pytest

from wavetree import Decomposition, Grid, WaveFunction, gaussian_packet, pair_overlap
from wavetree.register import (
    UniformRegister,
    dressed_pair_overlap,
    min_weighted_config_overlap,
)
from wavetree.scenarios.common import Branch, apply_conditional_rotation, branch_pair_overlap


def test_register_overlap_matches_explicit_states():
    a = UniformRegister(12, 0.3)
    b = UniformRegister(12, -0.5)
    per_qubit = complex(np.vdot(a.qubit_state(), b.qubit_state()))
    assert a.overlap(b) == pytest.approx((per_qubit ** 12).real, abs=1e-12)
    assert abs(per_qubit.imag) <= 1e-12  # real by construction


def test_config_overlap_matches_bruteforce():
    a = UniformRegister(8, 0.9)
    b = UniformRegister(8, -0.4)
    pa, pb = a.population_one(), b.population_one()
    brute = 0.0
    for bits in itertools.product((0, 1), repeat=8):
        qa = np.prod([pa if s else 1 - pa for s in bits])
        qb = np.prod([pb if s else 1 - pb for s in bits])
        brute += min(qa, qb)
    assert a.config_overlap(b) == pytest.approx(brute, rel=1e-12)


def test_fully_rotated_registers_are_config_disjoint():
    a = UniformRegister(16, math.pi / 2)
    b = UniformRegister(16, -math.pi / 2)
    assert a.config_overlap(b) == pytest.approx(0.0, abs=1e-15)
    assert abs(a.overlap(b)) <= 1e-15


def test_zero_qubits_reduce_to_plain_min():
    w1 = np.array([0.2, 0.5, 0.1])
    w2 = np.array([0.3, 0.1, 0.4])
    r = UniformRegister(0)
    assert min_weighted_config_overlap(w1, w2, r, r) == pytest.approx(0.4)


def test_dressed_overlap_reduces_to_pair_overlap_without_qubits():
    g = Grid.line(30.0, 128)
    rng = np.random.default_rng(0)
    a = WaveFunction(g, rng.normal(size=128) + 1j * rng.normal(size=128))
    b = WaveFunction(g, rng.normal(size=128) + 1j * rng.normal(size=128))
    bare = pair_overlap(Decomposition((a, b), a + b)).value
    r = UniformRegister(0)
    assert dressed_pair_overlap(a, r, b, r) == pytest.approx(bare, rel=1e-12)


def test_dressed_overlap_suppressed_by_register_rotation():
    g = Grid.line(30.0, 128)
    psi = gaussian_packet(g, 0.0, 0.0, 2.0)
    values = []
    for angle in (0.0, 0.4, 0.9, math.pi / 2):
        v = dressed_pair_overlap(psi, UniformRegister(8, angle),
                                 psi, UniformRegister(8, -angle))
        values.append(v)
    assert values[0] == pytest.approx(1.0, rel=1e-12)  # identical fields, same register
    assert all(x > y for x, y in zip(values, values[1:]))
    assert values[-1] == pytest.approx(0.0, abs=1e-12)


def test_conditional_rotation_splits_and_prunes():
    g = Grid.line(60.0, 256)
    centered = gaussian_packet(g, 0.0, 0.0, 2.0)
    shifted = gaussian_packet(g, 16.0, 0.0, 2.0)
    both = [Branch(centered, UniformRegister(4)), Branch(shifted, UniformRegister(4))]
    out, pruned = apply_conditional_rotation(both, cond_axis=0, dphi=0.3)
    # the centered branch straddles the boundary and splits; the shifted one
    # has negligible left-side mass and stays whole
    assert len(out) == 3
    assert pruned <= 1e-12
    angles = sorted(b.register.angle for b in out)
    assert angles == pytest.approx([-0.3, 0.3, 0.3])
    assert sum(b.mass() for b in out) + pruned == pytest.approx(1.0 + 1.0, rel=1e-12)


def test_branch_pair_overlap_weighs_internal_factors():
    g = Grid.line(30.0, 128)
    psi = gaussian_packet(g, 0.0, 0.0, 2.0)
    half = 1 / math.sqrt(2)
    a = Branch(psi * half, UniformRegister(0), internal=(1.0, 0.0))
    b = Branch(psi * half, UniformRegister(0), internal=(half, half))
    assert a.mass() == pytest.approx(0.5)
    assert branch_pair_overlap(a, b) == pytest.approx(1.0, rel=1e-12)
