import numpy as np
import pytest

from wavetree import Grid, Partition, Region


def test_spacing_and_size():
    g = Grid((20.0, 10.0), (64, 32))
    assert g.spacing == (20.0 / 64, 10.0 / 32)
    assert g.size == 64 * 32
    assert g.cell_volume == pytest.approx((20.0 / 64) * (10.0 / 32))


def test_axis_centers_uniform():
    g = Grid.line(8.0, 16)
    x = g.axis(0)
    assert np.allclose(np.diff(x), 0.5)
    assert x[0] == pytest.approx(-4.0 + 0.25)


def test_dimension_limits():
    with pytest.raises(ValueError):
        Grid((1.0, 1.0, 1.0), (4, 4, 4))
    with pytest.raises(ValueError):
        Grid((1.0,), (1,))


def test_region_complement_partitions_grid():
    g = Grid.line(10.0, 32)
    r = Region.where(g, lambda x: x < 0)
    assert r.cell_count + r.complement().cell_count == g.size
    assert not (r.mask & r.complement().mask).any()


def test_partition_blocks_must_be_nonempty():
    g = Grid.line(10.0, 8)
    labels = np.zeros(8, dtype=np.int32)
    with pytest.raises(ValueError, match="empty"):
        Partition(g, labels, n_blocks=2)


def test_partition_from_regions_checks_cover_and_overlap():
    g = Grid.line(10.0, 8)
    left = Region.where(g, lambda x: x < 0)
    right = Region.where(g, lambda x: x >= 0)
    p = Partition.from_regions([left, right])
    assert p.n_blocks == 2
    with pytest.raises(ValueError, match="overlap"):
        Partition.from_regions([left, left.complement(), right])


def test_split_1d_and_block_masses():
    g = Grid.line(10.0, 10)
    p = Partition.split_1d(g, 0.0)
    density = np.ones(10)
    masses = p.block_masses(density)
    assert masses == pytest.approx([5.0, 5.0])
