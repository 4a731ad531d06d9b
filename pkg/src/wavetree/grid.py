"""Discretized configuration spaces: grids, regions, partitions.

Grids are uniform and periodic (the evolution engine is spectral), 1D or 2D.
All lengths are in dimensionless simulation units with hbar = 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GridMismatchError


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid over a box [-extent/2, extent/2) per axis.

    ``extent`` and ``cells`` are per-axis tuples; ``spacing = extent / cells``.
    Cell centers are row-major, axis 0 slowest.
    """

    extent: tuple[float, ...]
    cells: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "extent", tuple(float(e) for e in self.extent))
        object.__setattr__(self, "cells", tuple(int(c) for c in self.cells))
        if len(self.extent) != len(self.cells):
            raise ValueError("extent and cells must have equal length")
        if self.dimension not in (1, 2):
            raise ValueError("only 1D and 2D grids are supported")
        if any(e <= 0 for e in self.extent):
            raise ValueError("extent must be positive")
        if any(c < 2 for c in self.cells):
            raise ValueError("need at least 2 cells per axis")

    @classmethod
    def line(cls, extent: float, cells: int = 1024) -> "Grid":
        return cls((extent,), (cells,))

    @classmethod
    def plane(cls, extent, cells=(256, 256)) -> "Grid":
        if np.isscalar(extent):
            extent = (extent, extent)
        return cls(tuple(extent), tuple(cells))

    @property
    def dimension(self) -> int:
        return len(self.cells)

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(e / c for e, c in zip(self.extent, self.cells))

    @property
    def size(self) -> int:
        return int(np.prod(self.cells))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def shape(self) -> tuple[int, ...]:
        return self.cells

    def axis(self, i: int) -> np.ndarray:
        """Cell-center coordinates along axis i."""
        e, c = self.extent[i], self.cells[i]
        return -e / 2 + (np.arange(c) + 0.5) * (e / c)

    def coordinates(self) -> tuple[np.ndarray, ...]:
        """Per-axis coordinate fields, each shaped like the grid."""
        axes = [self.axis(i) for i in range(self.dimension)]
        return tuple(np.meshgrid(*axes, indexing="ij"))

    def wavenumbers(self) -> tuple[np.ndarray, ...]:
        """Per-axis angular wavenumber fields for the FFT layout."""
        ks = [2 * np.pi * np.fft.fftfreq(c, d=s)
              for c, s in zip(self.cells, self.spacing)]
        return tuple(np.meshgrid(*ks, indexing="ij"))

    def to_dict(self) -> dict:
        return {"extent": list(self.extent), "cells": list(self.cells)}

    @classmethod
    def from_dict(cls, d: dict) -> "Grid":
        return cls(tuple(d["extent"]), tuple(d["cells"]))


def require_same_grid(a, b) -> None:
    if a.grid != b.grid:
        raise GridMismatchError(f"grid mismatch: {a.grid} vs {b.grid}")


@dataclass(frozen=True)
class Region:
    """Boolean cell mask on a grid."""

    grid: Grid
    mask: np.ndarray

    def __post_init__(self):
        mask = np.asarray(self.mask, dtype=bool)
        if mask.shape != self.grid.shape:
            raise ValueError(f"mask shape {mask.shape} != grid shape {self.grid.shape}")
        object.__setattr__(self, "mask", mask)

    @classmethod
    def all_cells(cls, grid: Grid) -> "Region":
        return cls(grid, np.ones(grid.shape, dtype=bool))

    @classmethod
    def where(cls, grid: Grid, predicate) -> "Region":
        """Region of cells whose center coordinates satisfy ``predicate``."""
        return cls(grid, np.asarray(predicate(*grid.coordinates()), dtype=bool))

    def complement(self) -> "Region":
        return Region(self.grid, ~self.mask)

    @property
    def cell_count(self) -> int:
        return int(self.mask.sum())


@dataclass(frozen=True)
class Partition:
    """Total labeling of grid cells into ``n_blocks`` non-empty blocks."""

    grid: Grid
    labels: np.ndarray
    n_blocks: int = field(default=0)

    def __post_init__(self):
        labels = np.asarray(self.labels)
        if not np.issubdtype(labels.dtype, np.integer):
            raise ValueError("labels must be integers")
        labels = labels.astype(np.int32, copy=False)
        if labels.shape != self.grid.shape:
            raise ValueError(f"labels shape {labels.shape} != grid shape {self.grid.shape}")
        n = self.n_blocks if self.n_blocks > 0 else int(labels.max()) + 1
        if labels.min() < 0 or labels.max() >= n:
            raise ValueError("labels out of range")
        used = np.bincount(labels.ravel(), minlength=n)
        if (used == 0).any():
            missing = int(np.nonzero(used == 0)[0][0])
            raise ValueError(f"block {missing} is empty; partition blocks must be non-empty")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "n_blocks", n)

    @classmethod
    def from_regions(cls, regions: list[Region]) -> "Partition":
        """Build from disjoint regions covering the grid (order fixes block ids)."""
        grid = regions[0].grid
        labels = np.full(grid.shape, -1, dtype=np.int32)
        for i, r in enumerate(regions):
            if r.grid != grid:
                raise GridMismatchError("regions live on different grids")
            if (labels[r.mask] != -1).any():
                raise ValueError("regions overlap")
            labels[r.mask] = i
        if (labels == -1).any():
            raise ValueError("regions do not cover the grid")
        return cls(grid, labels, len(regions))

    @classmethod
    def trivial(cls, grid: Grid) -> "Partition":
        return cls(grid, np.zeros(grid.shape, dtype=np.int32), 1)

    @classmethod
    def split_1d(cls, grid: Grid, boundary: float) -> "Partition":
        """Two blocks along axis 0: block 0 below ``boundary``, block 1 at or above."""
        coords = grid.coordinates()[0]
        return cls(grid, (coords >= boundary).astype(np.int32), 2)

    def block(self, i: int) -> Region:
        return Region(self.grid, self.labels == i)

    def block_masses(self, density: np.ndarray) -> np.ndarray:
        """Per-block sums of a density field times cell volume."""
        flat = np.asarray(density, dtype=float).ravel()
        return np.bincount(self.labels.ravel(), weights=flat,
                           minlength=self.n_blocks) * self.grid.cell_volume
