#!/usr/bin/env python3
"""Benchmark the compiled local-search kernel against the pure-Python twin.

The partition local search is the one hot scalar loop in the package (cells
x candidate labels x index subsets per sweep, with data-dependent accepts),
so it ships as a Cython extension with a reference fallback.  This script
times both on representative instances and checks they walk identical move
sequences.

    python benchmarks/bench_kernels.py [--repeats 3]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from wavetree import Decomposition, Grid, WaveFunction
from wavetree._kernels import HAVE_COMPILED, compiled_local_search, reference_local_search
from wavetree.decomposition import _argmax_seed, residual_norm_table, subset_norm_table


def make_instance(n, shape, seed):
    rng = np.random.default_rng(seed)
    grid = Grid.line(float(shape), shape) if np.isscalar(shape) else Grid.plane(
        float(shape[0]), shape)
    size = grid.size
    # smooth random fields: lumpy enough that the argmax seed is imperfect
    amp = rng.normal(size=(n, size)) + 1j * rng.normal(size=(n, size))
    for row in amp:
        ft = np.fft.fft(row)
        keep = max(size // 16, 8)
        ft[keep:-keep] = 0.0
        row[:] = np.fft.ifft(ft)
    comps = [WaveFunction(grid, a.reshape(grid.shape)) for a in amp]
    parent = comps[0]
    for c in comps[1:]:
        parent = parent + c
    d = Decomposition(tuple(comps), parent)
    seed_labels = _argmax_seed(d)
    return (np.ascontiguousarray(d.component_matrix()),
            np.ascontiguousarray(d.parent.amplitudes.ravel()),
            seed_labels, grid.cell_volume,
            subset_norm_table(d), residual_norm_table(d, seed_labels))


def run(kernel, args, repeats):
    best = np.inf
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = kernel(*args, 10 ** 7)
        best = min(best, time.perf_counter() - t0)
    return best, result


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=3)
    opts = parser.parse_args()

    cases = [
        ("n=2, 1024 cells (1D)", 2, 1024, 11),
        ("n=3, 4096 cells (1D)", 3, 4096, 12),
        ("n=3, 64x64 grid", 3, (64, 64), 13),
        ("n=4, 2048 cells (1D)", 4, 2048, 14),
    ]
    print(f"compiled kernel available: {HAVE_COMPILED}")
    header = f"{'instance':26} {'moves':>6} {'pure (s)':>10} {'compiled (s)':>13} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for name, n, shape, seed in cases:
        args = make_instance(n, shape, seed)
        t_ref, ref = run(reference_local_search, args, opts.repeats)
        if HAVE_COMPILED:
            t_fast, fast = run(compiled_local_search, args, opts.repeats)
            agree = np.array_equal(ref[0], fast[0]) and ref[2] == fast[2]
            if not agree:
                raise SystemExit(f"kernel mismatch on {name}")
            print(f"{name:26} {ref[2]:6d} {t_ref:10.4f} {t_fast:13.4f} "
                  f"{t_ref / t_fast:7.1f}x")
        else:
            print(f"{name:26} {ref[2]:6d} {t_ref:10.4f} {'n/a':>13} {'n/a':>8}")


if __name__ == "__main__":
    main()
