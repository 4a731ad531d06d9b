"""Pure-Python reference kernel for the partition local search.

This is the fallback twin of ``_speedups.pyx``.  Both implementations walk the
same move sequence (cell-major scan, candidate labels in ascending order,
first strict improvement accepted), so given identical inputs they produce
identical labelings; tests assert this whenever the compiled kernel is
available.

The objective being minimized is the squared worst subset residual

    F2(labels) = max over proper non-empty I of  num_I / den_I

with ``num_I = ||Psi_I - E(Delta_I) Psi||^2`` and ``den_I = ||Psi_I||^2``.
``num``/``den`` are indexed by subset bitmask.  A single-cell relabeling
a -> b changes num_I only for subsets containing exactly one of {a, b}, by

    delta_I = +-(|S_I(x)|^2 - |S_I(x) - parent(x)|^2) * vol

where S_I(x) is the subset sum of component amplitudes at the moved cell.
Subset sums are built per cell with an O(2^n) one-bit recursion.
"""

from __future__ import annotations

import numpy as np


def local_search(comps, parent, labels, vol, den, num, budget):
    """First-improvement single-cell relabeling descent.

    Arguments mirror the compiled kernel: ``comps`` is (n, ncells) complex,
    ``parent`` (ncells,) complex, ``labels`` (ncells,) int32 (not modified),
    ``den``/``num`` are (2**n,) mask-indexed floats (``num`` for the seed
    labeling), ``budget`` caps accepted moves.  Returns
    ``(labels, num, moves, sweeps)`` with fresh arrays.
    """
    n, ncells = comps.shape
    nmask = 1 << n
    full = nmask - 1

    labels = [int(v) for v in labels]
    num = [float(v) for v in num]
    den_l = [float(v) for v in den]
    vol = float(vol)

    # cell-major amplitude lists: python complex scalars are much faster than
    # repeated 0-d numpy indexing in this loop
    cell = [[complex(comps[i, x]) for i in range(n)] for x in range(ncells)]
    par = [complex(v) for v in parent]

    tz = [0] * nmask
    for m in range(1, nmask):
        tz[m] = (m & -m).bit_length() - 1

    count = [0] * n
    for a in labels:
        count[a] += 1

    f2 = 0.0
    for m in range(1, full):
        r = num[m] / den_l[m]
        if r > f2:
            f2 = r

    ss = [0j] * nmask
    moves = 0
    sweeps = 0
    improved = True
    while improved and moves < budget:
        improved = False
        sweeps += 1
        for x in range(ncells):
            a = labels[x]
            if count[a] <= 1:
                continue  # would empty block a
            cx = cell[x]
            p = par[x]
            for m in range(1, nmask):
                ss[m] = ss[m & (m - 1)] + cx[tz[m]]
            abit = 1 << a
            for b in range(n):
                if b == a:
                    continue
                bbit = 1 << b
                best = 0.0
                for m in range(1, full):
                    nm = num[m]
                    a_in = (m & abit) != 0
                    if a_in != ((m & bbit) != 0):
                        s = ss[m]
                        d = s - p
                        t_in = d.real * d.real + d.imag * d.imag
                        t_out = s.real * s.real + s.imag * s.imag
                        if a_in:
                            nm = nm + (t_out - t_in) * vol
                        else:
                            nm = nm + (t_in - t_out) * vol
                    r = nm / den_l[m]
                    if r > best:
                        best = r
                if best < f2:
                    for m in range(1, full):
                        a_in = (m & abit) != 0
                        if a_in != ((m & bbit) != 0):
                            s = ss[m]
                            d = s - p
                            t_in = d.real * d.real + d.imag * d.imag
                            t_out = s.real * s.real + s.imag * s.imag
                            if a_in:
                                num[m] += (t_out - t_in) * vol
                            else:
                                num[m] += (t_in - t_out) * vol
                    labels[x] = b
                    count[a] -= 1
                    count[b] += 1
                    f2 = best
                    moves += 1
                    improved = True
                    break
            if moves >= budget:
                break

    return (np.asarray(labels, dtype=np.int32),
            np.asarray(num, dtype=np.float64),
            moves, sweeps)
