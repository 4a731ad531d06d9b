# Compiled twin of _reference.local_search.  The move sequence (cell-major
# scan, ascending candidate labels, first strict improvement) matches the
# reference kernel exactly; see _reference.py for the objective and the
# incremental-update algebra.

import numpy as np


def local_search(comps, parent, labels, vol, den, num, budget):
    comps = np.ascontiguousarray(comps, dtype=np.complex128)
    parent = np.ascontiguousarray(parent, dtype=np.complex128)
    labels_out = np.array(labels, dtype=np.int32)
    num_out = np.array(num, dtype=np.float64)
    den_arr = np.ascontiguousarray(den, dtype=np.float64)

    cdef const double complex[:, ::1] c = comps
    cdef const double complex[::1] par = parent
    cdef int[::1] lab = labels_out
    cdef double[::1] num_v = num_out
    cdef const double[::1] den_v = den_arr
    cdef double volume = vol
    cdef long long max_moves = budget

    cdef Py_ssize_t n = comps.shape[0]
    cdef Py_ssize_t ncells = comps.shape[1]
    cdef Py_ssize_t nmask = 1 << n
    cdef Py_ssize_t full = nmask - 1

    tz_arr = np.zeros(nmask, dtype=np.intp)
    cdef Py_ssize_t[::1] tz = tz_arr
    cdef Py_ssize_t m, v, i
    for m in range(1, nmask):
        v = m
        i = 0
        while v & 1 == 0:
            v >>= 1
            i += 1
        tz[m] = i

    count_arr = np.zeros(n, dtype=np.int64)
    cdef long long[::1] count = count_arr
    cdef Py_ssize_t x
    for x in range(ncells):
        count[lab[x]] += 1

    cdef double f2 = 0.0, r
    for m in range(1, full):
        r = num_v[m] / den_v[m]
        if r > f2:
            f2 = r

    ss_arr = np.zeros(nmask, dtype=np.complex128)
    cdef double complex[::1] ss = ss_arr
    cdef double complex s, d, p
    cdef Py_ssize_t a, b, abit, bbit
    cdef bint a_in, b_in
    cdef double t_in, t_out, nm, best
    cdef long long moves = 0, sweeps = 0
    cdef bint improved = True

    while improved and moves < max_moves:
        improved = False
        sweeps += 1
        for x in range(ncells):
            a = lab[x]
            if count[a] <= 1:
                continue
            p = par[x]
            for m in range(1, nmask):
                ss[m] = ss[m & (m - 1)] + c[tz[m], x]
            abit = 1 << a
            for b in range(n):
                if b == a:
                    continue
                bbit = 1 << b
                best = 0.0
                for m in range(1, full):
                    nm = num_v[m]
                    a_in = (m & abit) != 0
                    b_in = (m & bbit) != 0
                    if a_in != b_in:
                        s = ss[m]
                        d = s - p
                        t_in = d.real * d.real + d.imag * d.imag
                        t_out = s.real * s.real + s.imag * s.imag
                        if a_in:
                            nm = nm + (t_out - t_in) * volume
                        else:
                            nm = nm + (t_in - t_out) * volume
                    r = nm / den_v[m]
                    if r > best:
                        best = r
                if best < f2:
                    for m in range(1, full):
                        a_in = (m & abit) != 0
                        b_in = (m & bbit) != 0
                        if a_in != b_in:
                            s = ss[m]
                            d = s - p
                            t_in = d.real * d.real + d.imag * d.imag
                            t_out = s.real * s.real + s.imag * s.imag
                            if a_in:
                                num_v[m] += (t_out - t_in) * volume
                            else:
                                num_v[m] += (t_in - t_out) * volume
                    lab[x] = b
                    count[a] -= 1
                    count[b] += 1
                    f2 = best
                    moves += 1
                    improved = True
                    break
            if moves >= max_moves:
                break

    return labels_out, num_out, int(moves), int(sweeps)
