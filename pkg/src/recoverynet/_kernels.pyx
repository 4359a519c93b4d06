# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled cascade kernel.

Synchronous fractional-threshold update over a CSR in-edge structure:
an inactive node with positive in-degree activates when the fraction of
its active in-neighbors is >= its threshold; active nodes stay active.
Semantics must stay bit-identical to recoverynet._kernels_py.
"""

import numpy as np

from libc.stdint cimport int64_t, uint8_t


def run_cascade(const int64_t[::1] in_indptr,
                const int64_t[::1] in_src,
                const double[::1] theta,
                const uint8_t[::1] seed_mask,
                int horizon):
    """Run the cascade for `horizon` synchronous steps from the seed state.

    Returns (states, activation_week, fixed_point_week): states has shape
    (horizon+1, n) with row 0 equal to the seed state; activation_week is -1
    for nodes that never activate; fixed_point_week is -1 when no fixed point
    was observed within the horizon.
    """
    cdef Py_ssize_t n = in_indptr.shape[0] - 1
    if theta.shape[0] != n or seed_mask.shape[0] != n:
        raise ValueError("theta/seed_mask length does not match node count")
    if horizon < 1:
        raise ValueError("horizon must be >= 1")

    states_arr = np.zeros((horizon + 1, n), dtype=np.uint8)
    week_arr = np.full(n, -1, dtype=np.int64)
    cur_arr = np.zeros(n, dtype=np.uint8)

    cdef uint8_t[:, ::1] S = states_arr
    cdef int64_t[::1] wk = week_arr
    cdef uint8_t[::1] cur = cur_arr
    cdef Py_ssize_t i, t, tt, e
    cdef int64_t cnt, deg
    cdef int changed
    cdef int64_t fixed_week = -1
    cdef int64_t all_active

    with nogil:
        for i in range(n):
            cur[i] = seed_mask[i]
            S[0, i] = seed_mask[i]
            if seed_mask[i]:
                wk[i] = 0
        for t in range(1, horizon + 1):
            changed = 0
            for i in range(n):
                if cur[i]:
                    S[t, i] = 1
                    continue
                deg = in_indptr[i + 1] - in_indptr[i]
                if deg == 0:
                    S[t, i] = 0
                    continue
                cnt = 0
                for e in range(in_indptr[i], in_indptr[i + 1]):
                    cnt += cur[in_src[e]]
                if (<double> cnt) / (<double> deg) >= theta[i]:
                    S[t, i] = 1
                    wk[i] = t
                    changed = 1
                else:
                    S[t, i] = 0
            for i in range(n):
                cur[i] = S[t, i]
            if not changed:
                fixed_week = t - 1
                for tt in range(t + 1, horizon + 1):
                    for i in range(n):
                        S[tt, i] = cur[i]
                break
        if fixed_week < 0:
            all_active = 1
            for i in range(n):
                if not cur[i]:
                    all_active = 0
                    break
            if all_active:
                fixed_week = horizon

    return states_arr, week_arr, int(fixed_week)
