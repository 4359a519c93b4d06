"""Pure-numpy fallback for the cascade kernel.

Selected at import time by recoverynet.kernels when the compiled extension
is unavailable. Must produce bit-identical output to recoverynet._kernels:
active-neighbor counts are exact integers and the activation test uses the
same float64 division, so the two paths agree exactly.
"""

import numpy as np


def run_cascade(in_indptr, in_src, theta, seed_mask, horizon):
    """Run the cascade for `horizon` synchronous steps from the seed state.

    Returns (states, activation_week, fixed_point_week); see the compiled
    kernel for the exact contract.
    """
    n = in_indptr.shape[0] - 1
    if theta.shape[0] != n or seed_mask.shape[0] != n:
        raise ValueError("theta/seed_mask length does not match node count")
    if horizon < 1:
        raise ValueError("horizon must be >= 1")

    in_deg = np.diff(in_indptr)
    # destination node of each CSR slot, aligned with in_src
    edge_dst = np.repeat(np.arange(n, dtype=np.int64), in_deg)
    eligible = in_deg > 0
    degf = in_deg.astype(np.float64)

    states = np.zeros((horizon + 1, n), dtype=np.uint8)
    states[0] = seed_mask
    activation_week = np.where(seed_mask.astype(bool), 0, -1).astype(np.int64)
    cur = seed_mask.astype(bool)
    fixed_week = -1

    for t in range(1, horizon + 1):
        cnt = np.bincount(edge_dst, weights=cur[in_src].astype(np.float64), minlength=n)
        frac = np.zeros(n, dtype=np.float64)
        np.divide(cnt, degf, out=frac, where=eligible)
        newly = ~cur & eligible & (frac >= theta)
        if not newly.any():
            fixed_week = t - 1
            states[t:] = states[t - 1]
            break
        cur = cur | newly
        states[t] = cur
        activation_week[newly] = t
    else:
        if cur.all():
            fixed_week = horizon

    return states, activation_week, int(fixed_week)
