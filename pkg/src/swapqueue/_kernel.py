"""Compiled inner loop for long-horizon runs.

Kept separate so importing the package never pays the JIT cost; dynamics
loads this lazily and only when a run is large enough to benefit.  The
max-weight step scans a precomputed permutation table in lexicographic
order with strict improvement, which reproduces the solver's tie-break
(lexicographically smallest maximizer) without any scoring tricks.
"""

from __future__ import annotations

import numpy as np

_COMPILED = None


def _simulate(
    z,
    bits,
    losses,
    mask_order,
    policy_code,
    policy_order,
    delay_d,
    perms,
    out_z_total,
    out_lyap,
    out_weight,
    out_swaps,
):
    # policy_code: 0 max-weight, 1 random, 2 delayed
    n = z.shape[0]
    periods = bits.shape[0]
    nperm = perms.shape[0]
    masked = np.zeros(n, dtype=np.bool_)
    assign = np.empty(n, dtype=np.int64)
    zeta = np.empty(n, dtype=np.int64)
    avail = np.empty(n, dtype=np.int64)
    ring_len = delay_d if delay_d > 0 else 1
    ring = -np.ones((ring_len, n), dtype=np.int64)
    for t in range(periods):
        for i in range(n):
            for k in range(n):
                if bits[t, i, k] != 0:
                    z[i, k] += 1
        zt = 0
        ly = 0
        for i in range(n):
            for k in range(n):
                v = z[i, k]
                zt += v
                ly += v * v
        out_z_total[t] = zt
        out_lyap[t] = ly
        lose = losses[t]
        for k in range(n):
            masked[k] = False
        for j in range(lose):
            masked[mask_order[t, j]] = True
        for i in range(n):
            assign[i] = -1
        if policy_code == 0 or policy_code == 2:
            best_w = -1
            best_p = 0
            for p in range(nperm):
                w = 0
                for i in range(n):
                    k = perms[p, i]
                    if not masked[k]:
                        w += z[i, k]
                if w > best_w:
                    best_w = w
                    best_p = p
            for i in range(n):
                k = perms[best_p, i]
                if masked[k]:
                    zeta[i] = -1
                else:
                    zeta[i] = k
            if policy_code == 0 or delay_d == 0:
                for i in range(n):
                    assign[i] = zeta[i]
            else:
                slot = t % delay_d
                if t >= delay_d:
                    for i in range(n):
                        k = ring[slot, i]
                        if k >= 0 and masked[k]:
                            assign[i] = -1
                        else:
                            assign[i] = k
                for i in range(n):
                    ring[slot, i] = zeta[i]
        else:
            m = 0
            for k in range(n):
                if not masked[k]:
                    avail[m] = k
                    m += 1
            for j in range(m):
                assign[policy_order[t, j]] = avail[j]
        w = 0
        sw = 0
        for i in range(n):
            k = assign[i]
            if k >= 0:
                w += z[i, k]
                if z[i, k] >= 1:
                    z[i, k] -= 1
                    sw += 1
        out_weight[t] = w
        out_swaps[t] = sw


def kernel_simulate():
    """JIT-compile the inner loop once and hand back the compiled function."""
    global _COMPILED
    if _COMPILED is None:
        from numba import njit

        _COMPILED = njit(cache=True)(_simulate)
    return _COMPILED
