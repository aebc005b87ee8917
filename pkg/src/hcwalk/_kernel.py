"""Compiled inner loop of the measured walk."""

import numpy as np
from numba import njit

REACHED = 0
STALLED = 1
OUT_OF_STEPS = 2


@njit(cache=True, inline="always")
def _add(total, comp, x):
    s = total + x
    if abs(total) >= abs(x):
        comp += (total - s) + x
    else:
        comp += (x - s) + total
    return s, comp


@njit(cache=True)
def measured_walk(indptr, indices, data, target, psi0, thresholds, max_steps, window, stall_tol, trace_len):
    """Iterate ``psi <- P0 U psi`` and accumulate first-hit probabilities.

    ``thresholds`` must be ascending; for each one the first step at which the
    cumulative hit probability reaches it and the truncated mean at that step
    and the cumulative value there are recorded.  Stops when the last threshold is reached, when the
    cumulative probability grows by less than ``stall_tol`` over ``window``
    consecutive steps, or after ``max_steps``.
    """
    n = psi0.shape[0]
    psi = psi0.copy()
    phi = np.empty_like(psi)
    n_thr = thresholds.shape[0]
    t_hit = np.full(n_thr, -1, dtype=np.int64)
    tau_at = np.zeros(n_thr)
    cum_at = np.zeros(n_thr)
    trace_p = np.zeros(trace_len)
    trace_norm = np.zeros(trace_len)
    # compensated (Neumaier) sums: late increments are far below the
    # rounding unit of the running totals
    cumulative = 0.0
    cum_c = 0.0
    tau = 0.0
    tau_c = 0.0
    nxt = 0
    ref_cum = 0.0
    ref_t = 0
    t = 0
    while t < max_steps:
        t += 1
        for i in range(n):
            acc = 0.0 + 0.0j
            for k in range(indptr[i], indptr[i + 1]):
                acc += data[k] * psi[indices[k]]
            phi[i] = acc
        hit = 0.0
        for i in range(n):
            if target[i]:
                hit += phi[i].real * phi[i].real + phi[i].imag * phi[i].imag
                phi[i] = 0.0
        tmp = psi
        psi = phi
        phi = tmp
        cumulative, cum_c = _add(cumulative, cum_c, hit)
        tau, tau_c = _add(tau, tau_c, t * hit)
        if t <= trace_len:
            trace_p[t - 1] = hit
            norm = 0.0
            for i in range(n):
                norm += psi[i].real * psi[i].real + psi[i].imag * psi[i].imag
            trace_norm[t - 1] = norm
        cum = cumulative + cum_c
        while nxt < n_thr and cum >= thresholds[nxt]:
            t_hit[nxt] = t
            tau_at[nxt] = tau + tau_c
            cum_at[nxt] = cum
            nxt += 1
        if nxt == n_thr:
            return REACHED, t, cum, tau + tau_c, t_hit, tau_at, cum_at, trace_p, trace_norm
        if cum - ref_cum >= stall_tol:
            ref_cum = cum
            ref_t = t
        elif t - ref_t >= window:
            return STALLED, t, cum, tau + tau_c, t_hit, tau_at, cum_at, trace_p, trace_norm
    return OUT_OF_STEPS, t, cumulative + cum_c, tau + tau_c, t_hit, tau_at, cum_at, trace_p, trace_norm
