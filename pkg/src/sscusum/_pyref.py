"""Pure-Python (numpy) fallback for the simulation kernels.

Implements the same four entry points and state-vector contracts as the
compiled backend (see _speedups.pyx), vectorized over each block: running
moments come from cumulative sums, and the max(0, .)-type CUSUM recursions
are rewritten as cumulative sums minus their running extrema. Within a
block everything is branch-free, so this stays usable (if several times
slower than the compiled core) for real workloads.

Like the compiled kernels, these assume continuous input streams; a
degenerate history extends the warmup instead of raising.
"""

import numpy as np
from scipy import special as _sp

BACKEND = "pyref"

_TAIL_FLOOR = 5e-324


def _side_magnitude(up, lo, side):
    if side > 0:
        return up
    if side < 0:
        return -lo
    return np.maximum(up, -lo)


def _clamped_cusums(inc_up, inc_dn, up0, lo0):
    """Solve up_i = max(0, up_{i-1} + inc_up_i) and the mirrored lower
    recursion in closed form via running extrema of the plain cumsums."""
    w = np.cumsum(inc_up)
    up = w - np.minimum(np.minimum.accumulate(w), -up0)
    v = np.cumsum(inc_dn)
    lo = v - np.maximum(np.maximum.accumulate(v), -lo0)
    return up, lo


def _ssc_increments(z, state):
    """Per-step exact-Normal increments (0 during warmup) plus end-of-block
    running stats. state = [n, mean, ssd, upper, lower]."""
    n0, mean0, ssd0 = state[0], state[1], state[2]
    m = z.shape[0]
    s1 = n0 * mean0 + np.cumsum(z)
    q0 = ssd0 + (n0 * mean0 * mean0 if n0 > 0 else 0.0)
    q = q0 + np.cumsum(z * z)
    nprev = n0 + np.arange(m, dtype=np.float64)
    s1prev = np.concatenate(([n0 * mean0], s1[:-1]))
    qprev = np.concatenate(([q0], q[:-1]))
    with np.errstate(divide="ignore", invalid="ignore"):
        meanprev = s1prev / nprev
        ssdprev = qprev - s1prev * s1prev / nprev
    scored = (nprev >= 2.0) & (ssdprev > 0.0)
    u = np.zeros(m)
    if scored.any():
        sl = scored
        sd = np.sqrt(ssdprev[sl] / (nprev[sl] - 1.0))
        arg = np.sqrt(nprev[sl] / (nprev[sl] + 1.0)) * (z[sl] - meanprev[sl]) / sd
        tail = np.maximum(_sp.stdtr(nprev[sl] - 1.0, -np.abs(arg)), _TAIL_FLOOR)
        u[sl] = np.where(arg > 0.0, -_sp.ndtri(tail), _sp.ndtri(tail))
    nend = n0 + m
    end_stats = (nend, s1[-1] / nend, q[-1] - s1[-1] * s1[-1] / nend)
    return u, scored, (s1, q, nprev), end_stats


def _ssc_write_state(state, i, s1, q, n0, up, lo):
    """Store running stats/accumulators as of 0-based block position i."""
    nend = n0 + i + 1
    state[0] = nend
    state[1] = s1[i] / nend
    state[2] = q[i] - s1[i] * s1[i] / nend
    state[3] = up[i]
    state[4] = lo[i]


def ssc_run(z, k, h, side, state):
    z = np.ascontiguousarray(z, dtype=np.float64)
    m = z.shape[0]
    if m == 0:
        return 0
    n0 = state[0]
    u, scored, (s1, q, _), end = _ssc_increments(z, state)
    up, lo = _clamped_cusums(
        np.where(scored, u - k, 0.0), np.where(scored, u + k, 0.0), state[3], state[4]
    )
    stat = np.where(scored, _side_magnitude(up, lo, side), 0.0)
    over = stat > h
    if over.any():
        i = int(np.argmax(over))
        _ssc_write_state(state, i, s1, q, n0, up, lo)
        return i + 1
    state[0], state[1], state[2] = end
    state[3], state[4] = up[-1], lo[-1]
    return 0


def ssc_envelope(z, k, side, state, floor=0.0):
    z = np.ascontiguousarray(z, dtype=np.float64)
    m = z.shape[0]
    n0 = int(state[0])
    if m == 0:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.float64)
    u, scored, _, end = _ssc_increments(z, state)
    up, lo = _clamped_cusums(
        np.where(scored, u - k, 0.0), np.where(scored, u + k, 0.0), state[3], state[4]
    )
    stat = np.where(scored, _side_magnitude(up, lo, side), 0.0)
    cur = max(_side_magnitude(state[3], state[4], side), floor, 0.0)
    env = np.maximum(np.maximum.accumulate(stat), cur)
    rec = env > np.concatenate(([cur], env[:-1]))
    state[0], state[1], state[2] = end
    state[3], state[4] = up[-1], lo[-1]
    return (n0 + np.flatnonzero(rec) + 1).astype(np.int64), env[rec]


def _prc_increments(z, k, state):
    """Per-step log predictive ratios for the +k and -k alternatives (0
    during warmup) plus end-of-block posterior parameters.
    state = [n, mu, lam, a, b, upper, lower]."""
    n0, mu0, lam0, a0, b0 = state[0], state[1], state[2], state[3], state[4]
    m = z.shape[0]
    s1 = np.cumsum(z)
    q = np.cumsum(z * z)
    steps = np.arange(m, dtype=np.float64)
    lamprev = lam0 + steps
    aprev = a0 + steps / 2.0
    s1prev = np.concatenate(([0.0], s1[:-1]))
    qprev = np.concatenate(([0.0], q[:-1]))
    with np.errstate(divide="ignore", invalid="ignore"):
        muprev = (lam0 * mu0 + s1prev) / lamprev
        bprev = (
            b0
            + (lam0 * mu0 * mu0 + qprev) / 2.0
            - (lam0 * mu0 + s1prev) ** 2 / (2.0 * lamprev)
        )
    scored = (n0 + steps >= 1.0) & (lamprev > 0.0) & (aprev > 0.0) & (bprev > 0.0)
    inc_up = np.zeros(m)
    inc_dn = np.zeros(m)
    if scored.any():
        sl = scored
        lam_s, a_s, b_s = lamprev[sl], aprev[sl], bprev[sl]
        zz = (z[sl] - muprev[sl]) / np.sqrt((lam_s + 1.0) * b_s / (lam_s * a_s))
        c = k * np.sqrt(lam_s / (lam_s + 1.0))
        a2 = 2.0 * a_s
        ah = a_s + 0.5
        inc_up[sl] = ah * np.log((a2 + zz * zz) / (a2 + (zz - c) ** 2))
        inc_dn[sl] = ah * np.log((a2 + zz * zz) / (a2 + (zz + c) ** 2))
    lam_end = lam0 + m
    end = (
        n0 + m,
        (lam0 * mu0 + s1[-1]) / lam_end,
        lam_end,
        a0 + m / 2.0,
        b0 + (lam0 * mu0 * mu0 + q[-1]) / 2.0 - (lam0 * mu0 + s1[-1]) ** 2 / (2.0 * lam_end),
    )
    return inc_up, inc_dn, scored, (s1, q, lam0, mu0, a0, b0), end


def _prc_write_state(state, i, parts, up, lo):
    s1, q, lam0, mu0, a0, b0 = parts
    lam_end = lam0 + i + 1
    state[0] = state[0] + i + 1
    state[1] = (lam0 * mu0 + s1[i]) / lam_end
    state[2] = lam_end
    state[3] = a0 + (i + 1) / 2.0
    state[4] = (
        b0 + (lam0 * mu0 * mu0 + q[i]) / 2.0 - (lam0 * mu0 + s1[i]) ** 2 / (2.0 * lam_end)
    )
    state[5] = up[i]
    state[6] = lo[i]


def prc_run(z, k, h, side, state):
    z = np.ascontiguousarray(z, dtype=np.float64)
    m = z.shape[0]
    if m == 0:
        return 0
    inc_up, inc_dn, scored, parts, end = _prc_increments(z, k, state)
    up, lo = _clamped_cusums(inc_up, -inc_dn, state[5], state[6])
    stat = np.where(scored, _side_magnitude(up, lo, side), 0.0)
    over = stat > h
    if over.any():
        i = int(np.argmax(over))
        _prc_write_state(state, i, parts, up, lo)
        return i + 1
    state[0], state[1], state[2], state[3], state[4] = end
    state[5], state[6] = up[-1], lo[-1]
    return 0


def prc_envelope(z, k, side, state, floor=0.0):
    z = np.ascontiguousarray(z, dtype=np.float64)
    m = z.shape[0]
    n0 = int(state[0])
    if m == 0:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.float64)
    inc_up, inc_dn, scored, _, end = _prc_increments(z, k, state)
    up, lo = _clamped_cusums(inc_up, -inc_dn, state[5], state[6])
    stat = np.where(scored, _side_magnitude(up, lo, side), 0.0)
    cur = max(_side_magnitude(state[5], state[6], side), floor, 0.0)
    env = np.maximum(np.maximum.accumulate(stat), cur)
    rec = env > np.concatenate(([cur], env[:-1]))
    state[0], state[1], state[2], state[3], state[4] = end
    state[5], state[6] = up[-1], lo[-1]
    return (n0 + np.flatnonzero(rec) + 1).astype(np.int64), env[rec]
