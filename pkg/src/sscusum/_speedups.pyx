# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops for run-length simulation.

Each function advances one chart over a block of observations. State is a
small float64 vector mutated in place so runs can resume across blocks:

    SSC: [n, mean, ssd, upper, lower]
    PRC: [n, mu, lam, a, b, upper, lower]

The *_run functions stop at the first alarm against a fixed decision limit;
the *_envelope functions sweep a whole block and record the strictly
increasing running maximum of the monitored statistic, from which the stop
time for ANY decision limit can be recovered afterwards.

These kernels assume continuous input streams: a degenerate history (zero
sample variance) simply extends the warmup instead of raising, since it has
probability zero under the simulation model.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport log, sqrt
from scipy.special.cython_special cimport ndtri, stdtr

cnp.import_array()

BACKEND = "speedups"

cdef double _TAIL_FLOOR = 5e-324


cdef inline double _ssc_increment(double x, double n, double mean, double ssd) noexcept nogil:
    """Exact-Normal increment for x against n prior observations."""
    cdef double sd = sqrt(ssd / (n - 1.0))
    cdef double arg = sqrt(n / (n + 1.0)) * (x - mean) / sd
    cdef double tail
    if arg <= 0.0:
        tail = stdtr(n - 1.0, arg)
        if tail < _TAIL_FLOOR:
            tail = _TAIL_FLOOR
        return ndtri(tail)
    tail = stdtr(n - 1.0, -arg)
    if tail < _TAIL_FLOOR:
        tail = _TAIL_FLOOR
    return -ndtri(tail)


cdef inline double _statistic(double up, double lo, int side) noexcept nogil:
    """Monitored magnitude for the configured side (positive scale)."""
    if side > 0:
        return up
    if side < 0:
        return -lo
    return up if up > -lo else -lo


def ssc_run(double[::1] z, double k, double h, int side, double[::1] state):
    """Advance the SSC over z; return the 1-based block index of the first
    alarm, or 0 if none occurred. State is updated through the last
    processed observation (inclusive of the alarming one)."""
    cdef double n = state[0], mean = state[1], ssd = state[2]
    cdef double up = state[3], lo = state[4]
    cdef Py_ssize_t i, m = z.shape[0], hit = 0
    cdef double x, u, delta
    with nogil:
        for i in range(m):
            x = z[i]
            if n >= 2.0 and ssd > 0.0:
                u = _ssc_increment(x, n, mean, ssd)
                up += u - k
                if up < 0.0:
                    up = 0.0
                lo += u + k
                if lo > 0.0:
                    lo = 0.0
                n += 1.0
                delta = x - mean
                mean += delta / n
                ssd += delta * (x - mean)
                if _statistic(up, lo, side) > h:
                    hit = i + 1
                    break
            else:
                n += 1.0
                delta = x - mean
                mean += delta / n
                ssd += delta * (x - mean)
    state[0] = n
    state[1] = mean
    state[2] = ssd
    state[3] = up
    state[4] = lo
    return hit


def ssc_envelope(double[::1] z, double k, int side, double[::1] state, double floor=0.0):
    """Sweep the SSC over all of z and return (times, values): the strictly
    increasing records of the running maximum of the monitored statistic.
    Times are absolute 1-based observation indices (state n at entry counts
    as already-processed history). When resuming a sweep, pass the last
    recorded value as `floor` so earlier records are not repeated."""
    cdef double n = state[0], mean = state[1], ssd = state[2]
    cdef double up = state[3], lo = state[4]
    cdef Py_ssize_t i, m = z.shape[0], cnt = 0
    cdef double x, u, delta, stat
    cdef double cur = _statistic(up, lo, side)
    if cur < floor:
        cur = floor
    if cur < 0.0:
        cur = 0.0
    times_arr = np.empty(m, dtype=np.int64)
    vals_arr = np.empty(m, dtype=np.float64)
    cdef long long[::1] times = times_arr
    cdef double[::1] vals = vals_arr
    cdef long long base = <long long> n
    with nogil:
        for i in range(m):
            x = z[i]
            if n >= 2.0 and ssd > 0.0:
                u = _ssc_increment(x, n, mean, ssd)
                up += u - k
                if up < 0.0:
                    up = 0.0
                lo += u + k
                if lo > 0.0:
                    lo = 0.0
                stat = _statistic(up, lo, side)
                if stat > cur:
                    cur = stat
                    times[cnt] = base + i + 1
                    vals[cnt] = stat
                    cnt += 1
            n += 1.0
            delta = x - mean
            mean += delta / n
            ssd += delta * (x - mean)
    state[0] = n
    state[1] = mean
    state[2] = ssd
    state[3] = up
    state[4] = lo
    return times_arr[:cnt].copy(), vals_arr[:cnt].copy()


cdef inline double _prc_ratio(double zz, double c, double a2, double ah) noexcept nogil:
    """Log predictive ratio in standardized units; a2 = 2a, ah = a + 1/2."""
    return ah * log((a2 + zz * zz) / (a2 + (zz - c) * (zz - c)))


def prc_run(double[::1] z, double k, double h, int side, double[::1] state):
    """Advance the PRC over z; return the 1-based block index of the first
    alarm, or 0 if none occurred."""
    cdef double n = state[0], mu = state[1], lam = state[2]
    cdef double a = state[3], b = state[4]
    cdef double up = state[5], lo = state[6]
    cdef Py_ssize_t i, m = z.shape[0], hit = 0
    cdef double x, zz, c, a2, ah, scored
    with nogil:
        for i in range(m):
            x = z[i]
            scored = 0.0
            if n >= 1.0 and lam > 0.0 and a > 0.0 and b > 0.0:
                zz = (x - mu) / sqrt((lam + 1.0) * b / (lam * a))
                c = k * sqrt(lam / (lam + 1.0))
                a2 = 2.0 * a
                ah = a + 0.5
                up += _prc_ratio(zz, c, a2, ah)
                if up < 0.0:
                    up = 0.0
                lo -= _prc_ratio(zz, -c, a2, ah)
                if lo > 0.0:
                    lo = 0.0
                scored = 1.0
            b += lam * (x - mu) * (x - mu) / (2.0 * (lam + 1.0))
            mu = (lam * mu + x) / (lam + 1.0)
            lam += 1.0
            a += 0.5
            n += 1.0
            if scored == 1.0 and _statistic(up, lo, side) > h:
                hit = i + 1
                break
    state[0] = n
    state[1] = mu
    state[2] = lam
    state[3] = a
    state[4] = b
    state[5] = up
    state[6] = lo
    return hit


def prc_envelope(double[::1] z, double k, int side, double[::1] state, double floor=0.0):
    """Sweep the PRC over all of z and return (times, values) running-max
    records, as in ssc_envelope."""
    cdef double n = state[0], mu = state[1], lam = state[2]
    cdef double a = state[3], b = state[4]
    cdef double up = state[5], lo = state[6]
    cdef Py_ssize_t i, m = z.shape[0], cnt = 0
    cdef double x, zz, c, a2, ah, stat
    cdef double cur = _statistic(up, lo, side)
    if cur < floor:
        cur = floor
    if cur < 0.0:
        cur = 0.0
    times_arr = np.empty(m, dtype=np.int64)
    vals_arr = np.empty(m, dtype=np.float64)
    cdef long long[::1] times = times_arr
    cdef double[::1] vals = vals_arr
    cdef long long base = <long long> n
    with nogil:
        for i in range(m):
            x = z[i]
            if n >= 1.0 and lam > 0.0 and a > 0.0 and b > 0.0:
                zz = (x - mu) / sqrt((lam + 1.0) * b / (lam * a))
                c = k * sqrt(lam / (lam + 1.0))
                a2 = 2.0 * a
                ah = a + 0.5
                up += _prc_ratio(zz, c, a2, ah)
                if up < 0.0:
                    up = 0.0
                lo -= _prc_ratio(zz, -c, a2, ah)
                if lo > 0.0:
                    lo = 0.0
                stat = _statistic(up, lo, side)
                if stat > cur:
                    cur = stat
                    times[cnt] = base + i + 1
                    vals[cnt] = stat
                    cnt += 1
            b += lam * (x - mu) * (x - mu) / (2.0 * (lam + 1.0))
            mu = (lam * mu + x) / (lam + 1.0)
            lam += 1.0
            a += 0.5
            n += 1.0
    state[0] = n
    state[1] = mu
    state[2] = lam
    state[3] = a
    state[4] = b
    state[5] = up
    state[6] = lo
    return times_arr[:cnt].copy(), vals_arr[:cnt].copy()
