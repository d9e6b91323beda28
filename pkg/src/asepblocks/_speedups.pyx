# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled event kernel: exact continuous-time ASEP sampling.

Mirror of asepblocks._pykernel (same RNG streams, same arithmetic, bitwise
identical output); see that module for the algorithm description.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, fabs, floor, log, sqrt
from libc.stdint cimport int64_t, uint64_t

cnp.import_array()

cdef extern from *:
    ctypedef unsigned long long uint128 "unsigned __int128"

DEF TWO64 = 18446744073709551616.0

cdef double HALF_LN_2PI = 0.5 * log(2.0 * 3.14159265358979323846)
cdef double[10] LN_FACT_SMALL

def _init_tables():
    import math
    for k in range(10):
        LN_FACT_SMALL[k] = math.log(float(math.factorial(k)))

_init_tables()


cdef struct Xoshiro:
    uint64_t s0, s1, s2, s3


cdef inline uint64_t _splitmix64(uint64_t* state) nogil:
    cdef uint64_t z
    state[0] = state[0] + <uint64_t>0x9E3779B97F4A7C15
    z = state[0]
    z = (z ^ (z >> 30)) * <uint64_t>0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EB
    return z ^ (z >> 31)


cdef void _seed_stream(Xoshiro* rng, uint64_t seed, uint64_t trajectory_id) nogil:
    cdef uint64_t sm = seed * <uint64_t>0x9E3779B97F4A7C15
    sm = sm ^ (trajectory_id * <uint64_t>0xD1B54A32D192ED03)
    rng.s0 = _splitmix64(&sm)
    rng.s1 = _splitmix64(&sm)
    rng.s2 = _splitmix64(&sm)
    rng.s3 = _splitmix64(&sm)
    if rng.s0 == 0 and rng.s1 == 0 and rng.s2 == 0 and rng.s3 == 0:
        rng.s0 = 1


cdef inline uint64_t _rotl(uint64_t x, int k) nogil:
    return (x << k) | (x >> (64 - k))


cdef inline uint64_t _next64(Xoshiro* rng) nogil:
    cdef uint64_t result = _rotl(rng.s1 * 5, 7) * 9
    cdef uint64_t t = rng.s1 << 17
    rng.s2 = rng.s2 ^ rng.s0
    rng.s3 = rng.s3 ^ rng.s1
    rng.s1 = rng.s1 ^ rng.s2
    rng.s0 = rng.s0 ^ rng.s3
    rng.s2 = rng.s2 ^ t
    rng.s3 = _rotl(rng.s3, 45)
    return result


cdef inline double _u01(Xoshiro* rng) nogil:
    return (<double>(_next64(rng) >> 11) + 0.5) * 1.1102230246251565e-16


cdef inline double _ln_factorial(int64_t k) nogil:
    cdef double x, xi2, corr
    if k < 10:
        return LN_FACT_SMALL[k]
    x = k + 1.0
    xi2 = 1.0 / (x * x)
    corr = (1.0 / 12.0 - (1.0 / 360.0 - (1.0 / 1260.0 - xi2 / 1680.0) * xi2) * xi2) / x
    return (x - 0.5) * log(x) - x + HALF_LN_2PI + corr


cdef int64_t _poisson(Xoshiro* rng, double mean) nogil:
    cdef double b, a, inv_alpha, v_r, ln_mean, u, v, us, thresh, prod, lhs
    cdef int64_t k
    if mean <= 0.0:
        return 0
    if mean < 10.0:
        thresh = exp(-mean)
        k = 0
        prod = _u01(rng)
        while prod > thresh:
            k += 1
            prod *= _u01(rng)
        return k
    b = 0.931 + 2.53 * sqrt(mean)
    a = -0.059 + 0.02483 * b
    inv_alpha = 1.1239 + 1.1328 / (b - 3.4)
    v_r = 0.9277 - 3.6224 / (b - 2.0)
    ln_mean = log(mean)
    while True:
        u = _u01(rng) - 0.5
        v = _u01(rng)
        us = 0.5 - fabs(u)
        k = <int64_t>floor((2.0 * a / us + b) * u + mean + 0.43)
        if us >= 0.07 and v <= v_r:
            return k
        if k < 0 or (us < 0.013 and v > us):
            continue
        lhs = log(v * inv_alpha / (a / (us * us) + b))
        if lhs <= k * ln_mean - mean - _ln_factorial(k):
            return k


cdef void _attempts(Xoshiro* rng, int64_t* posp, int64_t n, int64_t n_events,
                    uint64_t p_thresh) nogil:
    # posp points at entry 1 of an (n+2)-buffer with +/-inf sentinels at the
    # ends, so a move is legal iff the neighbour in the move direction does
    # not sit on the target site; this keeps the loop branch-free.
    cdef int64_t e, i, d, cur
    cdef uint128 prod
    for e in range(n_events):
        prod = <uint128>_next64(rng) * <uint128>n
        i = <int64_t>(prod >> 64)
        d = 1 if <uint64_t>prod < p_thresh else -1
        cur = posp[i]
        posp[i] = cur + d * (posp[i + d] != cur + d)


cdef inline uint64_t _p_threshold(double p) nogil:
    cdef double scaled = p * TWO64
    if scaled >= TWO64:
        return <uint64_t>0xFFFFFFFFFFFFFFFF
    return <uint64_t>scaled


def stream_state(seed, trajectory_id):
    """Derive the xoshiro256** state for one trajectory substream."""
    cdef Xoshiro rng
    _seed_stream(&rng, <uint64_t>(seed & 0xFFFFFFFFFFFFFFFF),
                 <uint64_t>(trajectory_id & 0xFFFFFFFFFFFFFFFF))
    return np.array([rng.s0, rng.s1, rng.s2, rng.s3], dtype=np.uint64)


def evolve(cnp.ndarray[cnp.int64_t, ndim=1] positions,
           cnp.ndarray[cnp.uint64_t, ndim=1] state,
           double t, double p):
    """Advance a configuration by time t in place, consuming the RNG stream."""
    cdef int64_t n = positions.shape[0]
    cdef Xoshiro rng
    cdef int64_t n_events
    cdef cnp.ndarray[cnp.int64_t, ndim=1] buf
    if n == 0 or t == 0.0:
        return
    buf = np.empty(n + 2, dtype=np.int64)
    buf[0] = <int64_t>-0x2000000000000000
    buf[n + 1] = <int64_t>0x2000000000000000
    buf[1:n + 1] = positions
    rng.s0 = state[0]
    rng.s1 = state[1]
    rng.s2 = state[2]
    rng.s3 = state[3]
    n_events = _poisson(&rng, n * t)
    _attempts(&rng, &buf[1], n, n_events, _p_threshold(p))
    positions[:] = buf[1:n + 1]
    state[0] = rng.s0
    state[1] = rng.s1
    state[2] = rng.s2
    state[3] = rng.s3


def ensemble_tally(seed, int64_t k0, int64_t k1, int64_t n, double t, double p,
                   int64_t m, int64_t l_max, int64_t g_max,
                   int64_t x_lo, int64_t x_hi):
    """Simulate trajectories k0..k1-1 and tally block/gap events at site level.

    Returns (n_at, n_block, n_gap, n_oob); see asepblocks._pykernel.
    """
    cdef int64_t width = x_hi - x_lo + 1
    cdef cnp.ndarray[cnp.int64_t, ndim=1] n_at = np.zeros(width, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=2] n_block = np.zeros((width, l_max), dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=2] n_gap = np.zeros((width, g_max), dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] pos_buf = np.empty(n + 2, dtype=np.int64)
    cdef int64_t* pos = &pos_buf[1]
    cdef int64_t n_oob = 0
    cdef uint64_t p_thresh = _p_threshold(p)
    cdef uint64_t seed64 = <uint64_t>(seed & 0xFFFFFFFFFFFFFFFF)
    cdef double mean = n * t
    cdef Xoshiro rng
    cdef int64_t k, i, x, idx, run, gap, lim
    pos[-1] = <int64_t>-0x2000000000000000
    pos[n] = <int64_t>0x2000000000000000
    with nogil:
        for k in range(k0, k1):
            _seed_stream(&rng, seed64, <uint64_t>k)
            for i in range(n):
                pos[i] = i + 1
            _attempts(&rng, pos, n, _poisson(&rng, mean), p_thresh)
            x = pos[m - 1]
            if x < x_lo or x > x_hi:
                n_oob += 1
                continue
            idx = x - x_lo
            n_at[idx] += 1
            run = 1
            while run < l_max and m - 1 + run < n and pos[m - 1 + run] == x + run:
                run += 1
            for i in range(run):
                n_block[idx, i] += 1
            if m < n:
                gap = pos[m] - x - 1
                lim = gap if gap < g_max else g_max
                for i in range(lim):
                    n_gap[idx, i] += 1
    return n_at, n_block, n_gap, n_oob
