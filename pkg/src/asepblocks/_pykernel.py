"""Pure-Python event kernel: exact continuous-time ASEP sampling.

This is the fallback twin of the compiled kernel in ``_speedups``.  Both
implement the identical algorithm and RNG stream (splitmix64-seeded
xoshiro256**, PTRS Poisson sampling), so for a given (seed, trajectory_id)
they produce bitwise-identical configurations.  Selection happens in
:mod:`asepblocks.engine`.

Sampling scheme: the total attempt rate of an N-particle configuration is
N (each particle carries a rate-1 clock split p right / q left), so the
number of attempts in [0, t] is Poisson(N*t) and each attempt picks a
uniform particle and a p-biased direction.  An attempt onto an occupied
site is suppressed.  The uniform particle index and the direction are both
carved out of a single 64-bit draw; the residual index bias is O(N/2^64),
far below any statistical resolution used here.
"""

from __future__ import annotations

import math

import numpy as np

MASK64 = (1 << 64) - 1

_LN_FACT_SMALL = tuple(math.log(float(math.factorial(k))) for k in range(10))
_HALF_LN_2PI = 0.5 * math.log(2.0 * math.pi)


def _splitmix64(state: int) -> tuple[int, int]:
    state = (state + 0x9E3779B97F4A7C15) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return state, z ^ (z >> 31)


def stream_state(seed: int, trajectory_id: int) -> np.ndarray:
    """Derive the xoshiro256** state for one trajectory substream."""
    sm = ((seed & MASK64) * 0x9E3779B97F4A7C15) & MASK64
    sm ^= ((trajectory_id & MASK64) * 0xD1B54A32D192ED03) & MASK64
    s = []
    for _ in range(4):
        sm, z = _splitmix64(sm)
        s.append(z)
    if not any(s):
        s[0] = 1
    return np.array(s, dtype=np.uint64)


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


class _Xoshiro:
    """xoshiro256** on plain Python ints (state injected/extracted as uint64[4])."""

    __slots__ = ("s0", "s1", "s2", "s3")

    def __init__(self, state: np.ndarray):
        self.s0, self.s1, self.s2, self.s3 = (int(x) for x in state)

    def dump(self, state: np.ndarray) -> None:
        state[0] = self.s0
        state[1] = self.s1
        state[2] = self.s2
        state[3] = self.s3

    def next64(self) -> int:
        result = (_rotl((self.s1 * 5) & MASK64, 7) * 9) & MASK64
        t = (self.s1 << 17) & MASK64
        self.s2 ^= self.s0
        self.s3 ^= self.s1
        self.s1 ^= self.s2
        self.s0 ^= self.s3
        self.s2 ^= t
        self.s3 = _rotl(self.s3, 45)
        return result

    def u01(self) -> float:
        # in (0,1), usable under log
        return ((self.next64() >> 11) + 0.5) * 1.1102230246251565e-16


def _ln_factorial(k: int) -> float:
    if k < 10:
        return _LN_FACT_SMALL[k]
    x = k + 1.0
    xi2 = 1.0 / (x * x)
    corr = (1.0 / 12.0 - (1.0 / 360.0 - (1.0 / 1260.0 - xi2 / 1680.0) * xi2) * xi2) / x
    return (x - 0.5) * math.log(x) - x + _HALF_LN_2PI + corr


def _poisson(rng: _Xoshiro, mean: float) -> int:
    if mean <= 0.0:
        return 0
    if mean < 10.0:
        # Knuth multiplication
        thresh = math.exp(-mean)
        k = 0
        prod = rng.u01()
        while prod > thresh:
            k += 1
            prod *= rng.u01()
        return k
    # Hormann's PTRS transformed rejection
    b = 0.931 + 2.53 * math.sqrt(mean)
    a = -0.059 + 0.02483 * b
    inv_alpha = 1.1239 + 1.1328 / (b - 3.4)
    v_r = 0.9277 - 3.6224 / (b - 2.0)
    ln_mean = math.log(mean)
    while True:
        u = rng.u01() - 0.5
        v = rng.u01()
        us = 0.5 - abs(u)
        k = int(math.floor((2.0 * a / us + b) * u + mean + 0.43))
        if us >= 0.07 and v <= v_r:
            return k
        if k < 0 or (us < 0.013 and v > us):
            continue
        lhs = math.log(v * inv_alpha / (a / (us * us) + b))
        if lhs <= k * ln_mean - mean - _ln_factorial(k):
            return k


def _attempts(rng: _Xoshiro, pos, n: int, n_events: int, p_thresh: int) -> None:
    for _ in range(n_events):
        r = rng.next64()
        prod = r * n
        i = prod >> 64
        right = (prod & MASK64) < p_thresh
        if right:
            if i == n - 1 or pos[i + 1] > pos[i] + 1:
                pos[i] += 1
        else:
            if i == 0 or pos[i - 1] < pos[i] - 1:
                pos[i] -= 1


def evolve(positions: np.ndarray, state: np.ndarray, t: float, p: float) -> None:
    """Advance a configuration by time t in place, consuming the RNG stream."""
    n = positions.shape[0]
    if n == 0 or t == 0.0:
        return
    rng = _Xoshiro(state)
    n_events = _poisson(rng, n * t)
    p_thresh = min(int(p * 18446744073709551616.0), MASK64)
    pos = positions.tolist()
    _attempts(rng, pos, n, n_events, p_thresh)
    positions[:] = pos
    rng.dump(state)


def ensemble_tally(
    seed: int,
    k0: int,
    k1: int,
    n: int,
    t: float,
    p: float,
    m: int,
    l_max: int,
    g_max: int,
    x_lo: int,
    x_hi: int,
):
    """Simulate trajectories k0..k1-1 and tally block/gap events at site level.

    Returns (n_at, n_block, n_gap, n_oob): counts of "m-th particle at x",
    "L-block at x" and "gap >= G after x" per site x in [x_lo, x_hi], plus
    the number of trajectories whose x_m fell outside the window.
    """
    width = x_hi - x_lo + 1
    n_at = np.zeros(width, dtype=np.int64)
    n_block = np.zeros((width, l_max), dtype=np.int64)
    n_gap = np.zeros((width, g_max), dtype=np.int64)
    n_oob = 0
    p_thresh = min(int(p * 18446744073709551616.0), MASK64)
    mean = n * t
    for k in range(k0, k1):
        rng = _Xoshiro(stream_state(seed, k))
        pos = list(range(1, n + 1))
        _attempts(rng, pos, n, _poisson(rng, mean), p_thresh)
        x = pos[m - 1]
        if x < x_lo or x > x_hi:
            n_oob += 1
            continue
        idx = x - x_lo
        n_at[idx] += 1
        run = 1
        while run < l_max and m - 1 + run < n and pos[m - 1 + run] == x + run:
            run += 1
        n_block[idx, :run] += 1
        if m < n:
            gap = pos[m] - x - 1
            n_gap[idx, : min(gap, g_max)] += 1
    return n_at, n_block, n_gap, n_oob
