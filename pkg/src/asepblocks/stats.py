"""Block/gap event detection, Monte Carlo estimators, the KPZ scaling map,
particle-hole duality, and the closed-form block/gap predictions.

Conditional limits being verified: an L-block given presence tends to
sigma^((L-1)/2); a gap of at least G given presence tends to
(1 - sqrt(sigma))^G.  The density prediction for the m-th particle being at
x with an L-block is c2^(-1) * sigma^((L-1)/2) * F2'(s) * t^(-1/3).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import ParticleConfig, ScalingParams

__all__ = [
    "is_block_start",
    "gap_after",
    "kpz_position",
    "s_of_position",
    "CounterTable",
    "tally",
    "conditional_estimates",
    "block_density_prediction",
    "gap_density_prediction",
    "dual_config",
    "dual_index",
    "dual_scaling",
]


def is_block_start(config: ParticleConfig, m: int, l_block: int) -> bool:
    """True iff particles m..m+L-1 sit on consecutive sites."""
    pos = config.positions
    if not (1 <= m and m + l_block - 1 <= len(pos)):
        raise IndexError(f"block query (m={m}, L={l_block}) outside configuration")
    x = pos[m - 1]
    return all(pos[m - 1 + j] == x + j for j in range(l_block))


def gap_after(config: ParticleConfig, m: int) -> int:
    """Number of empty sites between particle m and particle m+1."""
    pos = config.positions
    if not 1 <= m < len(pos):
        raise IndexError(f"particle {m} has no successor in configuration of size {len(pos)}")
    return pos[m] - pos[m - 1] - 1


def kpz_position(sc: ScalingParams, t: float) -> int:
    """Nearest lattice site to c1*t + c2*s*t^(1/3)."""
    if t <= 0:
        raise ValueError("t must be positive")
    return round(sc.c1 * t + sc.c2 * sc.s * t ** (1 / 3))


def s_of_position(x: int, m: int, t: float) -> float:
    """Fluctuation coordinate of site x for the m-th particle at time scale t."""
    if t <= 0:
        raise ValueError("t must be positive")
    sigma = m / t
    if not 0.0 < sigma < 1.0:
        raise ValueError(f"sigma=m/t={sigma} outside (0,1)")
    sc = ScalingParams(sigma)
    return (x - sc.c1 * t) / (sc.c2 * t ** (1 / 3))


@dataclass
class CounterTable:
    """Monte Carlo tallies at site resolution, viewable through s-bins.

    n_at[i] counts trajectories whose m-th particle landed on site
    x_lo + i; n_block[i, L-1] those that additionally started a block of
    length >= L; n_gap[i, G-1] those followed by a gap of >= G empty sites.
    A 1-block is just presence, so n_block[:, 0] == n_at.
    """

    x_lo: int
    x_hi: int
    m: int
    t: float
    l_max: int
    g_max: int
    n_total: int = 0
    n_oob: int = 0
    n_at: np.ndarray = field(default=None)
    n_block: np.ndarray = field(default=None)
    n_gap: np.ndarray = field(default=None)

    def __post_init__(self):
        width = self.x_hi - self.x_lo + 1
        if self.n_at is None:
            self.n_at = np.zeros(width, dtype=np.int64)
        if self.n_block is None:
            self.n_block = np.zeros((width, self.l_max), dtype=np.int64)
        if self.n_gap is None:
            self.n_gap = np.zeros((width, self.g_max), dtype=np.int64)

    @property
    def sites(self) -> np.ndarray:
        return np.arange(self.x_lo, self.x_hi + 1)

    def s_values(self) -> np.ndarray:
        return np.array([s_of_position(x, self.m, self.t) for x in self.sites])

    def merge(self, other: "CounterTable") -> "CounterTable":
        """Associative, commutative reduction of two tables over the same window."""
        if (self.x_lo, self.x_hi, self.m, self.t) != (other.x_lo, other.x_hi, other.m, other.t):
            raise ValueError("cannot merge tables with different windows or queries")
        out = CounterTable(self.x_lo, self.x_hi, self.m, self.t, self.l_max, self.g_max)
        out.n_total = self.n_total + other.n_total
        out.n_oob = self.n_oob + other.n_oob
        out.n_at = self.n_at + other.n_at
        out.n_block = self.n_block + other.n_block
        out.n_gap = self.n_gap + other.n_gap
        return out

    def check_counting_identity(self) -> None:
        """n_gap[1] + n_block[2] = n_at exactly: no gap == block of >= 2."""
        if self.l_max < 2 or self.g_max < 1:
            return
        lhs = self.n_gap[:, 0] + self.n_block[:, 1]
        if not np.array_equal(lhs, self.n_at):
            raise AssertionError("counting identity n_gap[1] + n_block[2] == n_at violated")

    def pooled(self, s_limit: float) -> tuple[int, np.ndarray, np.ndarray]:
        """Summed counts over sites with |s| <= s_limit."""
        mask = np.abs(self.s_values()) <= s_limit
        return (
            int(self.n_at[mask].sum()),
            self.n_block[mask].sum(axis=0),
            self.n_gap[mask].sum(axis=0),
        )

    def binned(self, width: float = 0.25):
        """Counts aggregated into s-bins of the given width (centers at k*width).

        The limit laws are s-independent, so pooling is consistent; the
        binned view exposes any s-dependence of the finite-t corrections.
        """
        svals = self.s_values()
        idx = np.round(svals / width).astype(int)
        rows = []
        for k in np.unique(idx):
            mask = idx == k
            rows.append({
                "s_center": float(k * width),
                "n_at": int(self.n_at[mask].sum()),
                "n_block": self.n_block[mask].sum(axis=0),
                "n_gap": self.n_gap[mask].sum(axis=0),
            })
        return rows


def tally(configs, m: int, l_max: int, g_max: int, x_lo: int, x_hi: int,
          t: float) -> CounterTable:
    """Tally block/gap events for a stream of configurations (reference path).

    The production Monte Carlo path uses the kernel-level tally loop in
    :mod:`asepblocks.engine`; this operates on explicit configurations.
    """
    tbl = CounterTable(x_lo, x_hi, m, t, l_max, g_max)
    for config in configs:
        tbl.n_total += 1
        pos = config.positions
        x = pos[m - 1]
        if x < x_lo or x > x_hi:
            tbl.n_oob += 1
            continue
        idx = x - x_lo
        tbl.n_at[idx] += 1
        run = 1
        while run < l_max and m - 1 + run < len(pos) and pos[m - 1 + run] == x + run:
            run += 1
        tbl.n_block[idx, :run] += 1
        if m < len(pos):
            tbl.n_gap[idx, : min(gap_after(config, m), g_max)] += 1
    return tbl


def _ratio_with_error(count: int, n: int) -> tuple[float, float]:
    ratio = count / n
    return ratio, math.sqrt(ratio * (1.0 - ratio) / n)


def conditional_estimates(tbl: CounterTable, s_pool: float = 1.0) -> dict:
    """Per-site and pooled conditional block/gap frequencies with Wald errors.

    Sites with n_at == 0 are flagged via estimate=None rather than NaN.
    """
    rows = []
    svals = tbl.s_values()
    for i, x in enumerate(tbl.sites):
        at = int(tbl.n_at[i])
        entry = {"x": int(x), "s": float(svals[i]), "n_at": at, "block": [], "gap": []}
        for l in range(1, tbl.l_max + 1):
            cnt = int(tbl.n_block[i, l - 1])
            est = _ratio_with_error(cnt, at) if at > 0 else None
            entry["block"].append({"L": l, "count": cnt, "estimate": est})
        for g in range(1, tbl.g_max + 1):
            cnt = int(tbl.n_gap[i, g - 1])
            est = _ratio_with_error(cnt, at) if at > 0 else None
            entry["gap"].append({"G": g, "count": cnt, "estimate": est})
        rows.append(entry)
    at_pool, block_pool, gap_pool = tbl.pooled(s_pool)
    pooled = {"n_at": at_pool, "s_pool": s_pool, "block": [], "gap": []}
    for l in range(1, tbl.l_max + 1):
        cnt = int(block_pool[l - 1])
        pooled["block"].append(
            {"L": l, "count": cnt,
             "estimate": _ratio_with_error(cnt, at_pool) if at_pool else None}
        )
    for g in range(1, tbl.g_max + 1):
        cnt = int(gap_pool[g - 1])
        pooled["gap"].append(
            {"G": g, "count": cnt,
             "estimate": _ratio_with_error(cnt, at_pool) if at_pool else None}
        )
    return {"per_site": rows, "pooled": pooled}


def block_density_prediction(sc: ScalingParams, l_block: int, t: float,
                        f2_prime_s: float) -> float:
    """Leading-order P(m-th particle at x, L-block): c2^-1 sigma^((L-1)/2) F2'(s) t^-1/3."""
    return sc.sigma ** ((l_block - 1) / 2) * f2_prime_s / (sc.c2 * t ** (1 / 3))


def gap_density_prediction(sc: ScalingParams, g_gap: int, t: float,
                        f2_prime_s: float) -> float:
    """Leading-order P(m-th particle at x, gap >= G): c2^-1 (1-sqrt(sigma))^G F2'(s) t^-1/3."""
    return (1.0 - math.sqrt(sc.sigma)) ** g_gap * f2_prime_s / (sc.c2 * t ** (1 / 3))


def dual_config(config: ParticleConfig, window: tuple[int, int]) -> ParticleConfig:
    """Particle-hole dual: occupied sites become the reflected unoccupied ones.

    The caller is responsible for a window that covers all displaced holes;
    margin policy lives with the simulation query code.
    """
    lo, hi = window
    occupied = set(config.positions)
    return ParticleConfig(tuple(sorted(-y for y in range(lo, hi + 1) if y not in occupied)))


def dual_index(config: ParticleConfig, x: int, g_gap: int) -> int:
    """Index in the dual process of the particle at -(x+G): one plus the
    number of unoccupied sites strictly right of x+G."""
    pos = config.positions
    if not pos or pos[-1] <= x + g_gap:
        raise ValueError("truncation margin violated: no particles right of x+G")
    right = [y for y in pos if y > x + g_gap]
    span = pos[-1] - (x + g_gap)
    return 1 + span - len(right)


def dual_scaling(sc: ScalingParams, t: float) -> ScalingParams:
    """Scaling parameters of the hole process.

    sqrt(sigma') = 1 - sqrt(sigma) - c2*s*t^(-2/3) / (2*(1 - sqrt(sigma))),
    keeping the first finite-t correction; at s=0 or t -> infinity this is
    the leading value sigma' = (1 - sqrt(sigma))^2.
    """
    root = 1.0 - math.sqrt(sc.sigma)
    root_dual = root - 0.5 * sc.c2 * sc.s / (root * t ** (2 / 3)) if t != math.inf else root
    return ScalingParams(root_dual**2, sc.s)
