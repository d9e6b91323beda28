"""Exact finite-state CTMC computation of block/gap probabilities.

Ground truth for both the event-driven simulator and the contour-integral
formulas, on small truncations of the step initial condition.  States are
bitmasks over a site window [a, b]; the full N-subset space is enumerated,
the generator assembled sparsely, and e^{Qt} applied by uniformization
(Poisson-weighted powers of the jump kernel with explicit tail control).

Truncation policy: jumps leaving the window are suppressed (reflecting
boundary), and margins are sized from the influence-chain Poisson tails
(rate p*t toward the left through blocking, rate q*t for the left wall).
The window-enlargement invariant in the tests validates the sizing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np
import scipy.sparse as sp

from .model import ModelParams

__all__ = [
    "StateSpace",
    "build_generator",
    "evolve",
    "prob_block",
    "prob_gap",
    "default_space",
]

MAX_STATES = 3_000_000


@dataclass(frozen=True)
class StateSpace:
    """All N-particle configurations on the integer window [a, b]."""

    window: tuple[int, int]
    n_particles: int

    def __post_init__(self):
        a, b = self.window
        width = b - a + 1
        if width < self.n_particles:
            raise ValueError("window narrower than particle count")
        if width > 60:
            raise ValueError("window too wide for bitmask states")
        if math.comb(width, self.n_particles) > MAX_STATES:
            raise ValueError(
                f"state space C({width},{self.n_particles}) exceeds {MAX_STATES}"
            )

    @property
    def width(self) -> int:
        return self.window[1] - self.window[0] + 1

    def bit(self, site: int) -> int:
        a, b = self.window
        if not a <= site <= b:
            raise ValueError(f"site {site} outside window {self.window}")
        return site - a

    def masks(self) -> np.ndarray:
        """Sorted uint64 bitmasks of every N-subset of the window."""
        width, n = self.width, self.n_particles
        out = np.fromiter(
            (sum(1 << i for i in comb) for comb in combinations(range(width), n)),
            dtype=np.uint64,
            count=math.comb(width, n),
        )
        out.sort()
        return out

    def index_of(self, masks: np.ndarray, state_mask: int) -> int:
        i = int(np.searchsorted(masks, np.uint64(state_mask)))
        if i >= masks.size or masks[i] != np.uint64(state_mask):
            raise KeyError("state not in space")
        return i

    def state_of_positions(self, positions) -> int:
        return sum(1 << self.bit(x) for x in positions)


def build_generator(space: StateSpace, model: ModelParams, masks: np.ndarray | None = None):
    """Sparse rate matrix Q: rate p right / q left per particle, exclusion,
    moves exiting the window suppressed.  Rows sum to zero."""
    if masks is None:
        masks = space.masks()
    n_states = masks.size
    rows, cols, vals = [], [], []
    diag = np.zeros(n_states)
    for i in range(space.width - 1):
        lo_bit = np.uint64(1 << i)
        hi_bit = np.uint64(1 << (i + 1))
        both = lo_bit | hi_bit
        movable = (masks & both) == lo_bit  # occupied left, empty right
        idx = np.nonzero(movable)[0]
        targets = masks[idx] ^ both
        tgt_idx = np.searchsorted(masks, targets)
        # right jumps at rate p
        rows.append(idx)
        cols.append(tgt_idx)
        vals.append(np.full(idx.size, model.p))
        diag[idx] -= model.p
        # left jumps (reverse transition) at rate q
        rows.append(tgt_idx)
        cols.append(idx)
        vals.append(np.full(idx.size, model.q))
        diag[tgt_idx] -= model.q
    rows.append(np.arange(n_states))
    cols.append(np.arange(n_states))
    vals.append(diag)
    q_mat = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n_states, n_states),
    )
    return q_mat.tocsr()


def evolve(gen, initial: int, t: float, uniform_rate: float | None = None,
           tail: float = 1e-12, max_terms: int = 2_000_000) -> np.ndarray:
    """Distribution at time t from state index `initial` by uniformization."""
    if t < 0:
        raise ValueError("time must be nonnegative")
    n_states = gen.shape[0]
    v = np.zeros(n_states)
    v[initial] = 1.0
    if t == 0.0:
        return v
    lam = uniform_rate if uniform_rate is not None else float(-gen.diagonal().min())
    if lam <= 0.0:
        return v
    # jump kernel transposed: out <- P^T @ v accumulates pi_t = pi_0 e^{Qt}
    pt_mat = (sp.identity(n_states, format="csr") + gen / lam).T.tocsr()
    mu = lam * t
    out = np.zeros(n_states)
    log_w = -mu  # log Poisson(mu) weight at k=0
    cum = 0.0
    k = 0
    while True:
        w = math.exp(log_w)
        out += w * v
        cum += w
        if 1.0 - cum < tail and k > mu:
            break
        k += 1
        if k > max_terms:
            raise RuntimeError("uniformization tail not reached within term cap")
        v = pt_mat.dot(v)
        log_w += math.log(mu) - math.log(k)
    return out


def _poisson_margin(mean: float, tol: float) -> int:
    """Smallest d with P(Poisson(mean) >= d) < tol."""
    if mean <= 0.0:
        return 1
    d = 0
    term = math.exp(-mean)
    cum = term
    while 1.0 - cum >= tol and d < 10_000:
        d += 1
        term *= mean / d
        cum += term
    return d + 1


def default_space(model: ModelParams, t: float, x: int, m: int, span: int,
                  tol: float = 1e-9) -> StateSpace:
    """Margin-sized window and particle count for an event on sites x..x+span.

    Influence from the truncation edge reaches the event zone through a
    chain of right-jump attempts (rate p each); the left wall matters only
    through particle 1's leftward excursions (rate q).
    """
    zone_right = x + span
    d_chain = _poisson_margin(model.p * t, tol)
    d_left = _poisson_margin(model.q * t, tol)
    n = max(m + span + 1, zone_right + d_chain - 1, 2)
    a = min(x, 1 - d_left)
    b = n + 2
    return StateSpace((a, b), n)


def _event_indices_block(space: StateSpace, masks: np.ndarray, x: int, m: int,
                         l_block: int) -> np.ndarray:
    bit_x = space.bit(x)
    below = np.uint64((1 << bit_x) - 1)
    want = np.uint64(0)
    for j in range(l_block):
        want |= np.uint64(1 << space.bit(x + j))
    ok = (masks & want) == want
    ok &= np.bitwise_count(masks & below) == (m - 1)
    return np.nonzero(ok)[0]


def _event_indices_gap(space: StateSpace, masks: np.ndarray, x: int, m: int,
                       g_gap: int) -> np.ndarray:
    bit_x = space.bit(x)
    below = np.uint64((1 << bit_x) - 1)
    empty = np.uint64(0)
    for j in range(1, g_gap + 1):
        empty |= np.uint64(1 << space.bit(x + j))
    ok = (masks >> np.uint64(bit_x)) & np.uint64(1) == np.uint64(1)
    ok &= (masks & empty) == np.uint64(0)
    ok &= np.bitwise_count(masks & below) == (m - 1)
    return np.nonzero(ok)[0]


class OracleRun:
    """Cached enumeration + generator + evolved distribution for one (space, model, t)."""

    def __init__(self, space: StateSpace, model: ModelParams, t: float):
        self.space = space
        self.model = model
        self.t = t
        self.masks = space.masks()
        gen = build_generator(space, model, self.masks)
        init = space.index_of(self.masks, space.state_of_positions(
            range(1, space.n_particles + 1)))
        self.dist = evolve(gen, init, t, uniform_rate=float(space.n_particles))
        total = self.dist.sum()
        if abs(total - 1.0) > 1e-10:
            raise RuntimeError(f"uniformization lost probability: sum={total}")

    def prob_block(self, x: int, m: int, l_block: int) -> float:
        idx = _event_indices_block(self.space, self.masks, x, m, l_block)
        return float(self.dist[idx].sum())

    def prob_gap(self, x: int, m: int, g_gap: int) -> float:
        idx = _event_indices_gap(self.space, self.masks, x, m, g_gap)
        return float(self.dist[idx].sum())


def prob_block(space: StateSpace, model: ModelParams, t: float, x: int, m: int,
               l_block: int) -> float:
    """P(m-th particle at x and an L-block starts there) at time t, exactly."""
    return OracleRun(space, model, t).prob_block(x, m, l_block)


def prob_gap(space: StateSpace, model: ModelParams, t: float, x: int, m: int,
             g_gap: int) -> float:
    """P(m-th particle at x followed by >= G empty sites) at time t, exactly."""
    return OracleRun(space, model, t).prob_gap(x, m, g_gap)
