"""Domain types shared across the package.

The model convention throughout: particles on the integer lattice jump one
step right at rate p and one step left at rate q = 1 - p, with jumps onto
occupied sites suppressed.  We always assume 0 < p < q (drift to the left),
so tau = p/q lies in (0, 1) and gamma = q - p in (0, 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass(frozen=True)
class ModelParams:
    """Jump rates and the derived constants tau = p/q, gamma = q - p."""

    p: float

    def __post_init__(self):
        if not 0.0 < self.p < 0.5:
            raise ValueError(f"need 0 < p < 0.5 (drift to the left), got p={self.p}")

    @property
    def q(self) -> float:
        return 1.0 - self.p

    @property
    def tau(self) -> float:
        return self.p / self.q

    @property
    def gamma(self) -> float:
        return self.q - self.p


@dataclass(frozen=True)
class ParticleConfig:
    """Strictly increasing particle positions; x[m-1] is the m-th from the left."""

    positions: tuple[int, ...]

    def __post_init__(self):
        pos = self.positions
        if any(pos[i] >= pos[i + 1] for i in range(len(pos) - 1)):
            raise ValueError("positions must be strictly increasing (exclusion)")

    @property
    def n_particles(self) -> int:
        return len(self.positions)


def truncation_size(m_max: int, t_end: float, l_max: int) -> int:
    """Number of particles kept from the step initial condition.

    Information propagates through rate-1 clocks, so influence across a
    distance d within time t is bounded by a Poisson(t) tail beyond d; the
    margin t + 6*sqrt(t) keeps that tail below ~1e-8 for desk-scale t.
    """
    return m_max + math.ceil(t_end) + math.ceil(6.0 * math.sqrt(t_end)) + l_max


@dataclass(frozen=True)
class SimSpec:
    """One reproducible simulation run: model, horizon, truncation, RNG seed."""

    model: ModelParams
    t_end: float
    n_particles: int
    seed: int
    trajectory_id: int = 0

    def __post_init__(self):
        if self.t_end < 0:
            raise ValueError("t_end must be nonnegative")
        if self.n_particles < 0:
            raise ValueError("n_particles must be nonnegative")

    def covers(self, m_max: int, l_max: int) -> bool:
        """Light-cone margin check for queries served by this run."""
        return self.n_particles >= truncation_size(m_max, self.t_end, l_max)


@dataclass(frozen=True)
class ScalingParams:
    """KPZ-regime constants for density sigma = m/t and fluctuation coordinate s.

    c1 = -1 + 2*sqrt(sigma)
    c2 = sigma^(-1/6) * (1 - sqrt(sigma))^(2/3)
    c3 = sigma^(-1/6) * (1 - sqrt(sigma))^(5/3)
    xi_saddle = -sqrt(sigma) / (1 - sqrt(sigma))
    """

    sigma: float
    s: float = 0.0
    c1: float = field(init=False)
    c2: float = field(init=False)
    c3: float = field(init=False)
    xi_saddle: float = field(init=False)

    def __post_init__(self):
        if not 0.0 < self.sigma < 1.0:
            raise ValueError(f"sigma must lie in (0,1), got {self.sigma}")
        r = math.sqrt(self.sigma)
        object.__setattr__(self, "c1", -1.0 + 2.0 * r)
        object.__setattr__(self, "c2", self.sigma ** (-1 / 6) * (1.0 - r) ** (2 / 3))
        object.__setattr__(self, "c3", self.sigma ** (-1 / 6) * (1.0 - r) ** (5 / 3))
        object.__setattr__(self, "xi_saddle", -r / (1.0 - r))
