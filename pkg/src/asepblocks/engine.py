"""Exact ASEP simulation on a truncated step initial condition.

The hot event loop lives in the compiled extension ``asepblocks._speedups``
when available; otherwise the pure-Python twin ``asepblocks._pykernel`` is
used.  Both produce bitwise-identical trajectories for the same
(seed, trajectory_id), which the test suite asserts.
"""

from __future__ import annotations

from typing import Iterator

import numpy as np

from .model import ModelParams, ParticleConfig, SimSpec

try:
    from . import _speedups as _kernel

    BACKEND = "compiled"
except ImportError:  # pragma: no cover - exercised only on fallback installs
    from . import _pykernel as _kernel

    BACKEND = "python"

from . import _pykernel

__all__ = [
    "BACKEND",
    "TrajectoryStream",
    "init_step",
    "run_to",
    "batch_sample",
    "sample_positions",
]


class TrajectoryStream:
    """Reproducible per-trajectory random stream derived from (seed, id)."""

    def __init__(self, seed: int, trajectory_id: int = 0, kernel=None):
        self._kernel = kernel if kernel is not None else _kernel
        self.state = self._kernel.stream_state(seed, trajectory_id)


def init_step(spec: SimSpec) -> ParticleConfig:
    """Step initial condition truncated to the first n particles: (1, 2, ..., N)."""
    return ParticleConfig(tuple(range(1, spec.n_particles + 1)))


def run_to(
    config: ParticleConfig,
    model: ModelParams,
    t: float,
    rng: TrajectoryStream,
) -> ParticleConfig:
    """Exact sample of the configuration after evolving for time t.

    Total attempt rate N; waiting times exponential(N); a uniformly chosen
    particle attempts a jump, right with probability p, suppressed if the
    target is occupied.
    """
    if t < 0:
        raise ValueError("time must be nonnegative")
    positions = np.asarray(config.positions, dtype=np.int64).copy()
    rng._kernel.evolve(positions, rng.state, float(t), model.p)
    return ParticleConfig(tuple(int(v) for v in positions))


def sample_positions(spec: SimSpec, kernel=None) -> np.ndarray:
    """Final positions of one trajectory as an int64 array (fast path)."""
    k = kernel if kernel is not None else _kernel
    positions = np.arange(1, spec.n_particles + 1, dtype=np.int64)
    state = k.stream_state(spec.seed, spec.trajectory_id)
    k.evolve(positions, state, spec.t_end, spec.model.p)
    return positions


def batch_sample(spec: SimSpec, n_traj: int) -> Iterator[ParticleConfig]:
    """n_traj independent samples at t_end; trajectory k uses substream (seed, k)."""
    if n_traj < 0:
        raise ValueError("n_traj must be nonnegative")
    for k in range(n_traj):
        sub = SimSpec(spec.model, spec.t_end, spec.n_particles, spec.seed, k)
        yield ParticleConfig(tuple(int(v) for v in sample_positions(sub)))


def ensemble_tally(*args, kernel=None, **kwargs):
    """Kernel-level tally loop; see asepblocks._pykernel.ensemble_tally."""
    k = kernel if kernel is not None else _kernel
    return k.ensemble_tally(*args, **kwargs)


def python_kernel():
    """The pure-Python kernel module (for equivalence tests and benchmarks)."""
    return _pykernel
