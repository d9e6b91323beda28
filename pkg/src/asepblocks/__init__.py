"""Blocks and gaps in the asymmetric simple exclusion process.

Exact contour-integral probability formulas, Tracy-Widom F2 numerics, a
finite-state CTMC oracle, and large-scale Monte Carlo verification of the
KPZ-regime block/gap asymptotics.
"""

__version__ = "0.1.0"

from .model import ModelParams, ParticleConfig, ScalingParams, SimSpec

__all__ = [
    "ModelParams",
    "ParticleConfig",
    "ScalingParams",
    "SimSpec",
    "__version__",
]
