import math

import pytest
from hypothesis import given, strategies as st

from asepblocks.model import (
    ModelParams,
    ParticleConfig,
    ScalingParams,
    SimSpec,
    truncation_size,
)


def test_model_params_derived():
    m = ModelParams(0.3)
    assert m.p + m.q == 1.0
    assert m.tau == pytest.approx(3 / 7)
    assert m.gamma == pytest.approx(0.4)
    assert 0 < m.tau < 1 and 0 < m.gamma < 1


@pytest.mark.parametrize("p", [0.0, 0.5, 0.7, -0.1])
def test_model_params_rejects_bad_p(p):
    with pytest.raises(ValueError):
        ModelParams(p)


def test_particle_config_ordering():
    ParticleConfig((1, 2, 5))
    with pytest.raises(ValueError):
        ParticleConfig((1, 1, 2))
    with pytest.raises(ValueError):
        ParticleConfig((3, 2))
    assert ParticleConfig(()).n_particles == 0


def test_simspec_covers_margin():
    spec = SimSpec(ModelParams(0.3), 10.0, truncation_size(5, 10.0, 3), 1)
    assert spec.covers(5, 3)
    assert not spec.covers(6, 3)
    with pytest.raises(ValueError):
        SimSpec(ModelParams(0.3), -1.0, 5, 1)


def test_scaling_params_quarter_density():
    sc = ScalingParams(0.25)
    assert sc.c1 == pytest.approx(0.0)
    assert sc.c2 == pytest.approx(2.0 ** (-1 / 3))
    assert sc.xi_saddle == pytest.approx(-1.0)


@given(st.floats(min_value=0.05, max_value=0.95))
def test_scaling_identities(sigma):
    sc = ScalingParams(sigma)
    # c3^-1 / (1 - xi) = c2^-1 and xi/(1 - xi) = -sqrt(sigma)
    assert 1.0 / sc.c3 / (1.0 - sc.xi_saddle) == pytest.approx(1.0 / sc.c2, abs=1e-13)
    assert sc.xi_saddle / (1.0 - sc.xi_saddle) == pytest.approx(
        -math.sqrt(sigma), abs=1e-13)


@pytest.mark.parametrize("sigma", [0.0, 1.0, 1.5])
def test_scaling_params_domain(sigma):
    with pytest.raises(ValueError):
        ScalingParams(sigma)
