import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from asepblocks import stats
from asepblocks.model import ParticleConfig, ScalingParams


def test_is_block_start():
    c = ParticleConfig((1, 2, 3, 5))
    assert stats.is_block_start(c, 1, 3)
    assert not stats.is_block_start(c, 1, 4)
    assert stats.is_block_start(c, 4, 1)
    with pytest.raises(IndexError):
        stats.is_block_start(c, 4, 2)


def test_gap_after():
    assert stats.gap_after(ParticleConfig((1, 2)), 1) == 0
    assert stats.gap_after(ParticleConfig((1, 5)), 1) == 3
    with pytest.raises(IndexError):
        stats.gap_after(ParticleConfig((1, 5)), 2)
    # no gap <=> a block of at least two
    c = ParticleConfig((0, 1, 4))
    assert (stats.gap_after(c, 1) == 0) == stats.is_block_start(c, 1, 2)
    assert (stats.gap_after(c, 2) == 0) == stats.is_block_start(c, 2, 2)


def test_kpz_position_quarter_density():
    assert stats.kpz_position(ScalingParams(0.25, 0.0), 1000.0) == 0
    assert stats.kpz_position(ScalingParams(0.25, 1.0), 1000.0) == 8
    assert stats.kpz_position(ScalingParams(0.25, -1.0), 1000.0) == -8


def test_s_of_position_values():
    assert stats.s_of_position(0, 250, 1000.0) == pytest.approx(0.0)
    assert stats.s_of_position(8, 250, 1000.0) == pytest.approx(
        8.0 / (2.0 ** (-1 / 3) * 10.0))


@given(st.floats(min_value=0.1, max_value=0.9),
       st.floats(min_value=-3.0, max_value=3.0))
def test_position_roundtrip(sigma, s):
    t = 400.0
    m = round(sigma * t)
    sc = ScalingParams(m / t, s)
    x = stats.kpz_position(sc, t)
    back = stats.s_of_position(x, m, t)
    assert abs(back - s) <= 0.5 / (sc.c2 * t ** (1 / 3)) + 1e-12


def _tally_three_configs():
    configs = [ParticleConfig((1, 2, 4)), ParticleConfig((1, 3, 4)),
               ParticleConfig((2, 3, 4))]
    return stats.tally(configs, m=1, l_max=2, g_max=2, x_lo=0, x_hi=5, t=10.0)


def test_tally_counts():
    tbl = _tally_three_configs()
    assert tbl.n_total == 3
    i1 = 1 - tbl.x_lo
    assert tbl.n_at[i1] == 2  # configs starting at 1
    assert tbl.n_block[i1, 1] == 1  # (1,2,4) only
    assert tbl.n_gap[i1, 0] == 1  # (1,3,4) only
    tbl.check_counting_identity()


def test_counter_table_merge_associative():
    a, b, c = (_tally_three_configs() for _ in range(3))
    left = a.merge(b).merge(c)
    right = a.merge(b.merge(c))
    assert np.array_equal(left.n_at, right.n_at)
    assert np.array_equal(left.n_block, right.n_block)
    assert np.array_equal(left.n_gap, right.n_gap)
    assert left.n_total == right.n_total == 9


def test_conditional_estimates_binomial():
    tbl = stats.CounterTable(0, 0, 1, 10.0, 2, 1)
    tbl.n_total = 100
    tbl.n_at[0] = 100
    tbl.n_block[0, 0] = 100
    tbl.n_block[0, 1] = 50
    tbl.n_gap[0, 0] = 50
    est = stats.conditional_estimates(tbl, s_pool=10.0)
    ratio, se = est["pooled"]["block"][1]["estimate"]
    assert ratio == pytest.approx(0.5)
    assert se == pytest.approx(0.05)


def test_binned_view_conserves_counts():
    tbl = _tally_three_configs()
    rows = tbl.binned(0.25)
    assert sum(r["n_at"] for r in rows) == tbl.n_at.sum()
    assert sum(int(r["n_block"][1]) for r in rows) == tbl.n_block[:, 1].sum()


def test_conditional_estimates_flags_empty():
    tbl = stats.CounterTable(0, 1, 1, 10.0, 1, 1)
    tbl.n_total = 1
    tbl.n_at[1] = 1
    tbl.n_block[1, 0] = 1
    est = stats.conditional_estimates(tbl)
    assert est["per_site"][0]["block"][0]["estimate"] is None
    assert est["per_site"][1]["block"][0]["estimate"] is not None


def test_theorem_prediction_ratios():
    sc = ScalingParams(0.25, 0.3)
    f2p = 0.21
    t = 500.0
    p1 = stats.block_density_prediction(sc, 1, t, f2p)
    p2 = stats.block_density_prediction(sc, 2, t, f2p)
    p3 = stats.block_density_prediction(sc, 3, t, f2p)
    assert p2 / p1 == pytest.approx(math.sqrt(sc.sigma))
    assert p3 / p2 == pytest.approx(math.sqrt(sc.sigma))
    g1 = stats.gap_density_prediction(sc, 1, t, f2p)
    g2 = stats.gap_density_prediction(sc, 2, t, f2p)
    assert g2 / g1 == pytest.approx(1.0 - math.sqrt(sc.sigma))
    # no gap is a block of at least two: G=1 + (L=2) = L=1
    assert g1 + p2 == pytest.approx(p1)
    # sigma=0.25: sigma^((3-1)/2) = 0.25 and (1-sqrt(sigma))^2 = 0.25
    assert p3 / p1 == pytest.approx(0.25)
    assert g2 / g1 / (g1 / p1) == pytest.approx(1.0)


def test_dual_config_examples():
    c = ParticleConfig((1, 3, 4))
    d = stats.dual_config(c, (1, 5))
    assert d.positions == (-5, -2)
    # double dual over the reflected window restores the original
    dd = stats.dual_config(d, (-5, -1))
    assert dd.positions == (1, 3, 4)
    step = ParticleConfig(tuple(range(1, 6)))
    assert stats.dual_config(step, (1, 5)).positions == ()


def test_dual_index():
    assert stats.dual_index(ParticleConfig((1, 2, 3, 4)), 0, 1) == 1
    # holes strictly right of x+G: (0,2,3) with x=0, G=1 has none up to 3
    assert stats.dual_index(ParticleConfig((0, 2, 3)), 0, 1) == 1
    # one hole (site 3) right of x+G=1
    assert stats.dual_index(ParticleConfig((0, 2, 4)), 0, 1) == 2
    with pytest.raises(ValueError):
        stats.dual_index(ParticleConfig((0, 1)), 1, 2)


def test_dual_scaling():
    sc = ScalingParams(0.25, 0.0)
    dual = stats.dual_scaling(sc, math.inf)
    assert dual.sigma == pytest.approx(0.25)  # self-dual density
    # bracket identity: (1-r)^-1 c2 - (1-r)^(-1/3) r^(2/3) = c2, r = sqrt(sigma)
    for sigma in (0.25, 0.4, 0.7):
        s = ScalingParams(sigma)
        r = math.sqrt(sigma)
        assert s.c2 / (1 - r) - (1 - r) ** (-1 / 3) * r ** (2 / 3) == pytest.approx(
            s.c2, abs=1e-13)
    # c2'^-1 sqrt(sigma) = c2^-1 (1 - sqrt(sigma)) at leading order
    lead = stats.dual_scaling(ScalingParams(0.25, 0.0), math.inf)
    assert math.sqrt(0.25) / lead.c2 == pytest.approx(
        (1 - math.sqrt(0.25)) / ScalingParams(0.25).c2)
    # finite-t correction moves sigma' in the s-direction
    hi = stats.dual_scaling(ScalingParams(0.25, 1.0), 1000.0)
    assert hi.sigma < 0.25
