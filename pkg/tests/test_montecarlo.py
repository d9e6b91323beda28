import numpy as np
import pytest

from asepblocks import montecarlo
from asepblocks.model import ModelParams, truncation_size


def make_spec(n_traj=4000, t=16.0):
    return montecarlo.EnsembleSpec(ModelParams(0.3), 0.25, t, n_traj, 77,
                                   l_max=3, g_max=3)


def test_spec_time_conversion_and_truncation():
    spec = make_spec()
    assert spec.t_end == pytest.approx(16.0 / 0.4)  # one gamma conversion
    assert spec.m == 4
    assert spec.n_particles == truncation_size(spec.m, spec.t_end, 3)


def test_run_ensemble_chunk_independent():
    spec = make_spec()
    a = montecarlo.run_ensemble(spec, chunk=1000)
    b = montecarlo.run_ensemble(spec, chunk=377)
    assert np.array_equal(a.n_at, b.n_at)
    assert np.array_equal(a.n_block, b.n_block)
    assert np.array_equal(a.n_gap, b.n_gap)
    assert a.n_total == b.n_total == spec.n_traj


def test_counting_identity_holds():
    tbl = montecarlo.run_ensemble(make_spec())
    tbl.check_counting_identity()
    assert tbl.n_at.sum() + tbl.n_oob == tbl.n_total


def test_ks_distance_matches_brute_force():
    # independent oracle: dense-grid sup of |F_emp - F| for a smooth F
    spec = make_spec(n_traj=5_000)
    tbl = montecarlo.run_ensemble(spec)
    svals = tbl.s_values()
    cum = np.cumsum(tbl.n_at) / tbl.n_total

    def cdf(s):
        return 1.0 / (1.0 + np.exp(-(s + 1.0) * 1.3))

    grid = np.linspace(svals[0] - 1.0, svals[-1] + 1.0, 200_001)
    emp = np.concatenate([[0.0], cum])[np.searchsorted(svals, grid, side="right")]
    brute = float(np.abs(emp - cdf(grid)).max())
    mine = montecarlo.ks_distance_vs_cdf(tbl, cdf)
    assert mine == pytest.approx(brute, abs=1e-4)


def test_site_window_covers_s_range():
    spec = make_spec()
    lo, hi = montecarlo.site_window(spec)
    from asepblocks.stats import s_of_position
    assert s_of_position(lo, spec.m, spec.t) < -spec.s_range
    assert s_of_position(hi, spec.m, spec.t) > spec.s_range
