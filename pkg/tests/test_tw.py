import numpy as np
import pytest

from asepblocks import tw
from asepblocks.airyfn import airy_unchecked


def test_f2_monotone_distribution():
    values = [tw.f2(s, n=160) for s in np.linspace(-8.0, 6.0, 50)]
    assert all(0.0 <= v <= 1.0 + 1e-12 for v in values)
    assert all(b > a for a, b in zip(values, values[1:]))


def test_f2_tails():
    assert 1.0 - tw.f2(6.0) < 1e-8
    assert tw.f2(-8.0) < 1e-4


def test_f2_node_doubling_converged():
    for s in np.linspace(-6.0, 4.0, 11):
        assert abs(tw.f2(float(s), n=160) - tw.f2(float(s), n=320)) < 1e-9


def test_f2_against_painleve():
    assert abs(tw.f2(0.0) - tw.painleve_f2(0.0)) < 1e-6
    assert tw.f2(0.0) == pytest.approx(0.9694, abs=2e-4)
    for s in range(-5, 3):
        assert abs(tw.f2(float(s)) - tw.painleve_f2(float(s))) < 1e-6


def test_f2_prime_density():
    assert tw.f2_prime(6.0) < 1e-8
    assert tw.f2_prime(-1.77) > 0.3  # near the mode


def test_det_j0_equals_f2_and_contour_invariance():
    for s in (-2.0, 0.0, 1.0):
        ref = tw.f2(s)
        for c3 in (0.2, 0.4, 0.8):
            val = tw.det_J0_contour(s, c3=c3)
            assert abs(val.imag) < 1e-8
            assert abs(val.real - ref) < 1e-8
    assert abs(tw.det_J0_contour(6.0) - 1.0) < 1e-8


def test_trace_route_matches_log_derivative():
    tr = tw.trace_f2_ratio(0.0)
    assert tr == pytest.approx(tw.f2_prime(0.0) / tw.f2(0.0), abs=1e-6)
    assert abs(tw.trace_f2_ratio(5.5)) < 1e-4  # both F2' -> 0 and F2 -> 1


def test_j1_is_s_derivative_of_j0():
    s, c3, h, n = 0.3, 0.4, 1e-5, 48
    m_minus, _, _ = tw._j0_matrices(s - h, c3, n)
    m_plus, j1_mat, _ = tw._j0_matrices(s + h, c3, n)
    m0_fd = (m_plus - m_minus) / (2 * h)
    _, j1_mid, _ = tw._j0_matrices(s, c3, n)
    assert np.max(np.abs(m0_fd - j1_mid)) < 1e-6


def test_painleve_boundary_matches_airy():
    q5 = tw.hastings_mcleod_q(5.0)
    ai5 = airy_unchecked(5.0)[0]
    assert abs(q5 - ai5) / ai5 < 1e-6
    assert abs(tw.painleve_f2(6.0) - 1.0) < 1e-8


def test_ray_truncation_kills_integrand():
    # kernel magnitude at the ray endpoints below 1e-16 for the s range used
    rays = tw.ContourRays(0.0, np.pi / 3.0)
    nodes, _ = rays.nodes_weights()
    end = nodes[-1]
    for s in (-6.0, 0.0, 6.0):
        assert abs(np.exp(end**3 / 3.0 - s * end)) < 1e-16


def test_domain_guards():
    with pytest.raises(ValueError):
        tw.f2(-9.0)
    with pytest.raises(ValueError):
        tw.f2_prime(-8.5)
    with pytest.raises(ValueError):
        tw.det_J0_contour(0.0, c3=-0.1)
