import math

import mpmath as mp
import numpy as np
import pytest

from asepblocks.airyfn import airy, airy_unchecked

mp.mp.dps = 30


def test_closed_form_values_at_zero():
    ai, aip = airy(0.0)
    assert ai == pytest.approx(3.0 ** (-2 / 3) / math.gamma(2 / 3), rel=1e-14)
    assert aip == pytest.approx(-(3.0 ** (-1 / 3)) / math.gamma(1 / 3), rel=1e-14)


def test_against_mpmath_grid():
    for x in np.linspace(-48.0, 48.0, 129):
        ai, aip = airy(float(x))
        ref = float(mp.airyai(float(x)))
        refp = float(mp.airyai(float(x), 1))
        assert ai == pytest.approx(ref, rel=5e-12, abs=1e-280)
        assert aip == pytest.approx(refp, rel=5e-12, abs=1e-280)


def test_defining_ode_residual():
    # Ai'' - x Ai ~ 0 via five-point finite differences
    h = 1e-3
    for x in (-3.7, -0.5, 1.3, 6.2):
        vals = [airy(x + k * h)[0] for k in (-2, -1, 0, 1, 2)]
        second = (-vals[0] + 16 * vals[1] - 30 * vals[2] + 16 * vals[3] - vals[4]) / (
            12 * h * h)
        assert abs(second - x * vals[2]) < 1e-10 * max(1.0, abs(vals[2]))


def test_zone_overlap_agreement():
    # series vs ODE march around the inner switchover
    for x in (4.4, 4.6, 5.5, -4.6, -5.4):
        ai, aip = airy_unchecked(x)
        ref = float(mp.airyai(x))
        assert ai == pytest.approx(ref, rel=1e-11)
    # march vs asymptotics around the outer switchover
    for x in (8.9, 9.1, -8.9, -9.1):
        ai, _ = airy_unchecked(x)
        assert ai == pytest.approx(float(mp.airyai(x)), rel=1e-11)


def test_derivative_matches_finite_difference():
    h = 1e-5
    for x in (-7.3, -2.0, 0.7, 8.4):
        _, aip = airy(x)
        fd = (airy(x + h)[0] - airy(x - h)[0]) / (2 * h)
        assert aip == pytest.approx(fd, rel=1e-7, abs=1e-12)


def test_domain_guard():
    with pytest.raises(ValueError):
        airy(50.5)
    with pytest.raises(ValueError):
        airy(-51.0)
    # the unchecked variant keeps going (needed by the kernel quadratures)
    assert airy_unchecked(120.0)[0] == pytest.approx(0.0, abs=1e-300)
