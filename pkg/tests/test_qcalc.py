import cmath
import math

import numpy as np
import pytest

from asepblocks import oracle, qcalc
from asepblocks.model import ModelParams

MODEL = ModelParams(0.3)
TAU = MODEL.tau


def test_qpoch_basics():
    assert qcalc.qpoch(0.0, 0.5, 7) == 1.0
    assert qcalc.qpoch(0.3 + 0.1j, 0.5, 1) == 1.0 - (0.3 + 0.1j)
    # argument 1 kills the j=0 factor outright
    assert qcalc.qpoch(1.0, 0.5, math.inf) == 0.0
    # direct truncated product reference for the j >= 1 part
    direct = 1.0
    for j in range(1, 200):
        direct *= 1.0 - 0.5**j
    assert qcalc.qpoch(0.5, 0.5, math.inf) == pytest.approx(direct, abs=1e-12)
    assert qcalc.qpoch(0.5, 0.5, math.inf) == pytest.approx(0.2887880951, abs=1e-9)


def test_eval_u_special_values():
    # U(tau, z) = p and U(z, tau) = q for z != tau
    for z in (0.1, 2.0, 1.5 + 0.5j):
        assert qcalc.eval_U(TAU, z, MODEL) == pytest.approx(MODEL.p, abs=1e-14)
        assert qcalc.eval_U(z, TAU, MODEL) == pytest.approx(MODEL.q, abs=1e-14)
    assert qcalc.eval_U(2.0, 3.0, MODEL) == pytest.approx(2.5)
    with pytest.raises(ZeroDivisionError):
        qcalc.eval_U(1.0, 1.0, MODEL)


def test_eval_kx():
    # t = 0, x = 0 leaves the Cauchy-type factor alone
    assert qcalc.eval_Kx(2.0, 3.0, 0, 0.0, MODEL) == pytest.approx(
        1.0 / (MODEL.p + MODEL.q * 6.0 - 2.0))
    # regression pin by direct evaluation of the formula
    xi, xi_p = 2.0, 3.0
    expected = 2.0 * cmath.exp((0.3 / 2.0 + 0.7 * 2.0 - 1.0) * 0.5) / (
        0.3 + 0.7 * 6.0 - 2.0)
    assert qcalc.eval_Kx(xi, xi_p, 1, 0.5, MODEL) == pytest.approx(expected)


def test_fredholm_det_circle_rank_one():
    contour = qcalc.CircleContour(0.0, 1.5, 32)

    def kernel(xi, xi_p):  # a(xi) b(xi') with a = 1/(xi - 0.2), b = 1
        return 1.0 / (xi - 0.2)

    # det(I + s K) = 1 + s * (1/2 pi i) oint a(xi) dxi = 1 + s
    val = qcalc.fredholm_det_circle(kernel, contour, 0.7)
    assert val == pytest.approx(1.7, abs=1e-10)
    assert qcalc.fredholm_det_circle(kernel, contour, 0.0) == pytest.approx(1.0)


def test_fredholm_det_k0_identity():
    # det(I - tau^L lambda K0) = (tau^L lambda; tau)_inf for K0 = 1/(xi'-tau xi)
    tau, l_block, lam = 0.4, 1, 0.7
    contour = qcalc.CircleContour(0.0, 1.0, 64)
    val = qcalc.fredholm_det_circle(
        lambda e, ep: 1.0 / (ep - tau * e), contour, -(tau**l_block) * lam)
    ref = qcalc.qpoch(tau**l_block * lam, tau, math.inf)
    assert val == pytest.approx(ref, abs=1e-8)


def test_mint_identity():
    assert qcalc.mu_integral_lhs(1, 0.37) == pytest.approx(1.0, abs=1e-12)
    assert qcalc.mu_integral_rhs(1, 0.37) == 1.0
    assert qcalc.mu_integral_rhs(2, 0.5) == pytest.approx(-0.5)
    assert qcalc.mu_integral_lhs(2, 0.5) == pytest.approx(-0.5, abs=1e-10)
    rhs4 = -(0.3**15) / ((1 - 0.3) * (1 - 0.09) * (1 - 0.027))
    assert qcalc.mu_integral_rhs(4, 0.3) == pytest.approx(rhs4)
    assert abs(qcalc.mu_integral_lhs(4, 0.3) - rhs4) < 1e-10


def test_f_weight():
    w = (0.7 + 0.2j,)
    assert qcalc.contour_weight(w, 1, 0.4) == pytest.approx(1.0 / (w[0] * (w[0] - 0.4)))
    val = qcalc.contour_weight((2.0, 3.0), 2, 0.5)
    hand = (2.0 - 1.0) / (2.0 * 1.5**2) * 1.0 / (3.0 * 2.5) * (3.0 - 2.0) / (3.0 - 1.0)
    assert val == pytest.approx(hand)
    with pytest.raises(ValueError):
        qcalc.contour_weight((1.0,), 2, 0.5)


def test_f_bilateral_shift_identity():
    tau, z, mu = 0.4, 1.5, 0.3
    lhs = qcalc.f_bilateral(mu / tau, z, tau)
    rhs = tau * z * qcalc.f_bilateral(mu, z, tau)
    assert lhs == pytest.approx(rhs, abs=1e-10)


def test_f_bilateral_small_mu_geometric_limit():
    # the negative-k half needs mu != 0 (poles accumulate at 0); for small mu
    # the series approaches sum_{k>=0} (tau z)^k - (1/mu) sum_{j>=1} (z tau)^-j...
    # pin instead against direct summation at a regular point
    tau, z, mu = 0.4, 1.5, 0.3
    direct = sum(tau**k * z**k / (1.0 - tau**k * mu) for k in range(0, 200))
    direct += sum(z**-j / (tau**j - mu) for j in range(1, 200))
    assert qcalc.f_bilateral(mu, z, tau) == pytest.approx(direct, abs=1e-11)
    with pytest.raises(ValueError):
        qcalc.f_bilateral(0.0, z, tau)


def test_f_bilateral_domain():
    with pytest.raises(ValueError):
        qcalc.f_bilateral(0.3, 0.9, 0.4)
    with pytest.raises(ValueError):
        qcalc.f_bilateral(0.3, 2.6, 0.4)


def test_lambda_integral_node_doubling():
    z = (TAU,)
    a = qcalc.lambda_block_integral(0, 1, 0.5, 1, z, MODEL, n_xi=48, n_lambda=96)
    b = qcalc.lambda_block_integral(0, 1, 0.5, 1, z, MODEL, n_xi=96, n_lambda=192)
    assert abs(a - b) < 1e-10


def test_block_probability_matches_oracle():
    v = qcalc.block_probability_circle(0, 1, 0.5, 1, MODEL)
    space = oracle.default_space(MODEL, 0.5, 0, 1, 1)
    ref = oracle.prob_block(space, MODEL, 0.5, 0, 1, 1)
    assert v == pytest.approx(ref, abs=1e-6)


def test_initial_block_certain():
    assert qcalc.block_probability_circle(1, 1, 0.0, 2, MODEL) == pytest.approx(1.0, abs=1e-10)


def test_position_law_normalizes():
    total = sum(qcalc.block_probability_circle(x, 1, 0.5, 1, MODEL) for x in range(-10, 7))
    assert total == pytest.approx(1.0, abs=1e-6)


def test_deformed_route_matches_circle_route():
    for x, m, l_block in [(0, 1, 1), (1, 1, 2)]:
        a = qcalc.block_probability_deformed(x, m, 0.5, l_block, MODEL)
        b = qcalc.block_probability_circle(x, m, 0.5, l_block, MODEL)
        assert a == pytest.approx(b, abs=1e-6)


def test_phi_ratio_diagonal_is_one():
    v = np.array([0.3 + 0.2j])
    num = qcalc._phi_inf(v, 1, 2, 0.5, MODEL)
    assert num[0] / num[0] == pytest.approx(1.0)


def test_circle_quadrature_geometric_convergence():
    # analytic integrand: doubling nodes leaves the value unchanged
    def f(z):
        return cmath.exp(z) / (z - 2.0)

    vals = [qcalc.contour_integral(f, qcalc.CircleContour(0.0, 1.0, n))
            for n in (16, 32, 64, 128)]
    # no enclosed singularity: values shrink geometrically to zero
    assert abs(vals[1]) < 1e-3 * abs(vals[0])
    assert abs(vals[3]) == pytest.approx(abs(vals[2]), abs=1e-12)
    # residue of e^z/(z-2) inside |z|=3 is e^2
    inner = qcalc.contour_integral(f, qcalc.CircleContour(0.0, 3.0, 96))
    assert inner == pytest.approx(cmath.exp(2.0), abs=1e-10)


def test_lambda_contour_two_residue_cancellation():
    # with the determinant replaced by 1 at L=1, m=1: residues of
    # 1/((1-lam) lam) at 0 and 1 cancel over the enclosing circle
    contour = qcalc.CircleContour(0.0, TAU ** (-0.5), 128)
    val = qcalc.contour_integral(lambda lam: 1.0 / ((1.0 - lam) * lam), contour)
    assert abs(val) < 1e-12


def test_kx_growth_on_large_circle():
    # |K_x| on C_R is controlled by e^{qRt} R^x (used to size R)
    radius = 4.0
    t = 0.5
    bound = math.exp(MODEL.q * radius * t) * radius**1 / (
        MODEL.q * radius * radius - radius - MODEL.p)
    for theta in np.linspace(0.0, 2 * np.pi, 16, endpoint=False):
        xi = radius * cmath.exp(1j * theta)
        assert abs(qcalc.eval_Kx(xi, radius, 1, t, MODEL)) <= bound * 1.2


def test_f_bilateral_term_guard():
    with pytest.raises(RuntimeError):
        qcalc.f_bilateral(0.3, 1.000001, 0.4, max_terms=100)


def test_cost_guards():
    with pytest.raises(ValueError):
        qcalc.block_probability_circle(0, 1, 0.5, 3, MODEL)
    with pytest.raises(ValueError):
        qcalc.block_probability_deformed(0, 4, 0.5, 1, MODEL)
    with pytest.raises(ValueError):
        qcalc.block_probability_circle(0, 1, 5.0, 1, MODEL)
