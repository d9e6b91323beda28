"""High-accuracy Airy function Ai and its derivative.

Three regimes, each validated against the others on overlap grids:

* |x| <= 4.5      -- Maclaurin series, accumulated in extended precision
                     (the two series cancel like exp(2*zeta) for x > 0, so
                     long-double accumulation is needed for 12 digits);
* 4.5 < |x| < 9   -- Taylor marching of y'' = x*y from anchor values,
                     seeded at +9 from the asymptotic series (marching
                     toward the turning point follows the growing solution,
                     so it is stable for Ai) and at -4.5 from the series;
* |x| >= 9        -- Poincare asymptotic expansions (monotone branch on the
                     right, oscillatory branch with the zeta +- pi/4 phases
                     on the left), truncated at the smallest term.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["airy", "airy_unchecked"]

# string-parsed so the long-double constants keep their full precision
_AI0 = np.longdouble("0.3550280538878172392600631860041831763980")  # 3^(-2/3)/Gamma(2/3)
_AIP0 = np.longdouble("-0.2588194037928067984051835601892039634793")  # -3^(-1/3)/Gamma(1/3)

_SERIES_EDGE = 4.5
_ASYMP_EDGE = 9.0
_DOMAIN = 50.0

_MARCH_STEP = 0.25
_TAYLOR_ORDER = 26


def _maclaurin(x: float) -> tuple[float, float]:
    """Ai, Ai' by the defining power series in long-double arithmetic."""
    xl = np.longdouble(x)
    x3 = xl * xl * xl
    f = fp = g = gp = np.longdouble(0)
    tf = tg = np.longdouble(1)  # f, g series terms (g term excludes the x factor)
    tfp = xl * xl / 2  # f' term at k=1
    tgp = np.longdouble(1)  # g' term at k=0
    f += tf
    g += tg
    gp += tgp
    k = 1
    while True:
        tf = tf * x3 / ((3 * k) * (3 * k - 1))
        tg = tg * x3 / ((3 * k + 1) * (3 * k))
        tgp = tgp * x3 / ((3 * k) * (3 * k - 2))
        f += tf
        g += tg
        gp += tgp
        fp += tfp
        tfp = tfp * x3 / ((3 * k + 2) * (3 * k))
        k += 1
        if abs(tf) < 1e-26 * abs(f) and abs(tg) < 1e-26 * max(abs(g), 1.0) and k > 4:
            break
        if k > 300:
            raise RuntimeError("Airy Maclaurin series failed to converge")
    ai = _AI0 * f + _AIP0 * (xl * g)
    aip = _AI0 * fp + _AIP0 * gp
    return float(ai), float(aip)


def _asymp_coeffs(n: int) -> tuple[np.ndarray, np.ndarray]:
    u = np.empty(n)
    v = np.empty(n)
    u[0] = v[0] = 1.0
    for k in range(1, n):
        u[k] = u[k - 1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / (216.0 * k * (2 * k - 1))
        v[k] = -u[k] * (6 * k + 1) / (6 * k - 1)
    return u, v


_U, _V = _asymp_coeffs(40)


def _asymp_pos(x: float) -> tuple[float, float]:
    zeta = 2.0 / 3.0 * x * math.sqrt(x)
    if zeta > 700.0:  # exp(-zeta) underflows; avoid zeta**k overflow
        return 0.0, 0.0
    su = sv = 0.0
    sign = 1.0
    prev = math.inf
    for k in range(40):
        term = _U[k] / zeta**k
        if term > prev:  # divergent tail reached
            break
        su += sign * term
        sv += sign * _V[k] / zeta**k
        prev = term
        sign = -sign
    pre = math.exp(-zeta) / (2.0 * math.sqrt(math.pi))
    return pre * su / x**0.25, -pre * sv * x**0.25


def _asymp_neg(x: float) -> tuple[float, float]:
    ax = -x
    zeta = 2.0 / 3.0 * ax * math.sqrt(ax)
    # split the u and v series into even/odd parts
    se = so = ve = vo = 0.0
    sign = 1.0
    for k in range(0, 19):
        se += sign * _U[2 * k] / zeta ** (2 * k)
        so += sign * _U[2 * k + 1] / zeta ** (2 * k + 1)
        ve += sign * _V[2 * k] / zeta ** (2 * k)
        vo += sign * _V[2 * k + 1] / zeta ** (2 * k + 1)
        sign = -sign
        if _U[2 * k + 2] / zeta ** (2 * k + 2) > _U[2 * k] / zeta ** (2 * k):
            break
    phase = zeta + 0.25 * math.pi
    s, c = math.sin(phase), math.cos(phase)
    ai = (s * se - c * so) / (math.sqrt(math.pi) * ax**0.25)
    aip = -(c * ve + s * vo) * ax**0.25 / math.sqrt(math.pi)
    return ai, aip


def _taylor_step(x0: float, ai: float, aip: float, h: float) -> tuple[float, float]:
    """One Taylor step of y'' = x*y from x0 to x0+h."""
    a = np.empty(_TAYLOR_ORDER + 2)
    a[0] = ai
    a[1] = aip
    for n in range(_TAYLOR_ORDER):
        prev = a[n - 1] if n >= 1 else 0.0
        a[n + 2] = (x0 * a[n] + prev) / ((n + 1) * (n + 2))
    y = yp = 0.0
    for n in range(_TAYLOR_ORDER + 1, -1, -1):
        y = y * h + a[n]
    for n in range(_TAYLOR_ORDER + 1, 0, -1):
        yp = yp * h + n * a[n]
    return y, yp


def _march_anchors() -> dict[float, tuple[float, float]]:
    anchors = {}
    # downward from the asymptotic seed at +9 to +4.5
    x = _ASYMP_EDGE
    val = _asymp_pos(x)
    anchors[x] = val
    while x > _SERIES_EDGE + 1e-9:
        val = _taylor_step(x, *val, -_MARCH_STEP)
        x = round(x - _MARCH_STEP, 10)
        anchors[x] = val
    # leftward from the series seed at -4.5 to -9
    x = -_SERIES_EDGE
    val = _maclaurin(x)
    anchors[x] = val
    while x > -_ASYMP_EDGE + 1e-9:
        val = _taylor_step(x, *val, -_MARCH_STEP)
        x = round(x - _MARCH_STEP, 10)
        anchors[x] = val
    return anchors


_ANCHORS: dict[float, tuple[float, float]] | None = None


def airy_unchecked(x: float) -> tuple[float, float]:
    """(Ai(x), Ai'(x)) without the domain guard; underflows to zero far right."""
    global _ANCHORS
    if abs(x) <= _SERIES_EDGE:
        return _maclaurin(x)
    if x >= _ASYMP_EDGE:
        return _asymp_pos(x)
    if x <= -_ASYMP_EDGE:
        return _asymp_neg(x)
    if _ANCHORS is None:
        _ANCHORS = _march_anchors()
    anchor = math.copysign(round(abs(x) / _MARCH_STEP) * _MARCH_STEP, x)
    if abs(anchor) < _SERIES_EDGE:
        anchor = math.copysign(_SERIES_EDGE, x)
    if abs(anchor) > _ASYMP_EDGE:
        anchor = math.copysign(_ASYMP_EDGE, x)
    ai, aip = _ANCHORS[round(anchor, 10)]
    return _taylor_step(anchor, ai, aip, x - anchor)


def airy(x: float) -> tuple[float, float]:
    """Airy Ai and Ai' to at least 12 significant digits on |x| <= 50."""
    if abs(x) > _DOMAIN:
        raise ValueError(f"airy argument out of range: |{x}| > {_DOMAIN}")
    return airy_unchecked(x)
