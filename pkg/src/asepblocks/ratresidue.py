"""Exact nested-residue evaluation of the rational w-integrals.

The weight-function integrals behind the asymptotic constant -- the plain
integral of F (which vanishes), the saddle-factor integral with its closed
form, the stage-by-stage induction values, and the pole-order probe --
involve only rational integrands, but their residue branches reach
magnitudes ~ tau^(-L^2) that cancel exactly.  Floating-point tiny-circle
quadrature cannot certify |result| < 1e-10 against that cancellation
(double-precision noise alone is ~1e-4 at L=4, tau=0.2), so these
operations run in exact rational arithmetic.

Method: the iterated residues at {0, tau} (innermost variable first) are
a sum over pole assignments.  Variables sent to 0 are plain substitutions
(their poles are simple); a variable sent to tau contributes u_j^(-k_j)
with k_j = L-j+1, and every remaining factor is an invertible power series
in the u's, so each branch is one coefficient extraction in the truncated
polynomial algebra Q[u]/(u_j^(k_j)).  Jets carry Fraction coefficients;
results are exact rationals.  The probe of the inner reduced-weight integral keeps
the outer variable symbolic (sympy) and evaluates the reduced rational
function at the complex probe points.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from functools import lru_cache

import sympy as sp

__all__ = [
    "weight_integral_plain",
    "weight_integral_saddle",
    "staged_integral_value",
    "staged_integral_closed_form",
    "reduced_weight_probe",
    "reduced_weight_pole_order",
    "reduced_weight_degree_bound",
]


def _rationalize(x) -> Fraction:
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, Fraction):
        return x
    frac = Fraction(str(float(x)))
    if float(frac) != float(x):
        frac = Fraction(float(x))
    return frac


class _Jet:
    """Truncated multivariate polynomial over Fraction.

    coeffs maps exponent tuples to Fractions; degrees[i] is the truncation
    order of variable i (exponents run 0..degrees[i]).
    """

    __slots__ = ("degrees", "coeffs")

    def __init__(self, degrees: tuple[int, ...], coeffs: dict):
        self.degrees = degrees
        self.coeffs = coeffs

    @classmethod
    def const(cls, degrees, value) -> "_Jet":
        value = Fraction(value)
        zero = (0,) * len(degrees)
        return cls(degrees, {zero: value} if value else {})

    @classmethod
    def variable(cls, degrees, index, shift) -> "_Jet":
        coeffs = {}
        if shift:
            coeffs[(0,) * len(degrees)] = Fraction(shift)
        if degrees[index] >= 1:
            e = [0] * len(degrees)
            e[index] = 1
            coeffs[tuple(e)] = Fraction(1)
        return cls(degrees, coeffs)

    def __add__(self, other: "_Jet") -> "_Jet":
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            s = out.get(e)
            out[e] = c if s is None else s + c
            if not out[e]:
                del out[e]
        return _Jet(self.degrees, out)

    def __neg__(self) -> "_Jet":
        return _Jet(self.degrees, {e: -c for e, c in self.coeffs.items()})

    def __mul__(self, other: "_Jet") -> "_Jet":
        degs = self.degrees
        out: dict = {}
        for e1, c1 in self.coeffs.items():
            for e2, c2 in other.coeffs.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                if any(x > d for x, d in zip(e, degs)):
                    continue
                s = out.get(e)
                prod = c1 * c2
                out[e] = prod if s is None else s + prod
        return _Jet(degs, {e: c for e, c in out.items() if c})

    def scale(self, value) -> "_Jet":
        value = Fraction(value)
        if not value:
            return _Jet(self.degrees, {})
        return _Jet(self.degrees, {e: c * value for e, c in self.coeffs.items()})

    def inverse(self) -> "_Jet":
        zero = (0,) * len(self.degrees)
        c0 = self.coeffs.get(zero)
        if not c0:
            raise ZeroDivisionError("jet with zero constant term is not invertible")
        nil = _Jet(self.degrees, {e: -c / c0 for e, c in self.coeffs.items() if e != zero})
        total_deg = sum(self.degrees)
        out = _Jet.const(self.degrees, 1)
        term = _Jet.const(self.degrees, 1)
        for _ in range(total_deg):
            term = term * nil
            if not term.coeffs:
                break
            out = out + term
        return out.scale(Fraction(1, 1) / c0)

    def power(self, n: int) -> "_Jet":
        if n < 0:
            return self.inverse().power(-n)
        out = _Jet.const(self.degrees, 1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def top_coefficient(self) -> Fraction:
        return self.coeffs.get(self.degrees, Fraction(0))


def _branch_residue(l_block: int, sigma: tuple[int, ...], tau: Fraction,
                    extra) -> Fraction:
    """One pole-assignment branch of the iterated residue of F * extra.

    sigma[j] = 0 sends w_{j+1} to 0 (simple pole from 1/w), 1 sends it to
    tau (pole order L-j from the (w-tau) power).  `extra(w_values, degrees)`
    multiplies in any additional analytic factor as a jet.
    """
    jet_slots = [j for j in range(l_block) if sigma[j] == 1]
    degrees = tuple(l_block - j - 1 for j in jet_slots)
    slot_of = {j: i for i, j in enumerate(jet_slots)}

    def w_val(j):
        if sigma[j] == 0:
            return None  # concrete zero
        return _Jet.variable(degrees, slot_of[j], tau)

    total = _Jet.const(degrees, 1)

    for j in range(l_block):
        wj = w_val(j)
        num_pow = l_block - j - 1  # (w_j - 1) power, 0-based j
        den_pow = l_block - j  # (w_j - tau) power = pole order at tau
        if sigma[j] == 0:
            # substitute w_j = 0: strip 1/w_j (residue coefficient 1),
            # evaluate (w_j-1)^num_pow / (w_j-tau)^den_pow at 0
            val = Fraction(-1) ** num_pow / (-tau) ** den_pow
            total = total.scale(val)
        else:
            # w_j = tau + u_j: strip (w_j-tau)^(-den_pow) = u^(-den_pow),
            # keep (w_j-1)^num_pow / w_j as jets
            wj_minus_1 = wj + _Jet.const(degrees, -1)
            total = total * wj_minus_1.power(num_pow) * wj.inverse()

    for j in range(l_block):
        for i in range(j):
            # pair factor (w_j - w_i) / (w_j - tau w_i), i outer, j inner
            si, sj = sigma[i], sigma[j]
            if sj == 0 and si == 0:
                total = total.scale(Fraction(1, 1) / tau)  # innermost-first limit
            elif sj == 0:
                wi = w_val(i)
                total = total * wi.scale(-1) * (wi.scale(-tau)).inverse()
            else:
                wj = w_val(j)
                wi_jet = w_val(i) if si == 1 else _Jet.const(degrees, 0)
                num = wj + wi_jet.scale(-1)
                den = wj + wi_jet.scale(-tau)
                total = total * num * den.inverse()

    if extra is not None:
        total = total * extra(w_val, degrees)

    return total.top_coefficient()


def _nested_residue_exact(l_block: int, tau: Fraction, extra=None) -> Fraction:
    out = Fraction(0)
    for sigma in itertools.product((0, 1), repeat=l_block):
        out += _branch_residue(l_block, sigma, tau, extra)
    return out


def weight_integral_plain(l_block: int, tau) -> complex:
    """Nested residue integral of the bare contour weight; identically zero."""
    return complex(_nested_residue_exact(l_block, _rationalize(tau)))


def weight_integral_saddle(l_block: int, tau, xi) -> complex:
    """Nested residue integral of the contour weight times sum_j w_j/(w_j xi - tau).

    Closed form: -xi^(L-1)/(1-xi)^L * (1-tau)...(1-tau^(L-1)) / tau^(L^2).
    """
    tau_r, xi_r = _rationalize(tau), _rationalize(xi)

    def extra(w_val, degrees):
        acc = _Jet.const(degrees, 0)
        for j in range(l_block):
            wj = w_val(j)
            if wj is None:
                continue  # w_j = 0 contributes nothing to the sum
            acc = acc + wj * (wj.scale(xi_r) + _Jet.const(degrees, -tau_r)).inverse()
        return acc

    return complex(_nested_residue_exact(l_block, tau_r, extra))


def staged_integral_closed_form(l_block: int, tau, xi) -> float:
    """The final value of the staged integration (stage k = L)."""
    tau_f, xi_f = float(tau), float(xi)
    prod = 1.0
    for j in range(1, l_block):
        prod *= 1.0 - tau_f**j
    return -(xi_f ** (l_block - 1)) / (1.0 - xi_f) ** l_block * prod / tau_f ** (
        l_block * l_block)


def _staged_integral_exact(l_block: int, k: int, tau: Fraction, xi: Fraction) -> Fraction:
    n_rem = l_block - k
    factor = (
        -(xi ** (l_block - 1))
        / (1 - xi) ** l_block
        * (tau**k / xi - 1) ** n_rem
        / tau ** (k * l_block)
    )
    for j in range(1, k):
        factor *= 1 - tau**j
    if n_rem == 0:
        return factor

    shift = tau ** (k + 1) / xi

    def extra(w_val, degrees):
        acc = _Jet.const(degrees, 1)
        for j in range(n_rem):
            wj = w_val(j)
            if wj is None:
                acc = acc.scale((tau / xi) / shift)
            else:
                num = wj.scale(-1) + _Jet.const(degrees, tau / xi)
                den = wj.scale(-1) + _Jet.const(degrees, shift)
                acc = acc * num * den.inverse()
        return acc

    return factor * _nested_residue_exact(n_rem, tau, extra)


def staged_integral_value(l_block: int, k: int, tau, xi) -> complex:
    """Value of the staged integration after integrating out k variables.

    Stage independence (the same value for every k = 0..L) is the inductive
    step of the asymptotic evaluation; k = 0 is the full integral, k = L
    the closed form.
    """
    if not 0 <= k <= l_block:
        raise ValueError("stage k must lie in 0..L")
    if k == 0:
        return weight_integral_saddle(l_block, tau, xi)
    return complex(_staged_integral_exact(l_block, k, _rationalize(tau), _rationalize(xi)))


# ---------------------------------------------------------------------------
# pole-order probe of the inner reduced-weight integral (outer variable symbolic)
# ---------------------------------------------------------------------------


def _reduced_weight_expr(w: list[sp.Symbol], tau) -> sp.Expr:
    l_block = len(w)
    out = sp.Integer(1)
    for j in range(2, l_block + 1):
        wj = w[j - 1]
        out *= (wj - 1) ** (l_block - j) / (wj * (wj - tau) ** (l_block - j + 1))
    for i in range(l_block):
        for j in range(i + 1, l_block):
            out *= (w[i] - w[j]) / (tau * w[i] - w[j])
    return out


@lru_cache(maxsize=32)
def _reduced_weight_symbolic(l_block: int, tau_key: str):
    tau = sp.Rational(tau_key)
    w = [sp.Symbol(f"w{j}") for j in range(1, l_block + 1)]
    expr = sp.together(_reduced_weight_expr(w, tau))
    for var in reversed(w[1:]):
        expr = sp.cancel(sp.residue(expr, var, 0) + sp.residue(expr, var, tau))
    return sp.cancel(expr), w[0]


def reduced_weight_probe(l_block: int, tau, w1: complex, psi=None) -> complex:
    """The (L-1)-fold inner integral of the reduced weight times psi.

    With psi omitted (constant 1) the reduction is exact and the result is
    a rational function of w_1 evaluated at the probe point; a callable psi
    falls back to tiny-circle quadrature in floating point.
    """
    if complex(w1) in (0j, complex(float(tau))):
        raise ValueError("probe point must avoid the residue points 0 and tau")
    if psi is None:
        expr, w1_sym = _reduced_weight_symbolic(l_block, str(sp.Rational(_rationalize(tau))))
        num, den = sp.fraction(expr)
        return complex(sp.lambdify(w1_sym, num)(complex(w1))
                       / sp.lambdify(w1_sym, den)(complex(w1)))
    return _reduced_weight_numeric(l_block, float(tau), complex(w1), psi)


def reduced_weight_pole_order(l_block: int, tau) -> int:
    """Order of the w_1 = 1 pole of the psi = 1 probe, read off exactly."""
    expr, w1_sym = _reduced_weight_symbolic(l_block, str(sp.Rational(_rationalize(tau))))
    den = sp.denom(sp.cancel(expr))
    poly = sp.Poly(den, w1_sym)
    order = 0
    while poly.eval(1) == 0:
        poly = sp.Poly(sp.quo(poly.as_expr(), w1_sym - 1, w1_sym), w1_sym)
        order += 1
    return order


def reduced_weight_degree_bound(l_block: int, tau) -> int:
    """deg(numerator) - deg(denominator) in w_1; <= 0 means O(1) at infinity."""
    expr, w1_sym = _reduced_weight_symbolic(l_block, str(sp.Rational(_rationalize(tau))))
    num, den = sp.fraction(sp.cancel(expr))
    return int(sp.degree(num, w1_sym)) - int(sp.degree(den, w1_sym))


def _reduced_weight_numeric(l_block: int, tau: float, w1: complex, psi) -> complex:
    from .qcalc import CircleContour

    radii = [0.1 * min(tau, 1 - tau) * min(0.3, tau / 3.0) ** j
             for j in range(l_block - 1)]

    def pair(outer_i, inner_j):
        if inner_j == 0.0:
            return 1.0 / tau  # innermost-first limit of (w_i - w_j)/(tau w_i - w_j)
        return (outer_i - inner_j) / (tau * outer_i - inner_j)

    def recurse(values):
        depth = len(values)
        if depth == l_block - 1:
            allw = (w1,) + values
            coupling = 1.0 + 0.0j
            for j in range(1, l_block):
                for i in range(j):
                    coupling *= pair(allw[i], allw[j])
            return coupling * complex(psi(*values))
        j = depth + 2  # variable index in 2..L
        k = l_block - j + 1
        total = 0.0 + 0.0j
        total += (-1.0) ** (l_block - j) / (-tau) ** k * recurse(values + (0.0,))
        if k == 1:
            total += (tau - 1.0) ** (l_block - j) / tau * recurse(values + (tau,))
        else:
            circle = CircleContour(tau, radii[depth], 32)
            nodes, weights = circle.nodes_weights()
            for v, w in zip(nodes, weights):
                base = (v - 1.0) ** (l_block - j) / (v * (v - tau) ** k)
                total += w * base * recurse(values + (v,))
        return total

    return recurse(())
